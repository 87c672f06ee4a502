//! How the ranks respond to the damping factor.
//!
//! Analytic derivatives are evaluated where compact formulas exist (the
//! pure line, and the two transcribed composite expressions for the
//! line-sharing-node structure). Everything else goes through a central
//! finite difference, which is also the arbiter when an analytic
//! expression and the numeric value disagree: the transcribed composite
//! for graph-only members is known to carry a sign error, so the checked
//! wrappers always report both values and trust the numeric one.
//!
//! The sweep and maximization helpers generate the data behind per-node
//! rank-versus-c curves and their optima.

use thiserror::Error;

use crate::closed_forms::{self, ClosedFormError};
use crate::graph::{generate, DirectedGraph, GraphError, NodeId, StructureKind, StructureSpec, WeightVector};
use crate::solver::{self, SolveOptions, SolverError, Variant};

/// Default step for central finite differences.
pub const FD_STEP: f64 = 1e-6;

/// Search domain for [`find_c_max`]; c = 0 and c = 1 are excluded because
/// the model degenerates at both ends.
pub const C_MAX_DOMAIN: (f64, f64) = (0.001, 0.999);
const C_MAX_GRID: usize = 999;
const C_MAX_REFINE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SensitivityError {
    #[error("invalid sweep range: c_lo {0}, c_hi {1}, steps {2} (need 0 < c_lo < c_hi < 1 and steps >= 2)")]
    InvalidRange(f64, f64, usize),
    #[error("finite-difference step leaves (0,1): c = {0}, h = {1}")]
    StepOutOfRange(f64, f64),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error(transparent)]
    ClosedForm(#[from] ClosedFormError),
    #[error(transparent)]
    Solver(#[from] SolverError),
}

impl From<GraphError> for SensitivityError {
    fn from(e: GraphError) -> Self {
        SensitivityError::InvalidParams(e.to_string())
    }
}

/// What a sweep runs on: a structure evaluated through its closed forms
/// when it has them, or an arbitrary graph evaluated through the solver.
#[derive(Debug, Clone)]
pub enum SweepSource {
    Structure(StructureSpec),
    Graph(DirectedGraph),
}

/// Rank values tabulated over an ascending damping grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRecord {
    pub c_grid: Vec<f64>,
    pub nodes: Vec<NodeId>,
    /// `values[k][m]` is the rank of `nodes[m]` at `c_grid[k]`.
    pub values: Vec<Vec<f64>>,
    pub variant: Variant,
}

/// Result of maximizing a node's normalized rank over the damping domain.
#[derive(Debug, Clone, PartialEq)]
pub struct CMaxResult {
    pub c_max: f64,
    pub value_at_max: f64,
    /// True when the best grid point sits at the domain edge; the real
    /// maximum then lies at or beyond the boundary.
    pub boundary_hit: bool,
}

/// An analytic derivative together with its finite-difference check.
/// `value` is the printed number when the two agree and the numeric one
/// when they do not.
#[derive(Debug, Clone, PartialEq)]
pub struct DerivativeCheck {
    pub printed: f64,
    pub numeric: f64,
    pub agrees: bool,
    pub value: f64,
}

fn check_c_open(c: f64) -> Result<(), SensitivityError> {
    if c.is_finite() && c > 0.0 && c < 1.0 {
        Ok(())
    } else {
        Err(SensitivityError::InvalidParams(format!("c out of range: {c} (must be in (0,1))")))
    }
}

/// Evaluates R1 or R2 for a full vector at one damping value.
fn rank_vector(source: &SweepSource, variant: Variant, c: f64) -> Result<Vec<f64>, SensitivityError> {
    let r2 = match source {
        SweepSource::Structure(spec) => match closed_forms::evaluate(spec, c)? {
            Some(result) => result.r2,
            None => solve_r2(&generate(spec)?, c)?,
        },
        SweepSource::Graph(g) => solve_r2(g, c)?,
    };
    match variant {
        Variant::R2 => Ok(r2),
        Variant::R1 => {
            let total: f64 = r2.iter().sum();
            Ok(r2.iter().map(|x| x / total).collect())
        }
        Variant::R3 => Err(SensitivityError::InvalidParams(
            "sweeps cover the normalized and non-normalized variants only".into(),
        )),
    }
}

fn solve_r2(g: &DirectedGraph, c: f64) -> Result<Vec<f64>, SensitivityError> {
    Ok(solver::pagerank_r2(g, c, &WeightVector::uniform(g.n()), &SolveOptions::default())?.values)
}

/// Tabulates the chosen variant on an evenly spaced damping grid. An empty
/// `nodes` slice records every node.
pub fn sweep_c(
    source: &SweepSource,
    variant: Variant,
    nodes: &[NodeId],
    c_lo: f64,
    c_hi: f64,
    steps: usize,
) -> Result<SweepRecord, SensitivityError> {
    if !(c_lo.is_finite() && c_hi.is_finite() && 0.0 < c_lo && c_lo < c_hi && c_hi < 1.0)
        || steps < 2
    {
        return Err(SensitivityError::InvalidRange(c_lo, c_hi, steps));
    }
    let n = match source {
        SweepSource::Structure(spec) => {
            spec.validate()?;
            spec.node_count()
        }
        SweepSource::Graph(g) => g.n(),
    };
    let nodes: Vec<NodeId> =
        if nodes.is_empty() { (0..n).collect() } else { nodes.to_vec() };
    for &node in &nodes {
        if node >= n {
            return Err(SensitivityError::InvalidParams(format!(
                "node {} out of range (graph has {} nodes)",
                node + 1,
                n
            )));
        }
    }

    let mut c_grid = Vec::with_capacity(steps);
    let mut values = Vec::with_capacity(steps);
    for k in 0..steps {
        let c = c_lo + (c_hi - c_lo) * k as f64 / (steps - 1) as f64;
        let full = rank_vector(source, variant, c)?;
        values.push(nodes.iter().map(|&j| full[j]).collect());
        c_grid.push(c);
    }
    Ok(SweepRecord { c_grid, nodes, values, variant })
}

/// The line rank derivative
/// `d/dc R2_i = (1-c)^-2 - c^m m / (c (1-c)) - c^m / (1-c)^2` with
/// `m = n_line - i + 1`, grouped so the last node gives exactly 0.
pub fn dr2_dc_line(n_line: usize, i: usize, c: f64) -> Result<f64, SensitivityError> {
    if n_line == 0 || i == 0 || i > n_line {
        return Err(SensitivityError::InvalidParams(format!(
            "line position {i} out of range for a {n_line}-node line"
        )));
    }
    check_c_open(c)?;
    let m = (n_line - i + 1) as i32;
    let cm = c.powi(m);
    let one = 1.0 - c;
    Ok(((1.0 - cm) / one - cm * m as f64 / c) / one)
}

/// Central difference `(f(c+h) - f(c-h)) / (2h)` applied to a vector-valued
/// function of the damping factor.
pub fn dr_dc_numeric<F, E>(mut f: F, c: f64, h: f64) -> Result<Vec<f64>, SensitivityError>
where
    F: FnMut(f64) -> Result<Vec<f64>, E>,
    SensitivityError: From<E>,
{
    if !(h.is_finite() && h > 0.0) || !(c - h > 0.0 && c + h < 1.0) {
        return Err(SensitivityError::StepOutOfRange(c, h));
    }
    let hi = f(c + h)?;
    let lo = f(c - h)?;
    if hi.len() != lo.len() {
        return Err(SensitivityError::InvalidParams(
            "function changed dimension between evaluation points".into(),
        ));
    }
    Ok(hi.iter().zip(&lo).map(|(a, b)| (a - b) / (2.0 * h)).collect())
}

fn share_params_valid(n_line: usize, n_complete: usize, j: usize) -> Result<(), SensitivityError> {
    StructureSpec::share(n_line, n_complete, j).validate()?;
    Ok(())
}

/// Literal evaluation of the transcribed derivative of the shared node's
/// non-normalized rank in the line-sharing-node structure. Valid for an
/// interior attachment (j > 1); the checked wrapper guards it with the
/// numeric oracle either way.
pub fn dr2_dc_share_shared_printed(
    n_line: usize,
    n_complete: usize,
    j: usize,
    c: f64,
) -> Result<f64, SensitivityError> {
    share_params_valid(n_line, n_complete, j)?;
    check_c_open(c)?;
    let ng = n_complete as f64;
    // G(c) is the pure-line rank of position j; its derivative is the line
    // formula above.
    let m = (n_line - j + 1) as i32;
    let g = (1.0 - c.powi(m)) / (1.0 - c);
    let gp = dr2_dc_line(n_line, j, c)?;
    let e = (c - 1.0) * ng * ng + (c - 1.0) * (c - 1.0) * ng - c * c;
    let first = e * ((c - 1.0) * ng - 2.0 * c + 1.0) * gp * ng / (e * e);
    let second = (ng - 1.0)
        * (c * ((c - 2.0) * ng + 2.0 - 2.0 * c) * g - (ng - 1.0) * (ng + c * c))
        * ng
        / (e * e);
    Ok(first - second)
}

/// Literal evaluation of the transcribed derivative of a graph-only
/// member's non-normalized rank in the line-sharing-node structure. The
/// transcription is faithful to its source, which carries a sign error in
/// the first term; use [`dr2_dc_share_graph`] to get the corrected value.
pub fn dr2_dc_share_graph_printed(
    n_line: usize,
    n_complete: usize,
    j: usize,
    c: f64,
) -> Result<f64, SensitivityError> {
    share_params_valid(n_line, n_complete, j)?;
    check_c_open(c)?;
    let ng = n_complete as f64;
    let one = 1.0 - c;
    let tail = 1.0 - c.powi((n_line - j) as i32);
    let d = ng * (ng - 1.0) - (ng - 1.0) * c * c - ng * (ng - 2.0) * c;
    let top = (c + ng) * (ng - 1.0) * one + (ng - 1.0) * c * c * tail;
    let t1 = ((ng - 1.0) * one - (c - ng) * (ng - 1.0) + 2.0 * (ng - 1.0) * c * tail) / (one * d);
    let t2 = (ng - 1.0) * c.powi(1 + (n_line - j) as i32) * (n_line - j) as f64 / (one * d);
    let t3 = top / (one * one * d);
    let t4 = top * (2.0 * c + (2.0 - 2.0 * c - ng) * ng) / (one * d * d);
    Ok(t1 - t2 + t3 - t4)
}

fn checked(printed: f64, numeric: f64) -> DerivativeCheck {
    let agrees = (printed - numeric).abs() <= f64::max(1e-5 * numeric.abs(), 1e-7);
    DerivativeCheck { printed, numeric, agrees, value: if agrees { printed } else { numeric } }
}

/// Shared-node rank derivative: transcribed expression checked against the
/// finite difference of the closed form. Disagreement is reported on
/// stderr and the numeric value wins.
pub fn dr2_dc_share_shared(
    n_line: usize,
    n_complete: usize,
    j: usize,
    c: f64,
) -> Result<DerivativeCheck, SensitivityError> {
    let printed = dr2_dc_share_shared_printed(n_line, n_complete, j, c)?;
    let numeric = dr_dc_numeric(
        |x| closed_forms::line_sharing_node_r2(n_line, n_complete, j, x).map(|r| r.r2),
        c,
        FD_STEP,
    )?[j - 1];
    let check = checked(printed, numeric);
    if !check.agrees {
        eprintln!(
            "shared-node derivative mismatch at (n_line={n_line}, n_complete={n_complete}, j={j}, c={c}): \
             analytic {printed}, numeric {numeric}; using numeric"
        );
    }
    Ok(check)
}

/// Graph-only-member rank derivative: the transcribed expression disagrees
/// with the finite difference by design (its source has a sign error), so
/// this normally reports `agrees = false` and returns the numeric value.
pub fn dr2_dc_share_graph(
    n_line: usize,
    n_complete: usize,
    j: usize,
    c: f64,
) -> Result<DerivativeCheck, SensitivityError> {
    let printed = dr2_dc_share_graph_printed(n_line, n_complete, j, c)?;
    let numeric = dr_dc_numeric(
        |x| closed_forms::line_sharing_node_r2(n_line, n_complete, j, x).map(|r| r.r2),
        c,
        FD_STEP,
    )?[n_line];
    let check = checked(printed, numeric);
    if !check.agrees {
        eprintln!(
            "graph-member derivative mismatch at (n_line={n_line}, n_complete={n_complete}, j={j}, c={c}): \
             analytic {printed}, numeric {numeric}; using numeric"
        );
    }
    Ok(check)
}

/// Normalized-rank evaluator used by the maximizer: closed forms when the
/// structure has them, one generated graph plus dense solves otherwise.
struct R1Source {
    spec: StructureSpec,
    fallback: Option<DirectedGraph>,
}

impl R1Source {
    fn new(spec: &StructureSpec) -> Result<Self, SensitivityError> {
        spec.validate()?;
        let fallback = match spec.kind {
            StructureKind::LineWithBacklink | StructureKind::LineSplit => Some(generate(spec)?),
            _ => None,
        };
        Ok(R1Source { spec: spec.clone(), fallback })
    }

    fn r1(&self, c: f64) -> Result<Vec<f64>, SensitivityError> {
        if let Some(g) = &self.fallback {
            let r2 = solve_r2(g, c)?;
            let total: f64 = r2.iter().sum();
            return Ok(r2.iter().map(|x| x / total).collect());
        }
        Ok(closed_forms::evaluate(&self.spec, c)?
            .expect("closed-form kinds have no fallback graph")
            .r1)
    }
}

/// Maximizes the node's normalized rank over the default damping domain.
pub fn find_c_max(spec: &StructureSpec, node: NodeId) -> Result<CMaxResult, SensitivityError> {
    find_c_max_on(spec, node, C_MAX_DOMAIN.0, C_MAX_DOMAIN.1, C_MAX_GRID)
}

/// Grid scan over `[c_lo, c_hi]` followed by golden-section refinement of
/// the best interior cell to a bracket of width 1e-6. A best point on the
/// domain edge is returned as-is with `boundary_hit` set.
pub fn find_c_max_on(
    spec: &StructureSpec,
    node: NodeId,
    c_lo: f64,
    c_hi: f64,
    grid_points: usize,
) -> Result<CMaxResult, SensitivityError> {
    if !(0.0 < c_lo && c_lo < c_hi && c_hi < 1.0) || grid_points < 3 {
        return Err(SensitivityError::InvalidRange(c_lo, c_hi, grid_points));
    }
    let source = R1Source::new(spec)?;
    if node >= spec.node_count() {
        return Err(SensitivityError::InvalidParams(format!(
            "node {} out of range (structure has {} nodes)",
            node + 1,
            spec.node_count()
        )));
    }
    let f = |c: f64| -> Result<f64, SensitivityError> { Ok(source.r1(c)?[node]) };

    let grid_c = |k: usize| c_lo + (c_hi - c_lo) * k as f64 / (grid_points - 1) as f64;
    let mut best_k = 0usize;
    let mut best_v = f64::NEG_INFINITY;
    for k in 0..grid_points {
        let v = f(grid_c(k))?;
        if v > best_v {
            best_v = v;
            best_k = k;
        }
    }
    if best_k == 0 || best_k == grid_points - 1 {
        return Ok(CMaxResult { c_max: grid_c(best_k), value_at_max: best_v, boundary_hit: true });
    }

    // Golden-section maximization on the bracket around the best cell;
    // the pre-scan makes the curve effectively unimodal on it.
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (grid_c(best_k - 1), grid_c(best_k + 1));
    let mut x1 = b - phi * (b - a);
    let mut x2 = a + phi * (b - a);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    while b - a > C_MAX_REFINE {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + phi * (b - a);
            f2 = f(x2)?;
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - phi * (b - a);
            f1 = f(x1)?;
        }
    }
    let c_max = 0.5 * (a + b);
    Ok(CMaxResult { c_max, value_at_max: f(c_max)?, boundary_hit: false })
}
