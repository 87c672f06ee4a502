//! Analytic non-normalized rank formulas for the structured graphs.
//!
//! Every function here has the dense solver as an independent oracle: the
//! test suites require agreement to 1e-9 in the max norm across the size
//! and damping grids. The formulas all come from reading the rank system
//! `(I - c A^T) x = e` as sums over walk probabilities: a node's rank is
//! `(incoming path mass + 1)` times the geometric factor of its return
//! loops.
//!
//! Positions inside a structure are 1-based (`i`, `j` as in the formulas);
//! result vectors are indexed by the generated graphs' node order.

use thiserror::Error;

use crate::graph::{generate, GraphError, StructureKind, StructureSpec, WeightVector};
use crate::linalg::DenseMatrix;
use crate::solver::{self, SolveOptions, SolverError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ClosedFormError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error(transparent)]
    Solver(#[from] SolverError),
}

impl From<GraphError> for ClosedFormError {
    fn from(e: GraphError) -> Self {
        ClosedFormError::InvalidParams(e.to_string())
    }
}

/// An analytic rank evaluation: the non-normalized vector `r2`, its L1 norm
/// (the normalizing constant), and the normalized vector `r1 = r2 / N`.
#[derive(Debug, Clone, PartialEq)]
pub struct ClosedFormResult {
    pub spec: StructureSpec,
    pub c: f64,
    pub r2: Vec<f64>,
    pub normalizer: f64,
    pub r1: Vec<f64>,
}

fn check_c(c: f64) -> Result<(), ClosedFormError> {
    if c.is_finite() && c > 0.0 && c < 1.0 {
        Ok(())
    } else {
        Err(ClosedFormError::InvalidParams(format!("c out of range: {c} (must be in (0,1))")))
    }
}

/// `sum_{k=0}^{terms-1} c^k = (1 - c^terms) / (1 - c)`; zero terms sum to 0.
fn geometric_sum(c: f64, terms: usize) -> f64 {
    (1.0 - c.powi(terms as i32)) / (1.0 - c)
}

fn finish(spec: StructureSpec, c: f64, r2: Vec<f64>) -> ClosedFormResult {
    let normalizer: f64 = r2.iter().sum();
    let r1 = r2.iter().map(|x| x / normalizer).collect();
    ClosedFormResult { spec, c, r2, normalizer, r1 }
}

/// Rank of the pure line: node `i` of `n_line` has
/// `r2_i = sum_{k=0}^{n_line-i} c^k`, the mass of the chain above it.
pub fn line_r2(n_line: usize, c: f64) -> Result<ClosedFormResult, ClosedFormError> {
    let spec = StructureSpec::line(n_line);
    spec.validate()?;
    check_c(c)?;
    let r2 = (1..=n_line).map(|i| geometric_sum(c, n_line - i + 1)).collect();
    Ok(finish(spec, c, r2))
}

/// Line plus one extra node linking to line position `j`. Line node `i`
/// gains `c^{j+1-i}` for `i <= j`; the attached node itself has rank 1.
pub fn line_with_attached_node_r2(
    n_line: usize,
    j: usize,
    c: f64,
) -> Result<ClosedFormResult, ClosedFormError> {
    let spec = StructureSpec::attached(n_line, j);
    spec.validate()?;
    check_c(c)?;
    let mut r2: Vec<f64> = (1..=n_line)
        .map(|i| {
            let base = geometric_sum(c, n_line - i + 1);
            let bonus = if i <= j { c.powi((j + 1 - i) as i32) } else { 0.0 };
            base + bonus
        })
        .collect();
    r2.push(1.0);
    Ok(finish(spec, c, r2))
}

/// Analytic normalizing constant for [`line_with_attached_node_r2`]:
/// the pure-line total, plus 1 for the new node, plus the bonuses
/// `c + c^2 + ... + c^j = c (1 - c^j) / (1 - c)`.
pub fn line_with_attached_normalizer(
    n_line: usize,
    j: usize,
    c: f64,
) -> Result<f64, ClosedFormError> {
    StructureSpec::attached(n_line, j).validate()?;
    check_c(c)?;
    let line_total: f64 =
        (0..n_line).map(|k| (n_line - k) as f64 * c.powi(k as i32)).sum();
    Ok(line_total + 1.0 + c * geometric_sum(c, j))
}

/// Every member of a complete graph has rank `1/(1-c)`: the full expected
/// walk length, since no mass ever leaves the graph.
pub fn complete_r2(n_complete: usize, c: f64) -> Result<ClosedFormResult, ClosedFormError> {
    let spec = StructureSpec::complete(n_complete);
    spec.validate()?;
    check_c(c)?;
    let r2 = vec![1.0 / (1.0 - c); n_complete];
    Ok(finish(spec, c, r2))
}

/// Complete graph whose node 1 also links to an external sink. With
/// `q = n(n-1) - n(n-2)c - (n-1)c^2`, node 1 has `(n(n-1) + nc) / q` and the
/// other members `(c+n)(n-1) / q`. The sink's value is not covered by the
/// member formulas and is computed with the dense solver and appended.
pub fn complete_with_outlink_r2(
    n_complete: usize,
    c: f64,
) -> Result<ClosedFormResult, ClosedFormError> {
    let spec = StructureSpec::complete_with_outlink(n_complete);
    spec.validate()?;
    check_c(c)?;
    let n = n_complete as f64;
    let q = n * (n - 1.0) - n * (n - 2.0) * c - (n - 1.0) * c * c;
    let first = (n * (n - 1.0) + n * c) / q;
    let others = (c + n) * (n - 1.0) / q;

    let g = generate(&spec)?;
    let solved = solver::pagerank_r2(&g, c, &WeightVector::uniform(g.n()), &SolveOptions::default())?;
    let sink = solved.values[n_complete];

    let mut r2 = vec![others; n_complete];
    r2[0] = first;
    r2.push(sink);
    Ok(finish(spec, c, r2))
}

/// Line and complete graph joined by one link from complete-graph node 1 to
/// line position `j`. Line nodes keep their pure-line rank plus an inflow
/// bonus `c^{j+1-i} (c + n_G - 1) / q`; graph members keep the
/// [`complete_with_outlink_r2`] values.
pub fn complete_to_line_r2(
    n_line: usize,
    n_complete: usize,
    j: usize,
    c: f64,
) -> Result<ClosedFormResult, ClosedFormError> {
    let spec = StructureSpec::complete_to_line(n_line, n_complete, j);
    spec.validate()?;
    check_c(c)?;
    let n = n_complete as f64;
    let q = n * (n - 1.0) - n * (n - 2.0) * c - (n - 1.0) * c * c;
    let linker = (n * (n - 1.0) + n * c) / q;
    let others = (c + n) * (n - 1.0) / q;

    let mut r2: Vec<f64> = (1..=n_line)
        .map(|i| {
            let base = geometric_sum(c, n_line - i + 1);
            let bonus = if i <= j {
                c.powi((j + 1 - i) as i32) * (c + n - 1.0) / q
            } else {
                0.0
            };
            base + bonus
        })
        .collect();
    r2.push(linker);
    r2.extend(std::iter::repeat(others).take(n_complete - 1));
    Ok(finish(spec, c, r2))
}

/// Line position `j` links into the complete graph (to member 1, the entry
/// node). `split` is node j's out-degree: 2 on an interior node, 1 when
/// `j = 1` and the line has no down-link to share with.
pub fn line_to_complete_r2(
    n_line: usize,
    n_complete: usize,
    j: usize,
    c: f64,
) -> Result<ClosedFormResult, ClosedFormError> {
    let spec = StructureSpec::line_to_complete(n_line, n_complete, j);
    spec.validate()?;
    check_c(c)?;
    let n = n_complete as f64;
    let split = if j > 1 { 2.0 } else { 1.0 };
    let w = (n - 1.0) - c * (n - 2.0);
    let base_member = 1.0 / (1.0 - c);
    // Mass of the line at or above j that exits into the graph.
    let feed = (c / split) * geometric_sum(c, n_line - j + 1);

    let mut r2: Vec<f64> = (1..=n_line)
        .map(|i| {
            if i >= j {
                geometric_sum(c, n_line - i + 1)
            } else {
                geometric_sum(c, j - i)
                    + (c.powi((j - i) as i32) / split) * geometric_sum(c, n_line - j + 1)
            }
        })
        .collect();
    // Entry node: the inflow multiplied by its return-loop factor, on top
    // of the plain complete-graph rank.
    r2.push(feed * w / (w - c * c) + base_member);
    let other = feed * c / (w - c * c) + base_member;
    r2.extend(std::iter::repeat(other).take(n_complete - 1));
    Ok(finish(spec, c, r2))
}

/// Parameters shared by the rank and normalizer formulas of the
/// line-sharing-node structure. `r_j` is the shared node's out-degree:
/// `n_G` on an interior line position, `n_G - 1` at `j = 1`.
struct SharedNodePieces {
    r_j: f64,
    /// Rank of the shared node.
    shared: f64,
    /// Rank of each graph-only member.
    graph_only: f64,
}

fn shared_node_pieces(n_line: usize, n_complete: usize, j: usize, c: f64) -> SharedNodePieces {
    let n = n_complete as f64;
    let r_j = if j > 1 { n } else { n - 1.0 };
    let w = (n - 1.0) - c * (n - 2.0);
    // Blockwise elimination of the complete-graph block gives these scalars:
    // a is the coupling between graph-only members, b the shared node's
    // outflow share into the graph.
    let a = -c / (n - 1.0);
    let b = -c / r_j;
    let denom = (1.0 - a * b) + (n - 2.0) * (a - a * b);
    let k_a = -a / denom;
    let loop_shared = 1.0 - (n - 1.0) * b * k_a;
    let inflow = geometric_sum(c, n_line - j + 1) + c * (n - 1.0) / w;
    let shared = loop_shared * inflow;
    // Graph-only members: the plain member rank plus the line mass that
    // filters through the shared node.
    let graph_only = (1.0 - b) / denom + c * geometric_sum(c, n_line - j) * (b / a) * k_a;
    SharedNodePieces { r_j, shared, graph_only }
}

/// Line whose position `j` is itself a complete-graph member. Nodes above
/// `j` keep pure-line values; the shared node multiplies its inflow by a
/// return-loop factor; nodes below `j` and the graph-only members split
/// what passes through the shared node.
pub fn line_sharing_node_r2(
    n_line: usize,
    n_complete: usize,
    j: usize,
    c: f64,
) -> Result<ClosedFormResult, ClosedFormError> {
    let spec = StructureSpec::share(n_line, n_complete, j);
    spec.validate()?;
    check_c(c)?;
    let p = shared_node_pieces(n_line, n_complete, j, c);

    let mut r2: Vec<f64> = (1..=n_line)
        .map(|i| {
            if i > j {
                geometric_sum(c, n_line - i + 1)
            } else if i == j {
                p.shared
            } else {
                geometric_sum(c, j - i) + c.powi((j - i) as i32) * p.shared / p.r_j
            }
        })
        .collect();
    r2.extend(std::iter::repeat(p.graph_only).take(n_complete - 1));
    Ok(finish(spec, c, r2))
}

/// Analytic normalizing constant for [`line_sharing_node_r2`], assembled
/// from the partial sums of the per-node formulas; cross-checked against
/// `||r2||_1` by the test suites.
pub fn line_sharing_normalizer(
    n_line: usize,
    n_complete: usize,
    j: usize,
    c: f64,
) -> Result<f64, ClosedFormError> {
    StructureSpec::share(n_line, n_complete, j).validate()?;
    check_c(c)?;
    let p = shared_node_pieces(n_line, n_complete, j, c);
    let n = n_complete as f64;
    let one = 1.0 - c;
    let above = (n_line - j) as f64 / one - c * (1.0 - c.powi((n_line - j) as i32)) / (one * one);
    let below = (j - 1) as f64 / one - c * (1.0 - c.powi((j - 1) as i32)) / (one * one)
        + c * (1.0 - c.powi((j - 1) as i32)) * p.shared / (p.r_j * one);
    Ok((n - 1.0) * p.graph_only + p.shared + above + below)
}

/// Inverse of `I - c A^T` for the line with the extra edge `1 -> 2`: the
/// top-left 2x2 block is `[[1, c], [c, 1]] / (1 - c^2)`, its rows continue
/// geometrically, and rows 3 and up are plain line rows `c^{k-i}`.
pub fn line_with_backlink_inverse(
    n_line: usize,
    c: f64,
) -> Result<DenseMatrix, ClosedFormError> {
    StructureSpec::backlink(n_line).validate()?;
    check_c(c)?;
    let s = 1.0 / (1.0 - c * c);
    Ok(DenseMatrix::from_fn(n_line, n_line, |i, k| match i {
        0 => s * c.powi(k as i32),
        1 => {
            if k == 0 {
                s * c
            } else {
                s * c.powi(k as i32 - 1)
            }
        }
        _ => {
            if k >= i {
                c.powi((k - i) as i32)
            } else {
                0.0
            }
        }
    }))
}

/// Evaluates the closed form for `spec` if its kind has one; `Ok(None)`
/// for the kinds that are only reachable through the solver.
pub fn evaluate(
    spec: &StructureSpec,
    c: f64,
) -> Result<Option<ClosedFormResult>, ClosedFormError> {
    use StructureKind::*;
    let r = match spec.kind {
        Line => Some(line_r2(spec.n_line, c)?),
        LineWithAttachedNode => {
            Some(line_with_attached_node_r2(spec.n_line, spec.attach, c)?)
        }
        Complete => Some(complete_r2(spec.n_complete, c)?),
        CompleteWithOutLink => Some(complete_with_outlink_r2(spec.n_complete, c)?),
        CompleteToLine => {
            Some(complete_to_line_r2(spec.n_line, spec.n_complete, spec.attach, c)?)
        }
        LineToComplete => {
            Some(line_to_complete_r2(spec.n_line, spec.n_complete, spec.attach, c)?)
        }
        LineSharingNodeWithComplete => {
            Some(line_sharing_node_r2(spec.n_line, spec.n_complete, spec.attach, c)?)
        }
        LineWithBacklink | LineSplit => None,
    };
    Ok(r)
}
