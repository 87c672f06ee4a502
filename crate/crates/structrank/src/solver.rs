//! Rank solvers for the three PageRank variants.
//!
//! `R1` is the classic normalized vector: the fixed point of the damped
//! random surfer whose dangling mass and restart mass both follow the weight
//! distribution `u`. `R2` solves `(I - c A^T) x = n u`, leaving dangling
//! rows untouched, so `x_j` is the expected number of visits to `j` over
//! walks started once at every node. `R3` rescales `R1` so that the two
//! readings can be compared on one scale: `R3 = R1 * ||v||_1 / d` with
//! `d = 1 - sum(c A^T R1)`.

use thiserror::Error;

use crate::graph::{DirectedGraph, GraphError, WeightVector};
use crate::linalg::{self, LinalgError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    R1,
    R2,
    R3,
}

/// Iterative engine selection for the solvers that have a choice.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Engine {
    /// Power iteration on the full surfer matrix (R1 only).
    Power,
    /// Direct LU solve of the rank system (R2).
    DenseLu,
    /// Fixed-point iteration `x <- c A^T x + n u` (R2).
    Neumann,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    /// L1 convergence threshold for the iterative engines.
    pub tol: f64,
    pub max_iter: usize,
    pub engine: Engine,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { tol: 1e-12, max_iter: 100_000, engine: Engine::DenseLu }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SolveStats {
    pub iterations: usize,
}

/// A computed rank vector, tagged with the variant, damping factor and the
/// weight vector it was computed from.
#[derive(Debug, Clone, PartialEq)]
pub struct RankVector {
    pub variant: Variant,
    pub c: f64,
    pub values: Vec<f64>,
    pub weight: WeightVector,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolverError {
    #[error("did not converge within {iterations} iterations")]
    NotConverged { iterations: usize },
    #[error("c out of range: {0} (must be in (0,1))")]
    COutOfRange(f64),
    #[error("degenerate rescale divisor {0}")]
    DegenerateScale(f64),
    #[error("cannot normalize a zero vector")]
    ZeroVector,
    #[error("the power engine only produces normalized ranks; use the dense or fixed-point engine")]
    UnsupportedEngine,
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

fn check_c(c: f64) -> Result<(), SolverError> {
    if c.is_finite() && c > 0.0 && c < 1.0 {
        Ok(())
    } else {
        Err(SolverError::COutOfRange(c))
    }
}

fn check_weight_len(g: &DirectedGraph, w: &WeightVector) -> Result<(), SolverError> {
    if w.len() != g.n() {
        return Err(SolverError::Graph(GraphError::InvalidWeight(format!(
            "weight vector has length {} but the graph has {} nodes",
            w.len(),
            g.n()
        ))));
    }
    Ok(())
}

/// `y = c A^T x`: each node pushes `c x_j / out_degree(j)` to its targets;
/// dangling nodes push nothing.
fn damped_pull(g: &DirectedGraph, c: f64, x: &[f64]) -> Vec<f64> {
    let mut y = vec![0.0; g.n()];
    for src in 0..g.n() {
        let deg = g.out_degree(src);
        if deg == 0 {
            continue;
        }
        let share = c * x[src] / deg as f64;
        for &dst in g.out_links(src) {
            y[dst] += share;
        }
    }
    y
}

fn l1_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}

/// Normalized PageRank by power iteration, starting from `u`.
pub fn pagerank_r1(
    g: &DirectedGraph,
    c: f64,
    w: &WeightVector,
    opts: &SolveOptions,
) -> Result<RankVector, SolverError> {
    pagerank_r1_with_stats(g, c, w, opts).map(|(r, _)| r)
}

/// Same as [`pagerank_r1`] but also reports the iteration count.
pub fn pagerank_r1_with_stats(
    g: &DirectedGraph,
    c: f64,
    w: &WeightVector,
    opts: &SolveOptions,
) -> Result<(RankVector, SolveStats), SolverError> {
    check_c(c)?;
    check_weight_len(g, w)?;
    let n = g.n();
    let u = w.normalized();
    let mut x = u.clone();

    for iter in 1..=opts.max_iter {
        let mut next = damped_pull(g, c, &x);
        let dangling_mass: f64 = g.dangling_nodes().iter().map(|&i| x[i]).sum();
        let restart = 1.0 - c; // sum(x) is kept at 1
        for i in 0..n {
            next[i] += (c * dangling_mass + restart) * u[i];
        }
        // Guard against drift: the iterate is a probability vector.
        let s: f64 = next.iter().sum();
        for v in &mut next {
            *v /= s;
        }
        let delta = l1_diff(&next, &x);
        x = next;
        if delta < opts.tol {
            let rank =
                RankVector { variant: Variant::R1, c, values: x, weight: w.clone() };
            return Ok((rank, SolveStats { iterations: iter }));
        }
    }
    Err(SolverError::NotConverged { iterations: opts.max_iter })
}

/// Non-normalized rank: solves `(I - c A^T) x = n u` directly (`DenseLu`)
/// or by fixed-point iteration (`Neumann`). `Engine::Power` is not a valid
/// engine for this variant.
pub fn pagerank_r2(
    g: &DirectedGraph,
    c: f64,
    w: &WeightVector,
    opts: &SolveOptions,
) -> Result<RankVector, SolverError> {
    check_c(c)?;
    check_weight_len(g, w)?;
    let n = g.n();
    let u = w.normalized();
    let rhs: Vec<f64> = u.iter().map(|x| x * n as f64).collect();

    let values = match opts.engine {
        Engine::Neumann => {
            let mut x = rhs.clone();
            let mut converged = None;
            for iter in 1..=opts.max_iter {
                let mut next = damped_pull(g, c, &x);
                for i in 0..n {
                    next[i] += rhs[i];
                }
                let delta = l1_diff(&next, &x);
                x = next;
                if delta < opts.tol {
                    converged = Some(iter);
                    break;
                }
            }
            if converged.is_none() {
                return Err(SolverError::NotConverged { iterations: opts.max_iter });
            }
            x
        }
        Engine::DenseLu => {
            let m = linalg::system_matrix(g, c)?;
            linalg::lu_solve(&m, &rhs)?
        }
        Engine::Power => return Err(SolverError::UnsupportedEngine),
    };

    Ok(RankVector { variant: Variant::R2, c, values, weight: w.clone() })
}

/// Rescaled rank `R3 = R1 * ||v||_1 / d` with `d = 1 - sum(c A^T R1)`.
///
/// `d` is the share of the surfer's mass that the damped link-following step
/// does not retain, so dividing by it puts `R1` on the non-normalized scale.
pub fn pagerank_r3(
    g: &DirectedGraph,
    c: f64,
    w: &WeightVector,
) -> Result<RankVector, SolverError> {
    let (r1, _) = pagerank_r1_with_stats(g, c, w, &SolveOptions::default())?;
    let kept: f64 = damped_pull(g, c, &r1.values).iter().sum();
    let d = 1.0 - kept;
    if d.abs() < 1e-12 {
        return Err(SolverError::DegenerateScale(d));
    }
    let scale = w.sum() / d;
    let values = r1.values.iter().map(|x| x * scale).collect();
    Ok(RankVector { variant: Variant::R3, c, values, weight: w.clone() })
}

/// Rescales any rank vector to the normalized `R1` scale (`||values||_1 = 1`).
pub fn normalize(r: &RankVector) -> Result<RankVector, SolverError> {
    let s: f64 = r.values.iter().sum();
    if s == 0.0 || !s.is_finite() {
        return Err(SolverError::ZeroVector);
    }
    Ok(RankVector {
        variant: Variant::R1,
        c: r.c,
        values: r.values.iter().map(|x| x / s).collect(),
        weight: r.weight.clone(),
    })
}
