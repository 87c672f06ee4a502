//! What happens to the non-normalized rank when start weights change.
//!
//! With the inverse of `I - c A^T` cached, re-ranking under a new weight
//! vector is a single matrix-vector product. The zeroing and doubling
//! deltas work on raw per-node weights (baseline 1 each, the uniform
//! case): zeroing node i's weight removes exactly the walks started at i,
//! so the rank change is column i of the inverse, and doubling adds the
//! same column. A node therefore loses at least its own start visit, and
//! at most `1/(1-c^2)`, the value attained by a two-node cycle.

use thiserror::Error;

use crate::graph::{DirectedGraph, NodeId, WeightVector};
use crate::linalg::{self, invert, lu_factor, lu_solve_factored, system_matrix, DenseMatrix, LinalgError};
use crate::solver::{RankVector, Variant};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PerturbError {
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("cached inverse was built for a different graph (fingerprint {cached:#018x}, got {given:#018x})")]
    FingerprintMismatch { cached: u64, given: u64 },
    #[error("node {0} out of range (graph has {1} nodes)")]
    InvalidNode(usize, usize),
    #[error("node {0} listed more than once")]
    DuplicateNode(usize),
    #[error("weight vector sums to zero")]
    ZeroVector,
}

/// The inverse of `I - c A^T` pinned to the graph it was built from.
#[derive(Debug, Clone, PartialEq)]
pub struct CachedInverse {
    fingerprint: u64,
    c: f64,
    inverse: DenseMatrix,
}

impl CachedInverse {
    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn n(&self) -> usize {
        self.inverse.rows()
    }

    pub fn inverse(&self) -> &DenseMatrix {
        &self.inverse
    }
}

/// Inverts the rank system once so later weight edits are products.
pub fn build_cache(g: &DirectedGraph, c: f64) -> Result<CachedInverse, PerturbError> {
    let inverse = invert(&system_matrix(g, c)?)?;
    Ok(CachedInverse { fingerprint: g.fingerprint(), c, inverse })
}

/// Non-normalized rank under weights `v`: `inverse . (n v / ||v||_1)`.
/// Agrees with the dense solver on the same graph and damping factor.
pub fn r2_from_cache(
    cache: &CachedInverse,
    g: &DirectedGraph,
    v: &WeightVector,
) -> Result<RankVector, PerturbError> {
    let given = g.fingerprint();
    if given != cache.fingerprint {
        return Err(PerturbError::FingerprintMismatch { cached: cache.fingerprint, given });
    }
    if v.len() != cache.n() {
        return Err(PerturbError::Linalg(LinalgError::Shape(format!(
            "weight vector has {} entries for a {}-node graph",
            v.len(),
            cache.n()
        ))));
    }
    let total = v.sum();
    if !(total > 0.0) {
        return Err(PerturbError::ZeroVector);
    }
    let scale = cache.n() as f64 / total;
    let rhs: Vec<f64> = v.raw().iter().map(|x| x * scale).collect();
    let values = cache.inverse.mul_vec(&rhs);
    Ok(RankVector { variant: Variant::R2, c: cache.c, values, weight: v.clone() })
}

fn delta_for_masked(
    g: &DirectedGraph,
    c: f64,
    nodes: &[NodeId],
) -> Result<Vec<f64>, PerturbError> {
    linalg::check_c(c)?;
    let n = g.n();
    let mut mask = vec![false; n];
    for &node in nodes {
        if node >= n {
            return Err(PerturbError::InvalidNode(node + 1, n));
        }
        if mask[node] {
            return Err(PerturbError::DuplicateNode(node + 1));
        }
        mask[node] = true;
    }
    let (lu, perm) = lu_factor(&system_matrix(g, c)?)?;
    let base = lu_solve_factored(&lu, &perm, &vec![1.0; n]);
    let cut: Vec<f64> = mask.iter().map(|&m| if m { 0.0 } else { 1.0 }).collect();
    let cut = lu_solve_factored(&lu, &perm, &cut);
    Ok(base.iter().zip(&cut).map(|(b, x)| b - x).collect())
}

/// Rank lost per node when `node`'s raw start weight drops from 1 to 0,
/// all other weights staying at 1. The perturbed node always loses at
/// least 1 (its own start visit) and at most `zeroing_bound(c)`.
pub fn zeroing_delta(g: &DirectedGraph, c: f64, node: NodeId) -> Result<Vec<f64>, PerturbError> {
    delta_for_masked(g, c, &[node])
}

/// Rank lost per node when every listed node's raw weight drops to 0 at
/// once; by linearity this is the sum of the single-node deltas.
pub fn zeroing_delta_set(
    g: &DirectedGraph,
    c: f64,
    nodes: &[NodeId],
) -> Result<Vec<f64>, PerturbError> {
    delta_for_masked(g, c, nodes)
}

/// Rank gained per node when `node`'s raw weight doubles from 1 to 2.
/// Equals the zeroing delta: both are the node's column of the inverse.
pub fn doubling_delta(g: &DirectedGraph, c: f64, node: NodeId) -> Result<Vec<f64>, PerturbError> {
    linalg::check_c(c)?;
    let n = g.n();
    if node >= n {
        return Err(PerturbError::InvalidNode(node + 1, n));
    }
    let (lu, perm) = lu_factor(&system_matrix(g, c)?)?;
    let base = lu_solve_factored(&lu, &perm, &vec![1.0; n]);
    let mut boosted = vec![1.0; n];
    boosted[node] = 2.0;
    let boosted = lu_solve_factored(&lu, &perm, &boosted);
    Ok(boosted.iter().zip(&base).map(|(b, x)| b - x).collect())
}

/// Largest rank a node can lose to zeroing its own weight: the even
/// geometric series `1 + c^2 + c^4 + ... = 1/(1-c^2)`, attained when the
/// node sits in a two-node cycle. Meaningful for c in (0,1).
pub fn zeroing_bound(c: f64) -> f64 {
    1.0 / (1.0 - c * c)
}
