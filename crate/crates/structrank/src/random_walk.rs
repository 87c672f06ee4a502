//! Monte Carlo estimation of the non-normalized rank.
//!
//! A walk started at node `s` visits node `j` on average
//! `[(I - c A^T)^{-1}]_{j,s}` times, so summing per-start visit means over
//! all starts estimates R2. The walks continue with probability `c` to a
//! uniformly chosen out-link, stop otherwise, and stop unconditionally on
//! a dangling node (without consuming randomness), mirroring the solver's
//! untouched dangling rows.
//!
//! Randomness comes from ChaCha8 (rand_chacha): each start node draws from
//! the stream `(seed, start)`, so results are deterministic for a fixed
//! seed and independent of how starts are scheduled.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::graph::{DirectedGraph, NodeId};
use crate::linalg;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WalkError {
    #[error(transparent)]
    Linalg(#[from] linalg::LinalgError),
    #[error("walks_per_node must be at least 1")]
    ZeroWalks,
    #[error("node {0} out of range (graph has {1} nodes)")]
    NodeOutOfRange(usize, usize),
    #[error("hitting probability needs two distinct nodes, got node {0} twice")]
    SameNode(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct WalkConfig {
    pub walks_per_node: usize,
    pub seed: u64,
    /// Per-walk step cap; hits are counted in the estimate's `truncated`
    /// field. At c <= 0.99 a 10_000-step walk is effectively impossible
    /// (probability below 1e-43), so the cap only guarantees termination.
    pub max_steps: usize,
}

impl Default for WalkConfig {
    fn default() -> Self {
        WalkConfig { walks_per_node: 100_000, seed: 0, max_steps: 10_000 }
    }
}

impl WalkConfig {
    pub fn with_seed(seed: u64) -> Self {
        WalkConfig { seed, ..WalkConfig::default() }
    }
}

/// Visit-count estimate of R2 with per-node standard errors.
#[derive(Debug, Clone, PartialEq)]
pub struct VisitEstimate {
    pub mean: Vec<f64>,
    pub stderr: Vec<f64>,
    /// Number of walks cut off by `max_steps`.
    pub truncated: u64,
}

/// Estimated probability that a walk from one node ever reaches another.
#[derive(Debug, Clone, PartialEq)]
pub struct HitEstimate {
    pub probability: f64,
    pub stderr: f64,
    pub truncated: u64,
}

fn stream_for(seed: u64, start: NodeId) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(start as u64);
    rng
}

/// Runs `cfg.walks_per_node` walks from every start node and returns the
/// per-node sum over starts of mean visit counts, which estimates R2.
///
/// Standard errors combine the per-start sample variances by
/// root-sum-square; starts use disjoint ChaCha8 streams and are therefore
/// independent.
pub fn estimate_r2(
    g: &DirectedGraph,
    c: f64,
    cfg: &WalkConfig,
) -> Result<VisitEstimate, WalkError> {
    linalg::check_c(c)?;
    if cfg.walks_per_node == 0 {
        return Err(WalkError::ZeroWalks);
    }
    let n = g.n();
    let w = cfg.walks_per_node as f64;
    let mut mean = vec![0.0; n];
    let mut variance_of_mean = vec![0.0; n];
    let mut truncated = 0u64;
    let mut counts = vec![0u32; n];

    for start in 0..n {
        let mut rng = stream_for(cfg.seed, start);
        let mut sum = vec![0.0; n];
        let mut sumsq = vec![0.0; n];
        for _ in 0..cfg.walks_per_node {
            counts.fill(0);
            let mut cur = start;
            counts[cur] += 1;
            let mut steps = 0usize;
            loop {
                if g.is_dangling(cur) {
                    break;
                }
                if steps >= cfg.max_steps {
                    truncated += 1;
                    break;
                }
                if rng.gen::<f64>() >= c {
                    break;
                }
                let links = g.out_links(cur);
                cur = links[rng.gen_range(0..links.len())];
                counts[cur] += 1;
                steps += 1;
            }
            for j in 0..n {
                let v = counts[j] as f64;
                sum[j] += v;
                sumsq[j] += v * v;
            }
        }
        for j in 0..n {
            let m = sum[j] / w;
            mean[j] += m;
            if cfg.walks_per_node > 1 {
                let var = (sumsq[j] - sum[j] * sum[j] / w) / (w - 1.0);
                // Sample variance of a nonnegative quantity; clamp the
                // occasional -1e-18 from cancellation.
                variance_of_mean[j] += var.max(0.0) / w;
            }
        }
    }
    let stderr = variance_of_mean.iter().map(|v| v.sqrt()).collect();
    Ok(VisitEstimate { mean, stderr, truncated })
}

/// Fraction of walks from `from` that visit `to` at least once, with the
/// binomial standard error `sqrt(p (1-p) / walks)`.
pub fn hitting_probability(
    g: &DirectedGraph,
    c: f64,
    from: NodeId,
    to: NodeId,
    cfg: &WalkConfig,
) -> Result<HitEstimate, WalkError> {
    linalg::check_c(c)?;
    if cfg.walks_per_node == 0 {
        return Err(WalkError::ZeroWalks);
    }
    let n = g.n();
    for node in [from, to] {
        if node >= n {
            return Err(WalkError::NodeOutOfRange(node + 1, n));
        }
    }
    if from == to {
        return Err(WalkError::SameNode(from + 1));
    }

    let mut rng = stream_for(cfg.seed, from);
    let mut hits = 0u64;
    let mut truncated = 0u64;
    for _ in 0..cfg.walks_per_node {
        let mut cur = from;
        let mut steps = 0usize;
        loop {
            if g.is_dangling(cur) {
                break;
            }
            if steps >= cfg.max_steps {
                truncated += 1;
                break;
            }
            if rng.gen::<f64>() >= c {
                break;
            }
            let links = g.out_links(cur);
            cur = links[rng.gen_range(0..links.len())];
            steps += 1;
            if cur == to {
                hits += 1;
                break;
            }
        }
    }
    let w = cfg.walks_per_node as f64;
    let p = hits as f64 / w;
    Ok(HitEstimate { probability: p, stderr: (p * (1.0 - p) / w).sqrt(), truncated })
}
