//! PageRank on directed graphs, three ways: the classic normalized vector, a
//! non-normalized variant defined by a linear system, and a rescaled variant
//! that bridges the two. On top of the solvers sit closed-form rank formulas
//! for line and complete-graph structures and their compositions, a damping
//! sensitivity toolkit, weight-perturbation deltas, and a Monte Carlo visit
//! estimator that doubles as an independent check of the linear algebra.

pub mod cli;
pub mod closed_forms;
pub mod graph;
pub mod linalg;
pub mod perturbation;
pub mod random_walk;
pub mod sensitivity;
pub mod solver;
