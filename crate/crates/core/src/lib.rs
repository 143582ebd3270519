//! Learning time-varying graphs from windowed multivariate signals.
//!
//! Each time window gets its own weighted undirected graph. Graphs are
//! learned jointly by minimizing a smoothness data term plus a degree log
//! barrier, a Frobenius penalty and a temporal penalty on successive graph
//! differences: fused lasso (few edges change at a time) or group lasso
//! (whole-graph changes at few slots). The [`synth`] module provides the
//! synthetic benchmark generators and evaluation metrics.

pub mod error;
pub mod graph;
pub mod operators;
pub mod solver;
pub mod synth;

pub use error::{Error, Result};
pub use graph::{
    adjacency_to_edge_vector, adjacency_to_laplacian, edge_vector_to_adjacency, pairwise_distances,
    smoothness, temporal_change_signal, DistanceSequence, EdgeVector, SignalWindows,
    TimeVaryingGraph,
};
pub use solver::{
    auto_step_size, objective, solve, solve_distances, Regularizer, SolveReport, SolverConfig,
    SolverState,
};
