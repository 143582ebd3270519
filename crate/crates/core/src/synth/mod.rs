//! Synthetic time-varying graphs, graph-signal sampling and evaluation.
//!
//! Three graph families are provided: random-waypoint k-NN graphs
//! ([`generate_rw_graph`]), Erdős–Rényi graphs with a small fraction of edges
//! resampled each slot ([`generate_tver_graph`]) and Erdős–Rényi graphs that
//! jump between a few fixed connectivity states ([`generate_lfer_graph`]).
//! Signals are drawn from a Gaussian Markov random field on each slot's
//! Laplacian ([`sample_gmrf`]).

mod er;
mod gmrf;
mod grid;
mod metrics;
mod rw;

pub use er::{generate_lfer_graph, generate_tver_graph, ErConfig, LfErConfig, LfErGraph};
pub use gmrf::sample_gmrf;
pub use grid::{
    beta_grid, eta_grid, grid_search, CellOutcome, Dataset, GridCell, GridResult, GridSpec,
};
pub use metrics::{
    detect_changes, evaluate, f_measure, relative_error, MetricReport, PresenceRule,
};
pub use rw::{generate_rw_graph, RwConfig, RwGraph};
