use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{pairwise_distances, DistanceSequence, SignalWindows, TimeVaryingGraph};
use crate::operators::stacked_norm_estimate;
use crate::solver::{solve_distances, step_from_norm, SolverConfig};
use crate::synth::metrics::{evaluate, PresenceRule};

/// `{0} ∪ {0.75ʳ z_max : r = 1..=r_max}`.
pub fn beta_grid(z_max: f64, r_max: u32) -> Vec<f64> {
    std::iter::once(0.0)
        .chain((1..=r_max).map(|r| 0.75f64.powi(r as i32) * z_max))
        .collect()
}

/// `0.1, 0.2, …, 2.0`.
pub fn eta_grid() -> Vec<f64> {
    (1..=20).map(|k| k as f64 / 10.0).collect()
}

/// One problem instance with known ground truth.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub distances: DistanceSequence,
    pub truth: TimeVaryingGraph,
}

impl Dataset {
    pub fn new(signals: &SignalWindows, truth: TimeVaryingGraph) -> Result<Self> {
        if signals.n_nodes() != truth.n_nodes() || signals.n_slots() != truth.n_slots() {
            return Err(Error::InvalidInput(format!(
                "signals cover {} nodes × {} slots but the truth has {} × {}",
                signals.n_nodes(),
                signals.n_slots(),
                truth.n_nodes(),
                truth.n_slots()
            )));
        }
        Ok(Self {
            distances: pairwise_distances(signals),
            truth,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub alphas: Vec<f64>,
    pub betas: Vec<f64>,
    pub etas: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum CellOutcome {
    /// Metrics averaged over slots, then over datasets.
    Done {
        relative_error: f64,
        f_measure: f64,
        /// Number of datasets whose solve hit the iteration cap.
        unconverged: usize,
        mean_iterations: f64,
    },
    Failed(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridCell {
    pub alpha: f64,
    pub beta: f64,
    pub eta: f64,
    pub outcome: CellOutcome,
}

impl GridCell {
    pub fn metrics(&self) -> Option<(f64, f64)> {
        match self.outcome {
            CellOutcome::Done {
                relative_error,
                f_measure,
                ..
            } => Some((relative_error, f_measure)),
            CellOutcome::Failed(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridResult {
    /// Cells in `alpha`-major, then `beta`, then `eta` order.
    pub cells: Vec<GridCell>,
    /// Index of the cell with the lowest average relative error.
    pub best_error: Option<usize>,
    /// Index of the cell with the highest average F-measure.
    pub best_f_measure: Option<usize>,
}

impl GridResult {
    pub fn best_error_cell(&self) -> Option<&GridCell> {
        self.best_error.map(|i| &self.cells[i])
    }

    pub fn best_f_measure_cell(&self) -> Option<&GridCell> {
        self.best_f_measure.map(|i| &self.cells[i])
    }
}

/// Solves every `(α, β, η)` combination on every dataset and averages the
/// metrics over datasets. Solver failures are recorded per cell. The `η`
/// axis collapses to `{0}` for the static regularizer.
pub fn grid_search(
    datasets: &[Dataset],
    base: &SolverConfig,
    grid: &GridSpec,
    rule: PresenceRule,
) -> Result<GridResult> {
    if datasets.is_empty() {
        return Err(Error::InvalidInput(
            "grid search needs at least one dataset".into(),
        ));
    }
    if grid.alphas.is_empty() || grid.betas.is_empty() || grid.etas.is_empty() {
        return Err(Error::InvalidInput(
            "every grid axis needs at least one value".into(),
        ));
    }
    let etas = if base.regularizer.is_temporal() {
        grid.etas.clone()
    } else {
        vec![0.0]
    };
    let combos: Vec<(f64, f64, f64)> = grid
        .alphas
        .iter()
        .flat_map(|&a| {
            let etas = &etas;
            grid.betas
                .iter()
                .flat_map(move |&b| etas.iter().map(move |&e| (a, b, e)))
        })
        .collect();

    // one operator norm per problem size
    let mut norms: Vec<((usize, usize), f64)> = Vec::new();
    for d in datasets {
        let key = (d.distances.n_nodes(), d.distances.slots().len());
        if !norms.iter().any(|(k, _)| *k == key) {
            norms.push((key, stacked_norm_estimate(key.0, key.1)));
        }
    }
    let norm_of = |d: &Dataset| {
        let key = (d.distances.n_nodes(), d.distances.slots().len());
        norms
            .iter()
            .find(|(k, _)| *k == key)
            .map(|(_, v)| *v)
            .unwrap()
    };

    let cells: Vec<GridCell> = combos
        .par_iter()
        .map(|&(alpha, beta, eta)| {
            let mut cfg = SolverConfig {
                alpha,
                beta,
                eta,
                ..base.clone()
            };
            let mut sums = (0.0, 0.0, 0usize, 0.0);
            for d in datasets {
                if base.gamma.is_none() {
                    cfg.gamma = Some(step_from_norm(beta, norm_of(d)));
                }
                let outcome = solve_distances(&d.distances, &cfg)
                    .and_then(|r| evaluate(&r.graph, &d.truth, rule).map(|m| (r, m)));
                match outcome {
                    Ok((report, m)) => {
                        sums.0 += m.relative_error;
                        sums.1 += m.f_measure;
                        sums.2 += usize::from(!report.converged);
                        sums.3 += report.iterations as f64;
                    }
                    Err(e) => {
                        return GridCell {
                            alpha,
                            beta,
                            eta,
                            outcome: CellOutcome::Failed(e.to_string()),
                        }
                    }
                }
            }
            let count = datasets.len() as f64;
            GridCell {
                alpha,
                beta,
                eta,
                outcome: CellOutcome::Done {
                    relative_error: sums.0 / count,
                    f_measure: sums.1 / count,
                    unconverged: sums.2,
                    mean_iterations: sums.3 / count,
                },
            }
        })
        .collect();

    let mut best_error: Option<usize> = None;
    let mut best_f_measure: Option<usize> = None;
    for (i, cell) in cells.iter().enumerate() {
        if let Some((err, f)) = cell.metrics() {
            if best_error.is_none_or(|b| err < cells[b].metrics().unwrap().0) {
                best_error = Some(i);
            }
            if best_f_measure.is_none_or(|b| f > cells[b].metrics().unwrap().1) {
                best_f_measure = Some(i);
            }
        }
    }
    Ok(GridResult {
        cells,
        best_error,
        best_f_measure,
    })
}
