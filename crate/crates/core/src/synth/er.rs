use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::{n_edges, EdgeVector, TimeVaryingGraph};

/// Erdős–Rényi graph whose edges are partly resampled at every slot.
#[derive(Debug, Clone, PartialEq)]
pub struct ErConfig {
    pub n_nodes: usize,
    pub edge_prob: f64,
    /// Fraction of the current edges replaced at each slot (rounded up).
    pub resample_fraction: f64,
    pub n_slots: usize,
    pub seed: u64,
}

impl Default for ErConfig {
    fn default() -> Self {
        Self {
            n_nodes: 36,
            edge_prob: 0.05,
            resample_fraction: 0.05,
            n_slots: 300,
            seed: 0,
        }
    }
}

impl ErConfig {
    pub fn validate(&self) -> Result<()> {
        check_nodes_and_slots(self.n_nodes, self.n_slots)?;
        check_open_unit("edge_prob", self.edge_prob)?;
        if !(0.0..1.0).contains(&self.resample_fraction) {
            return Err(Error::InvalidParameter {
                name: "resample_fraction",
                reason: format!("must lie in [0, 1), got {}", self.resample_fraction),
            });
        }
        Ok(())
    }
}

/// Erdős–Rényi connectivity states visited by a sticky Markov chain.
#[derive(Debug, Clone, PartialEq)]
pub struct LfErConfig {
    pub n_nodes: usize,
    pub edge_prob: f64,
    pub n_states: usize,
    /// Probability of keeping the current state at each slot.
    pub stay_prob: f64,
    pub n_slots: usize,
    pub seed: u64,
}

impl Default for LfErConfig {
    fn default() -> Self {
        Self {
            n_nodes: 36,
            edge_prob: 0.05,
            n_states: 6,
            stay_prob: 0.98,
            n_slots: 300,
            seed: 0,
        }
    }
}

impl LfErConfig {
    pub fn validate(&self) -> Result<()> {
        check_nodes_and_slots(self.n_nodes, self.n_slots)?;
        check_open_unit("edge_prob", self.edge_prob)?;
        if !(self.stay_prob > 0.0 && self.stay_prob <= 1.0) {
            return Err(Error::InvalidParameter {
                name: "stay_prob",
                reason: format!("must lie in (0, 1], got {}", self.stay_prob),
            });
        }
        if self.n_states < 2 {
            return Err(Error::InvalidParameter {
                name: "n_states",
                reason: "at least two states are required".into(),
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct LfErGraph {
    pub graph: TimeVaryingGraph,
    /// Slots `t ≥ 1` whose state differs from slot `t - 1`.
    pub change_slots: Vec<usize>,
    /// State index of every slot.
    pub states: Vec<usize>,
}

fn check_nodes_and_slots(n_nodes: usize, n_slots: usize) -> Result<()> {
    if n_nodes < 2 {
        return Err(Error::InvalidParameter {
            name: "n_nodes",
            reason: "at least two nodes are required".into(),
        });
    }
    if n_slots == 0 {
        return Err(Error::InvalidParameter {
            name: "n_slots",
            reason: "must be at least 1".into(),
        });
    }
    Ok(())
}

fn check_open_unit(name: &'static str, p: f64) -> Result<()> {
    if p > 0.0 && p < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            reason: format!("must lie in (0, 1), got {p}"),
        })
    }
}

/// Weight in `(0, 1]`, so drawn edges are never silently absent.
fn edge_weight(rng: &mut ChaCha8Rng) -> f64 {
    1.0 - rng.random::<f64>()
}

fn er_weights(rng: &mut ChaCha8Rng, n_nodes: usize, p: f64) -> Vec<f64> {
    (0..n_edges(n_nodes))
        .map(|_| {
            if rng.random::<f64>() < p {
                edge_weight(rng)
            } else {
                0.0
            }
        })
        .collect()
}

pub fn generate_tver_graph(cfg: &ErConfig) -> Result<TimeVaryingGraph> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut current = er_weights(&mut rng, cfg.n_nodes, cfg.edge_prob);
    let mut slots = Vec::with_capacity(cfg.n_slots);
    slots.push(EdgeVector::new(cfg.n_nodes, current.clone())?);

    for _ in 1..cfg.n_slots {
        let (edges, free): (Vec<usize>, Vec<usize>) =
            (0..current.len()).partition(|&e| current[e] > 0.0);
        let count = ((cfg.resample_fraction * edges.len() as f64).ceil() as usize)
            .min(edges.len())
            .min(free.len());
        if count > 0 {
            let removed: Vec<usize> = sample(&mut rng, edges.len(), count)
                .into_iter()
                .map(|k| edges[k])
                .collect();
            let added: Vec<usize> = sample(&mut rng, free.len(), count)
                .into_iter()
                .map(|k| free[k])
                .collect();
            for e in removed {
                current[e] = 0.0;
            }
            for e in added {
                current[e] = edge_weight(&mut rng);
            }
        }
        slots.push(EdgeVector::new(cfg.n_nodes, current.clone())?);
    }
    TimeVaryingGraph::new(slots)
}

pub fn generate_lfer_graph(cfg: &LfErConfig) -> Result<LfErGraph> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let states: Vec<EdgeVector> = (0..cfg.n_states)
        .map(|_| {
            EdgeVector::new(
                cfg.n_nodes,
                er_weights(&mut rng, cfg.n_nodes, cfg.edge_prob),
            )
        })
        .collect::<Result<_>>()?;

    let mut state = rng.random_range(0..cfg.n_states);
    let mut path = Vec::with_capacity(cfg.n_slots);
    let mut change_slots = Vec::new();
    path.push(state);
    for t in 1..cfg.n_slots {
        if rng.random::<f64>() >= cfg.stay_prob {
            // uniform over the other states
            let next = rng.random_range(0..cfg.n_states - 1);
            state = if next >= state { next + 1 } else { next };
            change_slots.push(t);
        }
        path.push(state);
    }
    let slots = path.iter().map(|&s| states[s].clone()).collect();
    Ok(LfErGraph {
        graph: TimeVaryingGraph::new(slots)?,
        change_slots,
        states: path,
    })
}
