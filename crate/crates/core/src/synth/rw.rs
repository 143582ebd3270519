use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{check_positive, Error, Result};
use crate::graph::{edge_index, n_edges, EdgeVector, TimeVaryingGraph};

/// Random-waypoint sensors in a square, connected by a k-NN graph per slot.
#[derive(Debug, Clone, PartialEq)]
pub struct RwConfig {
    pub n_nodes: usize,
    /// Side of the square area in meters.
    pub area_side: f64,
    /// Speed range in m/s.
    pub speed_min: f64,
    pub speed_max: f64,
    /// Seconds between position samples (one sample per slot).
    pub sample_period: f64,
    pub n_samples: usize,
    pub knn: usize,
    /// Kernel bandwidth; the mean k-NN distance of each slot when `None`.
    pub theta: Option<f64>,
    pub seed: u64,
}

impl Default for RwConfig {
    fn default() -> Self {
        Self {
            n_nodes: 36,
            area_side: 20.0,
            speed_min: 0.05,
            speed_max: 0.5,
            sample_period: 0.1,
            n_samples: 300,
            knn: 3,
            theta: None,
            seed: 0,
        }
    }
}

impl RwConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_nodes < 2 {
            return Err(Error::InvalidParameter {
                name: "n_nodes",
                reason: "at least two nodes are required".into(),
            });
        }
        check_positive("area_side", self.area_side)?;
        check_positive("speed_min", self.speed_min)?;
        check_positive("sample_period", self.sample_period)?;
        if !(self.speed_max.is_finite() && self.speed_max >= self.speed_min) {
            return Err(Error::InvalidParameter {
                name: "speed_max",
                reason: format!("must be at least speed_min ({})", self.speed_min),
            });
        }
        if self.n_samples == 0 {
            return Err(Error::InvalidParameter {
                name: "n_samples",
                reason: "must be at least 1".into(),
            });
        }
        if self.knn == 0 || self.knn >= self.n_nodes {
            return Err(Error::InvalidParameter {
                name: "knn",
                reason: format!("must be in 1..{}", self.n_nodes),
            });
        }
        if let Some(theta) = self.theta {
            check_positive("theta", theta)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct RwGraph {
    pub graph: TimeVaryingGraph,
    /// `positions[t][i]` is the `(x, y)` position of node `i` at slot `t`.
    pub positions: Vec<Vec<[f64; 2]>>,
}

struct Walker {
    pos: [f64; 2],
    dest: [f64; 2],
    speed: f64,
}

impl Walker {
    fn repick(&mut self, rng: &mut ChaCha8Rng, cfg: &RwConfig) {
        self.dest = [
            rng.random::<f64>() * cfg.area_side,
            rng.random::<f64>() * cfg.area_side,
        ];
        self.speed = if cfg.speed_max > cfg.speed_min {
            rng.random_range(cfg.speed_min..cfg.speed_max)
        } else {
            cfg.speed_min
        };
    }

    /// Moves for `dt` seconds, picking a new waypoint on every arrival (no
    /// pause).
    fn advance(&mut self, mut dt: f64, rng: &mut ChaCha8Rng, cfg: &RwConfig) {
        while dt > 0.0 {
            let (dx, dy) = (self.dest[0] - self.pos[0], self.dest[1] - self.pos[1]);
            let dist = dx.hypot(dy);
            let reach = self.speed * dt;
            if reach >= dist {
                self.pos = self.dest;
                dt -= dist / self.speed;
                self.repick(rng, cfg);
            } else {
                let f = reach / dist;
                self.pos = [self.pos[0] + f * dx, self.pos[1] + f * dy];
                dt = 0.0;
            }
        }
        let side = cfg.area_side;
        self.pos = [self.pos[0].clamp(0.0, side), self.pos[1].clamp(0.0, side)];
    }
}

pub fn generate_rw_graph(cfg: &RwConfig) -> Result<RwGraph> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut walkers: Vec<Walker> = (0..cfg.n_nodes)
        .map(|_| {
            let pos = [
                rng.random::<f64>() * cfg.area_side,
                rng.random::<f64>() * cfg.area_side,
            ];
            let mut w = Walker {
                pos,
                dest: pos,
                speed: cfg.speed_min,
            };
            w.repick(&mut rng, cfg);
            w
        })
        .collect();

    let mut positions = Vec::with_capacity(cfg.n_samples);
    let mut slots = Vec::with_capacity(cfg.n_samples);
    for s in 0..cfg.n_samples {
        if s > 0 {
            for w in &mut walkers {
                w.advance(cfg.sample_period, &mut rng, cfg);
            }
        }
        let pos: Vec<[f64; 2]> = walkers.iter().map(|w| w.pos).collect();
        slots.push(knn_graph(&pos, cfg.knn, cfg.theta)?);
        positions.push(pos);
    }
    Ok(RwGraph {
        graph: TimeVaryingGraph::new(slots)?,
        positions,
    })
}

/// Union-symmetrized k-NN graph with weights `exp(-dist / 2θ)`.
fn knn_graph(pos: &[[f64; 2]], k: usize, theta: Option<f64>) -> Result<EdgeVector> {
    let n = pos.len();
    let dist = |i: usize, j: usize| (pos[i][0] - pos[j][0]).hypot(pos[i][1] - pos[j][1]);
    let mut pairs = Vec::with_capacity(n * k);
    for i in 0..n {
        let mut others: Vec<(f64, usize)> = (0..n)
            .filter(|&j| j != i)
            .map(|j| (dist(i, j), j))
            .collect();
        others.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        pairs.extend(
            others
                .into_iter()
                .take(k)
                .map(|(d, j)| (i.min(j), i.max(j), d)),
        );
    }
    let theta = theta.unwrap_or_else(|| {
        let mean = pairs.iter().map(|p| p.2).sum::<f64>() / pairs.len() as f64;
        // coincident nodes only: any positive bandwidth gives weight 1
        if mean > 0.0 {
            mean
        } else {
            1.0
        }
    });
    let mut weights = vec![0.0; n_edges(n)];
    for (i, j, d) in pairs {
        weights[edge_index(n, i, j)] = (-d / (2.0 * theta)).exp();
    }
    EdgeVector::new(n, weights)
}
