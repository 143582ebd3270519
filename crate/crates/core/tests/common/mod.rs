//! Reference implementations used as test oracles. They work on full
//! symmetric matrices with plain loops and share no code with the solver.

#![allow(dead_code)]

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tvgl::synth::{generate_tver_graph, sample_gmrf, ErConfig};
use tvgl::{pairwise_distances, DistanceSequence, Regularizer, SolverConfig};

/// Per-slot symmetric matrices with zero diagonal.
pub type Slots = Vec<DMatrix<f64>>;

pub struct Problem {
    pub n: usize,
    pub z: Slots,
    pub alpha: f64,
    pub beta: f64,
    pub eta: f64,
    pub reg: Regularizer,
}

impl Problem {
    pub fn from_distances(d: &DistanceSequence, cfg: &SolverConfig) -> Self {
        Self {
            n: d.n_nodes(),
            z: d.slots()
                .iter()
                .map(|s| to_matrix(d.n_nodes(), s))
                .collect(),
            alpha: cfg.alpha,
            beta: cfg.beta,
            eta: cfg.eta,
            reg: cfg.regularizer,
        }
    }

    fn diff_norm(&self, a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
        let mut acc = 0.0;
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                let d = a[(i, j)] - b[(i, j)];
                acc += match self.reg {
                    Regularizer::FusedLasso => d.abs(),
                    _ => d * d,
                };
            }
        }
        match self.reg {
            Regularizer::FusedLasso => acc,
            Regularizer::GroupLasso => acc.sqrt(),
            Regularizer::None => 0.0,
        }
    }

    /// `Σ_t ½⟨W_t, Z_t⟩ - α Σ log deg + β ½‖W_t‖²_F + η Σ R(W_t - W_{t-1})`.
    pub fn value(&self, w: &Slots) -> f64 {
        let mut f = 0.0;
        for (wt, zt) in w.iter().zip(&self.z) {
            for i in 0..self.n {
                let mut deg = 0.0;
                for j in 0..self.n {
                    if i == j {
                        continue;
                    }
                    if wt[(i, j)] < 0.0 {
                        return f64::INFINITY;
                    }
                    f += 0.5 * wt[(i, j)] * zt[(i, j)] + 0.5 * self.beta * wt[(i, j)].powi(2);
                    deg += wt[(i, j)];
                }
                if deg <= 0.0 {
                    return f64::INFINITY;
                }
                f -= self.alpha * deg.ln();
            }
        }
        for t in 1..w.len() {
            f += self.eta * self.diff_norm(&w[t], &w[t - 1]);
        }
        f
    }

    /// A subgradient with respect to the upper-triangular entries, returned
    /// as symmetric matrices.
    pub fn subgradient(&self, w: &Slots) -> Slots {
        let n = self.n;
        let mut g: Slots = Vec::with_capacity(w.len());
        for (wt, zt) in w.iter().zip(&self.z) {
            let deg: Vec<f64> = (0..n).map(|i| wt.row(i).sum()).collect();
            let mut gt = DMatrix::zeros(n, n);
            for i in 0..n {
                for j in (i + 1)..n {
                    let v = zt[(i, j)] + 2.0 * self.beta * wt[(i, j)]
                        - self.alpha * (1.0 / deg[i] + 1.0 / deg[j]);
                    gt[(i, j)] = v;
                    gt[(j, i)] = v;
                }
            }
            g.push(gt);
        }
        if self.eta > 0.0 && self.reg != Regularizer::None {
            for t in 1..w.len() {
                let d = &w[t] - &w[t - 1];
                // each pair appears twice in the full matrix
                let block_norm = (d.norm_squared() / 2.0).sqrt();
                for i in 0..n {
                    for j in 0..n {
                        let dij = d[(i, j)];
                        if i == j || dij == 0.0 {
                            continue;
                        }
                        let s = match self.reg {
                            Regularizer::FusedLasso => dij.signum(),
                            _ => dij / block_norm,
                        };
                        g[t][(i, j)] += self.eta * s;
                        g[t - 1][(i, j)] -= self.eta * s;
                    }
                }
            }
        }
        g
    }
}

pub fn to_matrix(n: usize, v: &[f64]) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(n, n);
    let mut k = 0;
    for i in 0..n {
        for j in (i + 1)..n {
            m[(i, j)] = v[k];
            m[(j, i)] = v[k];
            k += 1;
        }
    }
    m
}

fn norm_all(g: &Slots) -> f64 {
    (g.iter().map(|m| m.norm_squared()).sum::<f64>() / 2.0).sqrt()
}

/// Projected subgradient with normalized diminishing steps, restarted from
/// the best point with a smaller initial step. Every trial point outside
/// the domain is pulled back towards the current point.
pub fn subgradient_oracle(p: &Problem, start: Slots, rounds: usize, iters: usize) -> (Slots, f64) {
    let mut best = start;
    let mut best_f = p.value(&best);
    assert!(best_f.is_finite());
    let mut step0 = 0.1 * (norm_all(&best) + 1.0);
    for _ in 0..rounds {
        let mut x = best.clone();
        for k in 0..iters {
            let g = p.subgradient(&x);
            let gn = norm_all(&g);
            if gn == 0.0 {
                break;
            }
            let mut s = step0 / ((k + 1) as f64).sqrt() / gn;
            loop {
                let trial: Slots = x
                    .iter()
                    .zip(&g)
                    .map(|(a, b)| (a - b * s).map(|v| v.max(0.0)))
                    .collect();
                let f = p.value(&trial);
                if f.is_finite() {
                    x = trial;
                    if f < best_f {
                        best_f = f;
                        best = x.clone();
                    }
                    break;
                }
                s *= 0.5;
            }
        }
        step0 *= 0.1;
    }
    (best, best_f)
}

/// Projected gradient with Armijo backtracking for the smooth (static)
/// problem.
pub fn projected_gradient_oracle(p: &Problem, start: Slots, iters: usize) -> (Slots, f64) {
    assert!(p.reg == Regularizer::None || p.eta == 0.0);
    let mut x = start;
    let mut f = p.value(&x);
    let mut step = 1.0;
    for _ in 0..iters {
        let g = p.subgradient(&x);
        step *= 2.0;
        loop {
            let trial: Slots = x
                .iter()
                .zip(&g)
                .map(|(a, b)| (a - b * step).map(|v| v.max(0.0)))
                .collect();
            let ft = p.value(&trial);
            let moved: f64 = trial
                .iter()
                .zip(&x)
                .map(|(a, b)| (a - b).norm_squared() / 2.0)
                .sum();
            let decrease: f64 = g
                .iter()
                .zip(trial.iter().zip(&x))
                .map(|(gt, (a, b))| gt.dot(&(a - b)) / 2.0)
                .sum();
            if ft.is_finite() && ft <= f + decrease + moved / (2.0 * step) {
                x = trial;
                f = ft;
                break;
            }
            step *= 0.5;
            if step < 1e-300 {
                return (x, f);
            }
        }
    }
    (x, f)
}

pub fn uniform_start(n: usize, t: usize, value: f64) -> Slots {
    (0..t)
        .map(|_| DMatrix::from_fn(n, n, |i, j| if i == j { 0.0 } else { value }))
        .collect()
}

/// Random small instance: a TV-ER graph, GMRF samples and random weights.
pub fn random_instance(
    seed: u64,
    n: usize,
    t: usize,
    k: usize,
    reg: Regularizer,
) -> (DistanceSequence, SolverConfig) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let truth = generate_tver_graph(&ErConfig {
        n_nodes: n,
        edge_prob: 0.5,
        resample_fraction: 0.3,
        n_slots: t,
        seed,
    })
    .unwrap();
    let x = sample_gmrf(&truth, k, 0.5, seed.wrapping_add(17)).unwrap();
    let cfg = SolverConfig::new(
        reg,
        rng.random_range(0.5..2.0),
        rng.random_range(0.0..1.0),
        rng.random_range(0.1..2.0),
    );
    (pairwise_distances(&x), cfg)
}
