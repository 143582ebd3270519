//! Forward-backward-forward primal-dual solver for temporally regularized
//! graph learning.
//!
//! The problem solved is
//!
//! ```text
//! min_w  zᵀw - α 1ᵀlog(Sw) + β‖w‖² + η Ψ(Φw) + ι_{w ≥ 0}(w)
//! ```
//!
//! with `Ψ = ‖·‖₁` (fused lasso), `Ψ = Σ_t ‖·‖₂` over slot blocks (group
//! lasso) or `Ψ = 0`. The smooth part is `β‖w‖²`, the data term and the
//! nonnegativity constraint share one proximal step, and the log barrier and
//! temporal penalty act on the dual variable `v = [Sw; Φw]`.

use std::fmt;
use std::str::FromStr;

use log::debug;

use crate::error::{check_nonnegative, check_positive, Error, Result};
use crate::graph::{
    n_edges, pairwise_distances, DistanceSequence, SignalWindows, TimeVaryingGraph,
};
use crate::operators::{
    degree_adjoint_into, degree_op_into, norm, stacked_norm_estimate, temporal_diff_into,
    DegreeStack, StackedEdgeVector,
};

/// Initial weight placed on every edge.
pub const INITIAL_WEIGHT: f64 = 1e-2;

/// Fraction of `1 / (2β + ‖M‖)` used by [`auto_step_size`].
pub const STEP_SAFETY: f64 = 0.9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regularizer {
    /// `ℓ₁` penalty on successive slot differences.
    FusedLasso,
    /// Sum of `ℓ₂` norms of successive slot differences.
    GroupLasso,
    /// No temporal coupling; every slot is learned independently.
    None,
}

impl Regularizer {
    pub fn is_temporal(self) -> bool {
        !matches!(self, Regularizer::None)
    }
}

impl fmt::Display for Regularizer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Regularizer::FusedLasso => "fused",
            Regularizer::GroupLasso => "group",
            Regularizer::None => "none",
        })
    }
}

impl FromStr for Regularizer {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "fused" | "fused-lasso" | "flasso" => Ok(Regularizer::FusedLasso),
            "group" | "group-lasso" | "gltv" => Ok(Regularizer::GroupLasso),
            "none" | "static" => Ok(Regularizer::None),
            other => Err(Error::InvalidParameter {
                name: "regularizer",
                reason: format!("unknown regularizer `{other}` (expected fused, group or none)"),
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// Log-barrier weight on node degrees.
    pub alpha: f64,
    /// Squared Frobenius weight; larger values give denser graphs.
    pub beta: f64,
    /// Temporal regularization weight.
    pub eta: f64,
    pub regularizer: Regularizer,
    /// Step size; chosen by [`auto_step_size`] when `None`.
    pub gamma: Option<f64>,
    pub tolerance: f64,
    pub max_iters: usize,
    /// Record the objective every this many iterations (the final iterate is
    /// always recorded).
    pub trace_interval: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            alpha: 1.0,
            beta: 0.0,
            eta: 0.0,
            regularizer: Regularizer::FusedLasso,
            gamma: None,
            tolerance: 1e-3,
            max_iters: 20_000,
            trace_interval: 10,
        }
    }
}

impl SolverConfig {
    pub fn new(regularizer: Regularizer, alpha: f64, beta: f64, eta: f64) -> Self {
        Self {
            alpha,
            beta,
            eta,
            regularizer,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_positive("alpha", self.alpha)?;
        check_nonnegative("beta", self.beta)?;
        check_nonnegative("eta", self.eta)?;
        check_positive("tolerance", self.tolerance)?;
        if self.max_iters == 0 {
            return Err(Error::InvalidParameter {
                name: "max_iters",
                reason: "must be at least 1".into(),
            });
        }
        if let Some(g) = self.gamma {
            check_positive("gamma", g)?;
        }
        Ok(())
    }
}

/// Primal and dual iterates.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverState {
    pub w: StackedEdgeVector,
    pub v1: DegreeStack,
    pub v2: StackedEdgeVector,
    pub iteration: usize,
    pub last_relative_change: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    /// Learned graphs: the nonnegative primal proximal point of the last
    /// iteration.
    pub graph: TimeVaryingGraph,
    pub iterations: usize,
    /// `(iteration, objective)` samples.
    pub objective_trace: Vec<(usize, f64)>,
    pub converged: bool,
    pub gamma: f64,
    pub state: SolverState,
}

impl SolveReport {
    pub fn final_objective(&self) -> f64 {
        self.objective_trace.last().map_or(f64::NAN, |(_, v)| *v)
    }
}

/// `γ = 0.9 / (2β + ‖[S; Φ]‖₂)`.
pub fn auto_step_size(cfg: &SolverConfig, n_nodes: usize, n_slots: usize) -> f64 {
    step_from_norm(cfg.beta, stacked_norm_estimate(n_nodes, n_slots))
}

pub(crate) fn step_from_norm(beta: f64, op_norm: f64) -> f64 {
    STEP_SAFETY / (2.0 * beta + op_norm)
}

/// Objective value at `w`, or `+∞` outside the domain (negative weights or a
/// node with nonpositive degree while `α > 0`).
pub fn objective(w: &StackedEdgeVector, z: &StackedEdgeVector, cfg: &SolverConfig) -> f64 {
    objective_values(w.n_nodes(), w.data(), z.data(), cfg)
}

fn objective_values(n: usize, w: &[f64], z: &[f64], cfg: &SolverConfig) -> f64 {
    if w.iter().any(|v| *v < 0.0) {
        return f64::INFINITY;
    }
    let mut value = 0.0;
    for (wi, zi) in w.iter().zip(z) {
        value += zi * wi + cfg.beta * wi * wi;
    }
    if cfg.alpha > 0.0 {
        let mut deg = vec![0.0; n * (w.len() / n_edges(n))];
        degree_op_into(n, w, &mut deg);
        for d in deg {
            if d <= 0.0 {
                return f64::INFINITY;
            }
            value -= cfg.alpha * d.ln();
        }
    }
    if cfg.eta > 0.0 && cfg.regularizer.is_temporal() {
        let m = n_edges(n);
        let mut diff = vec![0.0; w.len()];
        temporal_diff_into(m, w, &mut diff);
        value += cfg.eta * temporal_penalty(cfg.regularizer, m, &diff);
    }
    value
}

fn temporal_penalty(reg: Regularizer, block_len: usize, diff: &[f64]) -> f64 {
    match reg {
        Regularizer::FusedLasso => diff.iter().map(|v| v.abs()).sum(),
        Regularizer::GroupLasso => diff.chunks_exact(block_len).map(norm).sum(),
        Regularizer::None => 0.0,
    }
}

/// Learns one graph per window of `x`.
pub fn solve(x: &SignalWindows, cfg: &SolverConfig) -> Result<SolveReport> {
    if !x.all_finite() {
        return Err(Error::InvalidInput(
            "signal contains non-finite values".into(),
        ));
    }
    solve_distances(&pairwise_distances(x), cfg)
}

/// Same as [`solve`], starting from precomputed pairwise distances.
pub fn solve_distances(z: &DistanceSequence, cfg: &SolverConfig) -> Result<SolveReport> {
    cfg.validate()?;
    let n = z.n_nodes();
    let t = z.slots().len();
    if n < 2 {
        return Err(Error::InvalidInput(
            "at least two nodes are required".into(),
        ));
    }
    if cfg.regularizer.is_temporal() && t < 2 {
        return Err(Error::TooFewSlots { needed: 2, got: t });
    }
    let zs = z.stacked();
    if zs.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return Err(Error::InvalidInput(
            "distances must be finite and nonnegative".into(),
        ));
    }
    let gamma = match cfg.gamma {
        Some(g) => g,
        None => auto_step_size(cfg, n, t),
    };
    let z = StackedEdgeVector::new(n, t, zs)?;
    Fbf::new(n, t, gamma, cfg).run(&z)
}

/// Scratch buffers for one solve. `y` and `ȳ₂` are only needed for two
/// consecutive slots and live in two-slot ring buffers; `p̄₂` is rebuilt
/// from `ȳ₂` and a per-slot scale.
struct Fbf<'a> {
    n: usize,
    m: usize,
    n_slots: usize,
    gamma: f64,
    cfg: &'a SolverConfig,
    w: Vec<f64>,
    v1: Vec<f64>,
    v2: Vec<f64>,
    p: Vec<f64>,
    ybar1: Vec<f64>,
    pbar1: Vec<f64>,
    y_ring: Vec<f64>,
    ybar2_ring: Vec<f64>,
    /// Group-lasso shrink factor of `ȳ₂` per ring slot.
    dual_scale: [f64; 2],
    q: Vec<f64>,
    qbar1: Vec<f64>,
    zeros: Vec<f64>,
}

impl<'a> Fbf<'a> {
    fn new(n: usize, t: usize, gamma: f64, cfg: &'a SolverConfig) -> Self {
        let m = n_edges(n);
        let (le, ld) = (m * t, n * t);
        let temporal = cfg.regularizer.is_temporal();
        Self {
            n,
            m,
            n_slots: t,
            gamma,
            cfg,
            w: vec![INITIAL_WEIGHT; le],
            v1: vec![0.0; ld],
            v2: vec![0.0; if temporal { le } else { 0 }],
            p: vec![0.0; le],
            ybar1: vec![0.0; ld],
            pbar1: vec![0.0; ld],
            y_ring: vec![0.0; 2 * m],
            ybar2_ring: vec![0.0; if temporal { 2 * m } else { 0 }],
            dual_scale: [1.0; 2],
            q: vec![0.0; m],
            qbar1: vec![0.0; n],
            zeros: vec![0.0; m],
        }
    }

    fn run(mut self, z: &StackedEdgeVector) -> Result<SolveReport> {
        let cfg = self.cfg;
        let (n, t) = (self.n, self.n_slots);
        let mut trace = Vec::new();
        let mut converged = false;
        let mut iteration = 0;
        let mut rel_change = f64::INFINITY;
        trace.push((0, objective_values(n, &self.w, z.data(), cfg)));

        while iteration < cfg.max_iters {
            iteration += 1;
            let (change_sq, w_sq) = self.sweep(z.data());
            rel_change = if w_sq > 0.0 {
                (change_sq / w_sq).sqrt()
            } else {
                change_sq.sqrt()
            };
            if !rel_change.is_finite() || self.v1.iter().any(|v| !v.is_finite()) {
                return Err(Error::Diverged { iteration });
            }
            if cfg.trace_interval > 0 && iteration % cfg.trace_interval == 0 {
                trace.push((iteration, objective_values(n, &self.p, z.data(), cfg)));
            }
            if rel_change <= cfg.tolerance {
                converged = true;
                break;
            }
        }
        debug!(
            "fbf finished after {iteration} iterations (converged: {converged}, change {rel_change:.3e})"
        );

        if trace.last().map(|(i, _)| *i) != Some(iteration) {
            trace.push((iteration, objective_values(n, &self.p, z.data(), cfg)));
        }
        let graph = TimeVaryingGraph::from_stacked(n, &self.p)?;
        let v2 = if self.v2.is_empty() {
            vec![0.0; self.w.len()]
        } else {
            self.v2
        };
        Ok(SolveReport {
            graph,
            iterations: iteration,
            objective_trace: trace,
            converged,
            gamma: self.gamma,
            state: SolverState {
                w: StackedEdgeVector::new(n, t, self.w)?,
                v1: DegreeStack::new(n, t, self.v1)?,
                v2: StackedEdgeVector::new(n, t, v2)?,
                iteration,
                last_relative_change: rel_change,
            },
        })
    }

    /// One FBF iteration, slot by slot. The forward pass of slot `t` reads
    /// slots `t - 1..=t + 1` of the iterates, so the correction of slot
    /// `t - 1` runs right after it. Returns `‖w⁺ - w‖²` and `‖w‖²`.
    fn sweep(&mut self, z: &[f64]) -> (f64, f64) {
        let mut sums = (0.0, 0.0);
        for t in 0..self.n_slots {
            self.forward(t, z);
            if t > 0 {
                self.correct(t - 1, &mut sums);
            }
        }
        self.correct(self.n_slots - 1, &mut sums);
        sums
    }

    /// Forward and backward steps on slot `t`:
    /// `y = w - γ(2βw + Sᵀv₁ + Φᵀv₂)`, `ȳ = v + γ[Sw; Φw]`, then the
    /// proximal points `p` and `p̄`.
    fn forward(&mut self, t: usize, z: &[f64]) {
        let (n, m, gamma) = (self.n, self.m, self.gamma);
        let cfg = self.cfg;
        let two_beta = 2.0 * cfg.beta;
        let temporal = cfg.regularizer.is_temporal();
        let e = t * m..(t + 1) * m;
        let d = t * n..(t + 1) * n;
        let r = (t % 2) * m..(t % 2 + 1) * m;

        let y = &mut self.y_ring[r.clone()];
        let w = &self.w[e.clone()];
        let p = &mut self.p[e.clone()];
        let zt = &z[e.clone()];
        degree_adjoint_into(n, &self.v1[d.clone()], y);
        if temporal {
            // block t of Φᵀv₂ is v₂ₜ - v₂ₜ₊₁, without v₂₀ and v₂_T
            let cur = if t > 0 {
                &self.v2[e.clone()]
            } else {
                &self.zeros[..]
            };
            let next = if t + 1 < self.n_slots {
                &self.v2[e.start + m..e.end + m]
            } else {
                &self.zeros[..]
            };
            for ((((y, p), w), zi), (c, nx)) in y
                .iter_mut()
                .zip(p.iter_mut())
                .zip(w)
                .zip(zt)
                .zip(cur.iter().zip(next))
            {
                *y = w - gamma * (two_beta * w + *y + (c - nx));
                *p = (*y - gamma * zi).max(0.0);
            }
        } else {
            for (((y, p), w), zi) in y.iter_mut().zip(p.iter_mut()).zip(w).zip(zt) {
                *y = w - gamma * (two_beta * w + *y);
                *p = (*y - gamma * zi).max(0.0);
            }
        }

        let yb1 = &mut self.ybar1[d.clone()];
        degree_op_into(n, w, yb1);
        let barrier = 4.0 * cfg.alpha * gamma;
        for ((yb, pb), v) in yb1
            .iter_mut()
            .zip(&mut self.pbar1[d.clone()])
            .zip(&self.v1[d])
        {
            *yb = v + gamma * *yb;
            *pb = dual_log_barrier(*yb, barrier);
        }

        if temporal {
            let yb2 = &mut self.ybar2_ring[r];
            let v2 = &self.v2[e.clone()];
            if t > 0 {
                let prev = &self.w[e.start - m..e.start];
                for (((yb, v), cur), pr) in yb2.iter_mut().zip(v2).zip(w).zip(prev) {
                    *yb = v + gamma * (cur - pr);
                }
            } else {
                yb2.copy_from_slice(v2);
            }
            self.dual_scale[t % 2] = group_shrink(cfg.regularizer, t, cfg.eta, yb2);
        }
    }

    /// Second forward step on slot `s`, `q = p - γ(2βp + Sᵀp̄₁ + Φᵀp̄₂)` and
    /// `q̄ = p̄ + γ[Sp; Φp]`, followed by the update `w⁺ = w - y + q`,
    /// `v⁺ = v - ȳ + q̄`. Needs the forward pass of slot `s + 1`.
    fn correct(&mut self, s: usize, sums: &mut (f64, f64)) {
        let (n, m, gamma) = (self.n, self.m, self.gamma);
        let cfg = self.cfg;
        let two_beta = 2.0 * cfg.beta;
        let temporal = cfg.regularizer.is_temporal();
        let (reg, eta) = (cfg.regularizer, cfg.eta);
        let e = s * m..(s + 1) * m;
        let d = s * n..(s + 1) * n;
        let r = (s % 2) * m..(s % 2 + 1) * m;
        let rn = ((s + 1) % 2) * m..((s + 1) % 2 + 1) * m;

        let p = &self.p[e.clone()];
        let q = &mut self.q;
        degree_adjoint_into(n, &self.pbar1[d.clone()], q);
        if temporal {
            let (cur, sc) = if s > 0 {
                (&self.ybar2_ring[r.clone()], self.dual_scale[s % 2])
            } else {
                (&self.zeros[..], 1.0)
            };
            let (next, sn) = if s + 1 < self.n_slots {
                (&self.ybar2_ring[rn], self.dual_scale[(s + 1) % 2])
            } else {
                (&self.zeros[..], 1.0)
            };
            for ((q, p), (c, nx)) in q.iter_mut().zip(p).zip(cur.iter().zip(next)) {
                let g = dual_ball_point(reg, eta, sc, *c) - dual_ball_point(reg, eta, sn, *nx);
                *q = p - gamma * (two_beta * p + *q + g);
            }
        } else {
            for (q, p) in q.iter_mut().zip(p) {
                *q = p - gamma * (two_beta * p + *q);
            }
        }
        for ((w, y), q) in self.w[e.clone()]
            .iter_mut()
            .zip(&self.y_ring[r.clone()])
            .zip(q.iter())
        {
            sums.1 += *w * *w;
            let dq = q - y;
            sums.0 += dq * dq;
            *w += dq;
        }

        let qb1 = &mut self.qbar1;
        degree_op_into(n, p, qb1);
        for (((v, yb), pb), qb) in self.v1[d.clone()]
            .iter_mut()
            .zip(&self.ybar1[d.clone()])
            .zip(&self.pbar1[d])
            .zip(qb1.iter())
        {
            *v += (pb + gamma * qb) - yb;
        }

        if temporal {
            let v2 = &mut self.v2[e.clone()];
            let yb2 = &self.ybar2_ring[r];
            let sc = self.dual_scale[s % 2];
            if s > 0 {
                let prev = &self.p[e.start - m..e.start];
                for (((v, yb), cur), pr) in v2.iter_mut().zip(yb2).zip(p).zip(prev) {
                    let pb = dual_ball_point(reg, eta, sc, *yb);
                    *v += (pb + gamma * (cur - pr)) - yb;
                }
            } else {
                for (v, yb) in v2.iter_mut().zip(yb2) {
                    *v += dual_ball_point(reg, eta, sc, *yb) - yb;
                }
            }
        }
    }
}

/// Proximal map of the conjugate of `-α Σ log`, scaled by γ:
/// `(y - √(y² + 4αγ)) / 2`, evaluated without cancellation.
#[inline]
fn dual_log_barrier(y: f64, four_alpha_gamma: f64) -> f64 {
    let root = (y * y + four_alpha_gamma).sqrt();
    if y <= 0.0 {
        0.5 * (y - root)
    } else {
        -0.5 * four_alpha_gamma / (y + root)
    }
}

/// Proximal map of the conjugate of `η Ψ`: projection onto the `ℓ∞` ball
/// (fused lasso) or onto per-block `ℓ₂` balls (group lasso) of radius `η`,
/// applied to one entry. `scale` is the block factor from [`group_shrink`].
#[inline]
fn dual_ball_point(reg: Regularizer, eta: f64, scale: f64, x: f64) -> f64 {
    match reg {
        Regularizer::FusedLasso => x.clamp(-eta, eta),
        Regularizer::GroupLasso => x * scale,
        Regularizer::None => 0.0,
    }
}

/// Factor that maps block `slot` onto the `ℓ₂` ball of radius `η`. The first
/// block is structurally zero and is left as is.
fn group_shrink(reg: Regularizer, slot: usize, eta: f64, block: &[f64]) -> f64 {
    if reg != Regularizer::GroupLasso || slot == 0 {
        return 1.0;
    }
    let nb = norm(block);
    if nb > eta {
        eta / nb
    } else {
        1.0
    }
}

#[cfg(test)]
fn project_dual_block(reg: Regularizer, slot: usize, eta: f64, block: &mut [f64]) {
    let scale = group_shrink(reg, slot, eta, block);
    block
        .iter_mut()
        .for_each(|x| *x = dual_ball_point(reg, eta, scale, *x));
}
