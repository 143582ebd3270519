//! Linear operators on stacked edge vectors and the proximal maps used by the
//! primal-dual iteration.
//!
//! `S` maps the edge weights of each slot to node degrees, `Φ` maps the
//! stacked weights to successive slot differences (with a zero first block).
//! Both are applied matrix-free. The `*_into` kernels work on raw slices and
//! write into caller-owned buffers; the typed wrappers allocate.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{check_positive, Error, Result};
use crate::graph::n_edges;

/// Concatenation of `n_slots` edge vectors on `n_nodes` nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct StackedEdgeVector {
    n_nodes: usize,
    n_slots: usize,
    data: Vec<f64>,
}

/// Concatenation of `n_slots` per-node vectors (degrees or their duals).
#[derive(Debug, Clone, PartialEq)]
pub struct DegreeStack {
    n_nodes: usize,
    n_slots: usize,
    data: Vec<f64>,
}

macro_rules! stacked_common {
    ($ty:ident, $block:expr) => {
        impl $ty {
            pub fn new(n_nodes: usize, n_slots: usize, data: Vec<f64>) -> Result<Self> {
                let block: fn(usize) -> usize = $block;
                let expected = block(n_nodes) * n_slots;
                if n_nodes == 0 || n_slots == 0 {
                    return Err(Error::InvalidInput(
                        "stacked vectors need at least one node and one slot".into(),
                    ));
                }
                if data.len() != expected {
                    return Err(Error::DimensionMismatch {
                        expected,
                        got: data.len(),
                    });
                }
                Ok(Self {
                    n_nodes,
                    n_slots,
                    data,
                })
            }

            pub fn zeros(n_nodes: usize, n_slots: usize) -> Self {
                let block: fn(usize) -> usize = $block;
                Self {
                    n_nodes,
                    n_slots,
                    data: vec![0.0; block(n_nodes) * n_slots],
                }
            }

            pub fn n_nodes(&self) -> usize {
                self.n_nodes
            }

            pub fn n_slots(&self) -> usize {
                self.n_slots
            }

            pub fn block_len(&self) -> usize {
                let block: fn(usize) -> usize = $block;
                block(self.n_nodes)
            }

            pub fn data(&self) -> &[f64] {
                &self.data
            }

            pub fn into_data(self) -> Vec<f64> {
                self.data
            }

            pub fn block(&self, t: usize) -> &[f64] {
                let m = self.block_len();
                &self.data[t * m..(t + 1) * m]
            }

            pub fn dot(&self, other: &Self) -> f64 {
                dot(&self.data, &other.data)
            }

            fn with_data(&self, data: Vec<f64>) -> Self {
                Self {
                    n_nodes: self.n_nodes,
                    n_slots: self.n_slots,
                    data,
                }
            }
        }
    };
}

stacked_common!(StackedEdgeVector, n_edges);
stacked_common!(DegreeStack, |n| n);

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// `out = S w`, slot by slot.
pub fn degree_op_into(n_nodes: usize, w: &[f64], out: &mut [f64]) {
    let m = n_edges(n_nodes);
    if m == 0 {
        out.fill(0.0);
        return;
    }
    for (wt, dt) in w.chunks_exact(m).zip(out.chunks_exact_mut(n_nodes)) {
        dt.fill(0.0);
        let mut idx = 0;
        for i in 0..n_nodes {
            let row = &wt[idx..idx + (n_nodes - i - 1)];
            let mut di = 0.0;
            for (v, dj) in row.iter().zip(&mut dt[i + 1..]) {
                di += v;
                *dj += v;
            }
            dt[i] += di;
            idx += row.len();
        }
    }
}

/// `out = Sᵀ u`: the edge `(i, j)` of slot `t` receives `u_t[i] + u_t[j]`.
pub fn degree_adjoint_into(n_nodes: usize, u: &[f64], out: &mut [f64]) {
    let m = n_edges(n_nodes);
    if m == 0 {
        return;
    }
    for (ut, ot) in u.chunks_exact(n_nodes).zip(out.chunks_exact_mut(m)) {
        let mut idx = 0;
        for i in 0..n_nodes {
            let ui = ut[i];
            let len = n_nodes - i - 1;
            for (o, uj) in ot[idx..idx + len].iter_mut().zip(&ut[i + 1..]) {
                *o = ui + uj;
            }
            idx += len;
        }
    }
}

/// `out = Φ w`: zero first block, then `w_t - w_{t-1}`.
pub fn temporal_diff_into(block_len: usize, w: &[f64], out: &mut [f64]) {
    if block_len == 0 {
        return;
    }
    out[..block_len].fill(0.0);
    for ((o, cur), prev) in out[block_len..]
        .iter_mut()
        .zip(&w[block_len..])
        .zip(&w[..w.len() - block_len])
    {
        *o = cur - prev;
    }
}

/// `out = Φᵀ u`: block `t` is `u_t - u_{t+1}`, the last block is `u_{T-1}`;
/// the first block of `u` does not contribute.
pub fn temporal_diff_adjoint_into(block_len: usize, u: &[f64], out: &mut [f64]) {
    if block_len == 0 {
        return;
    }
    let n_slots = u.len() / block_len;
    if n_slots == 1 {
        out.fill(0.0);
        return;
    }
    let last = (n_slots - 1) * block_len;
    for (o, next) in out[..block_len]
        .iter_mut()
        .zip(&u[block_len..2 * block_len])
    {
        *o = -next;
    }
    for t in 1..n_slots - 1 {
        let (cur, next) = (&u[t * block_len..], &u[(t + 1) * block_len..]);
        for ((o, a), b) in out[t * block_len..(t + 1) * block_len]
            .iter_mut()
            .zip(cur)
            .zip(next)
        {
            *o = a - b;
        }
    }
    out[last..].copy_from_slice(&u[last..]);
}

pub fn degree_op(w: &StackedEdgeVector) -> DegreeStack {
    let mut out = DegreeStack::zeros(w.n_nodes, w.n_slots);
    degree_op_into(w.n_nodes, &w.data, &mut out.data);
    out
}

pub fn degree_op_adjoint(u: &DegreeStack) -> StackedEdgeVector {
    let mut out = StackedEdgeVector::zeros(u.n_nodes, u.n_slots);
    degree_adjoint_into(u.n_nodes, &u.data, &mut out.data);
    out
}

pub fn temporal_diff_op(w: &StackedEdgeVector) -> StackedEdgeVector {
    let mut out = StackedEdgeVector::zeros(w.n_nodes, w.n_slots);
    temporal_diff_into(w.block_len(), &w.data, &mut out.data);
    out
}

pub fn temporal_diff_adjoint(u: &StackedEdgeVector) -> StackedEdgeVector {
    let mut out = StackedEdgeVector::zeros(u.n_nodes, u.n_slots);
    temporal_diff_adjoint_into(u.block_len(), &u.data, &mut out.data);
    out
}

const NORM_MAX_ITERS: usize = 1000;
const NORM_TOLERANCE: f64 = 1e-6;
const NORM_SEED: u64 = 0x5eed;

/// Spectral norm of the stacked operator `M = [S; Φ]`, by power iteration on
/// `MᵀM` from a fixed pseudo-random start.
///
/// Power iteration approaches from below, so the loop stops only once the
/// geometric tail of the remaining increments is within the tolerance, and
/// the result is inflated by the tolerance.
pub fn stacked_norm_estimate(n_nodes: usize, n_slots: usize) -> f64 {
    let m = n_edges(n_nodes);
    let len = m * n_slots;
    if len == 0 {
        return 0.0;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(NORM_SEED);
    let mut x: Vec<f64> = (0..len).map(|_| rng.random::<f64>() + 0.5).collect();
    let nx = norm(&x);
    x.iter_mut().for_each(|v| *v /= nx);

    let mut deg = vec![0.0; n_nodes * n_slots];
    let mut diff = vec![0.0; len];
    let mut tmp = vec![0.0; len];
    let mut next = vec![0.0; len];
    let mut estimate = 0.0;
    let mut prev_step = f64::INFINITY;

    for _ in 0..NORM_MAX_ITERS {
        degree_op_into(n_nodes, &x, &mut deg);
        temporal_diff_into(m, &x, &mut diff);
        degree_adjoint_into(n_nodes, &deg, &mut next);
        temporal_diff_adjoint_into(m, &diff, &mut tmp);
        next.iter_mut().zip(&tmp).for_each(|(a, b)| *a += b);

        // ‖MᵀMx‖ for unit x bounds the Rayleigh quotient from above
        let nn = norm(&next);
        let sigma = nn.sqrt();
        let step = (sigma - estimate).abs();
        estimate = sigma;
        if nn == 0.0 || step == 0.0 {
            break;
        }
        let ratio = step / prev_step;
        let first = prev_step.is_infinite();
        prev_step = step;
        if !first && ratio < 1.0 && step * ratio / (1.0 - ratio) <= NORM_TOLERANCE * sigma {
            break;
        }
        x.iter_mut().zip(&next).for_each(|(a, b)| *a = b / nn);
    }
    estimate * (1.0 + NORM_TOLERANCE)
}

/// Proximal map of `γ (zᵀx + ι_{x ≥ 0})`: `max(0, y_i - γ z_i)`.
pub fn prox_data_nonneg(
    y: &StackedEdgeVector,
    z: &StackedEdgeVector,
    gamma: f64,
) -> Result<StackedEdgeVector> {
    check_positive("gamma", gamma)?;
    if y.data.len() != z.data.len() {
        return Err(Error::DimensionMismatch {
            expected: y.data.len(),
            got: z.data.len(),
        });
    }
    let data = y
        .data
        .iter()
        .zip(&z.data)
        .map(|(yi, zi)| (yi - gamma * zi).max(0.0))
        .collect();
    Ok(y.with_data(data))
}

/// Proximal map of `γ α (-Σ log x_i)`: `(x_i + √(x_i² + 4αγ)) / 2`.
pub fn prox_log_barrier(x: &DegreeStack, gamma: f64, alpha: f64) -> Result<DegreeStack> {
    check_positive("gamma", gamma)?;
    check_positive("alpha", alpha)?;
    Ok(x.with_data(log_barrier_prox_values(&x.data, gamma * alpha)))
}

pub(crate) fn log_barrier_prox_values(x: &[f64], scale: f64) -> Vec<f64> {
    x.iter()
        .map(|&xi| {
            let root = (xi * xi + 4.0 * scale).sqrt();
            if xi >= 0.0 {
                0.5 * (xi + root)
            } else {
                2.0 * scale / (root - xi)
            }
        })
        .collect()
}

/// Elementwise soft thresholding at `τ`.
pub fn prox_l1(x: &StackedEdgeVector, tau: f64) -> Result<StackedEdgeVector> {
    check_positive("tau", tau)?;
    Ok(x.with_data(soft_threshold_values(&x.data, tau)))
}

pub(crate) fn soft_threshold_values(x: &[f64], tau: f64) -> Vec<f64> {
    x.iter()
        .map(|&v| v.signum() * (v.abs() - tau).max(0.0))
        .collect()
}

/// Blockwise soft thresholding of the slot blocks `2..T`; the first block is
/// passed through untouched.
pub fn prox_group_l2(x: &StackedEdgeVector, tau: f64) -> Result<StackedEdgeVector> {
    check_positive("tau", tau)?;
    let m = x.block_len();
    let mut data = x.data.clone();
    for block in data[m..].chunks_exact_mut(m) {
        let nb = norm(block);
        let scale = if nb <= tau { 0.0 } else { 1.0 - tau / nb };
        block.iter_mut().for_each(|v| *v *= scale);
    }
    Ok(x.with_data(data))
}

/// Proximal map of the conjugate `γ f*` through the Moreau decomposition,
/// `ȳ - γ prox_{f/γ}(ȳ / γ)`. `primal_prox(v, s)` must evaluate
/// `prox_{s f}(v)`.
pub fn moreau_dual_prox<F>(ybar: &[f64], gamma: f64, primal_prox: F) -> Result<Vec<f64>>
where
    F: FnOnce(&[f64], f64) -> Result<Vec<f64>>,
{
    check_positive("gamma", gamma)?;
    let scaled: Vec<f64> = ybar.iter().map(|v| v / gamma).collect();
    let p = primal_prox(&scaled, 1.0 / gamma)?;
    if p.len() != ybar.len() {
        return Err(Error::DimensionMismatch {
            expected: ybar.len(),
            got: p.len(),
        });
    }
    Ok(ybar.iter().zip(&p).map(|(y, pi)| y - gamma * pi).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;
    use proptest::prelude::*;
    use rand::Rng;

    fn rand_vec(rng: &mut ChaCha8Rng, len: usize, scale: f64) -> Vec<f64> {
        (0..len)
            .map(|_| (rng.random::<f64>() * 2.0 - 1.0) * scale)
            .collect()
    }

    /// Dense matrix of a linear map, built column by column.
    fn materialize(cols: usize, rows: usize, apply: impl Fn(&[f64], &mut [f64])) -> DMatrix<f64> {
        let mut mat = DMatrix::zeros(rows, cols);
        let mut e = vec![0.0; cols];
        let mut out = vec![0.0; rows];
        for c in 0..cols {
            e[c] = 1.0;
            apply(&e, &mut out);
            mat.column_mut(c).copy_from_slice(&out);
            e[c] = 0.0;
        }
        mat
    }

    fn dense_stacked_norm(n: usize, t: usize) -> f64 {
        let m = n_edges(n);
        let s = materialize(m * t, n * t, |x, o| degree_op_into(n, x, o));
        let phi = materialize(m * t, m * t, |x, o| temporal_diff_into(m, x, o));
        let mut stacked = DMatrix::zeros(n * t + m * t, m * t);
        stacked.rows_mut(0, n * t).copy_from(&s);
        stacked.rows_mut(n * t, m * t).copy_from(&phi);
        stacked.singular_values().max()
    }

    #[test]
    fn degree_examples() {
        let w = StackedEdgeVector::new(3, 1, vec![1.0, 2.0, 3.0]).unwrap();
        assert_eq!(degree_op(&w).data(), &[3.0, 4.0, 5.0]);
        assert_eq!(degree_op(&StackedEdgeVector::zeros(4, 2)).data(), &[0.0; 8]);
        let u = DegreeStack::new(3, 1, vec![1.0, 0.0, 0.0]).unwrap();
        assert_eq!(degree_op_adjoint(&u).data(), &[1.0, 1.0, 0.0]);
        let u = DegreeStack::new(4, 2, vec![1.5; 8]).unwrap();
        assert!(degree_op_adjoint(&u).data().iter().all(|v| *v == 3.0));
    }

    #[test]
    fn temporal_examples() {
        let w = StackedEdgeVector::new(2, 2, vec![1.0, 4.0]).unwrap();
        assert_eq!(temporal_diff_op(&w).data(), &[0.0, 3.0]);
        let constant = StackedEdgeVector::new(3, 3, [1.0, 2.0, 3.0].repeat(3)).unwrap();
        assert!(temporal_diff_op(&constant).data().iter().all(|v| *v == 0.0));

        let u = StackedEdgeVector::new(2, 2, vec![0.0, 2.5]).unwrap();
        assert_eq!(temporal_diff_adjoint(&u).data(), &[-2.5, 2.5]);
        assert!(temporal_diff_adjoint(&StackedEdgeVector::zeros(3, 4))
            .data()
            .iter()
            .all(|v| *v == 0.0));
        let back = temporal_diff_adjoint(&temporal_diff_op(&constant));
        assert!(back.data().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn adjoint_identities() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..50 {
            let n = rng.random_range(2..9);
            let t = rng.random_range(1..5);
            let m = n_edges(n);
            let w = StackedEdgeVector::new(n, t, rand_vec(&mut rng, m * t, 3.0)).unwrap();
            let u = DegreeStack::new(n, t, rand_vec(&mut rng, n * t, 3.0)).unwrap();
            let lhs = degree_op(&w).dot(&u);
            let rhs = w.dot(&degree_op_adjoint(&u));
            assert!((lhs - rhs).abs() <= 1e-12 * lhs.abs().max(1.0));

            let v = StackedEdgeVector::new(n, t, rand_vec(&mut rng, m * t, 3.0)).unwrap();
            let lhs = temporal_diff_op(&w).dot(&v);
            let rhs = w.dot(&temporal_diff_adjoint(&v));
            assert!((lhs - rhs).abs() <= 1e-12 * lhs.abs().max(1.0));
        }
    }

    #[test]
    fn norm_two_nodes_one_slot() {
        let est = stacked_norm_estimate(2, 1);
        assert!(est >= 2f64.sqrt() && est <= 2f64.sqrt() * (1.0 + 2e-6));
    }

    #[test]
    fn degree_norm_single_slot() {
        for n in 2..=8 {
            let m = n_edges(n);
            let s = materialize(m, n, |x, o| degree_op_into(n, x, o));
            let dense = s.singular_values().max();
            let expected = (2.0 * (n as f64 - 1.0)).sqrt();
            assert!((dense - expected).abs() < 1e-10, "n={n}");
            let est = stacked_norm_estimate(n, 1);
            assert!((est - expected).abs() <= 1e-6 * expected, "n={n}: {est}");
        }
    }

    #[test]
    fn norm_matches_dense_svd() {
        for n in 2..=6 {
            for t in 1..=4 {
                let dense = dense_stacked_norm(n, t);
                let est = stacked_norm_estimate(n, t);
                assert!(
                    est >= dense * (1.0 - 1e-6) && est <= dense * (1.0 + 2e-6),
                    "n={n} t={t}: {est} vs {dense}"
                );
            }
        }
    }

    #[test]
    fn norm_bounds_random_directions() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for &(n, t) in &[(3, 2), (5, 4), (8, 6), (12, 3)] {
            let est = stacked_norm_estimate(n, t);
            let m = n_edges(n);
            for _ in 0..100 {
                let x = rand_vec(&mut rng, m * t, 1.0);
                let mut d = vec![0.0; n * t];
                let mut p = vec![0.0; m * t];
                degree_op_into(n, &x, &mut d);
                temporal_diff_into(m, &x, &mut p);
                let ratio = ((dot(&d, &d) + dot(&p, &p)) / dot(&x, &x)).sqrt();
                assert!(est >= ratio);
            }
        }
    }

    #[test]
    fn data_prox_examples() {
        let y = StackedEdgeVector::new(3, 1, vec![3.0, -5.0, 0.5]).unwrap();
        let z = StackedEdgeVector::new(3, 1, vec![1.0, 0.2, 1.0]).unwrap();
        let p = prox_data_nonneg(&y, &z, 1.0).unwrap();
        assert_eq!(p.data(), &[2.0, 0.0, 0.0]);
        assert!(prox_data_nonneg(&y, &z, 0.0).is_err());
        assert!(prox_data_nonneg(&y, &z, -1.0).is_err());
    }

    #[test]
    fn data_prox_matches_scan() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let y = StackedEdgeVector::new(4, 2, rand_vec(&mut rng, 12, 3.0)).unwrap();
        let z = StackedEdgeVector::new(
            4,
            2,
            rand_vec(&mut rng, 12, 1.0)
                .iter()
                .map(|v| v.abs())
                .collect(),
        )
        .unwrap();
        let gamma = 0.7;
        let p = prox_data_nonneg(&y, &z, gamma).unwrap();
        for ((&yi, &zi), &pi) in y.data().iter().zip(z.data()).zip(p.data()) {
            // scan x ∈ [0, 6] for the minimizer of γ z x + ½ (x - y)²
            let best = (0..=600_000)
                .map(|k| k as f64 * 1e-5)
                .min_by(|a, b| {
                    let fa = gamma * zi * a + 0.5 * (a - yi).powi(2);
                    let fb = gamma * zi * b + 0.5 * (b - yi).powi(2);
                    fa.partial_cmp(&fb).unwrap()
                })
                .unwrap();
            assert!((best - pi).abs() < 2e-5, "{best} vs {pi}");
        }
    }

    #[test]
    fn log_barrier_examples() {
        let x = DegreeStack::new(2, 1, vec![0.0, 3.0]).unwrap();
        let p = prox_log_barrier(&x, 1.0, 1.0).unwrap();
        assert!((p.data()[0] - 1.0).abs() < 1e-15);
        assert!((p.data()[1] - (3.0 + 13f64.sqrt()) / 2.0).abs() < 1e-14);
        assert!(prox_log_barrier(&x, 0.0, 1.0).is_err());
        assert!(prox_log_barrier(&x, 1.0, -1.0).is_err());
    }

    #[test]
    fn log_barrier_matches_grid() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let (gamma, alpha) = (0.8, 1.7);
        let x = DegreeStack::new(6, 1, rand_vec(&mut rng, 6, 4.0)).unwrap();
        let p = prox_log_barrier(&x, gamma, alpha).unwrap();
        for (&xi, &pi) in x.data().iter().zip(p.data()) {
            let obj = |y: f64| -alpha * gamma * y.ln() + 0.5 * (y - xi).powi(2);
            let best = (1..=1_000_000)
                .map(|k| k as f64 * 1e-5)
                .min_by(|a, b| obj(*a).partial_cmp(&obj(*b)).unwrap())
                .unwrap();
            assert!((best - pi).abs() < 2e-5, "{best} vs {pi}");
            // stationarity y - x = αγ / y
            assert!((pi - xi - alpha * gamma / pi).abs() < 1e-12 * pi.max(1.0));
        }
    }

    #[test]
    fn log_barrier_is_positive_for_extreme_inputs() {
        let x = DegreeStack::new(4, 1, vec![-1e12, -1e6, 0.0, 1e12]).unwrap();
        let p = prox_log_barrier(&x, 1e-3, 1e-3).unwrap();
        assert!(p.data().iter().all(|v| *v > 0.0 && v.is_finite()));
    }

    #[test]
    fn soft_threshold_examples() {
        let x = StackedEdgeVector::new(3, 1, vec![-3.0, 0.5, -1.0]).unwrap();
        let p = prox_l1(&x, 1.0).unwrap();
        assert_eq!(p.data(), &[-2.0, 0.0, 0.0]);
        // applying the map again keeps shrinking
        let again = prox_l1(&p, 1.0).unwrap();
        assert_eq!(again.data(), &[-1.0, 0.0, 0.0]);
        assert!(prox_l1(&x, 0.0).is_err());
    }

    #[test]
    fn group_threshold_examples() {
        let x = StackedEdgeVector::new(3, 2, vec![1.0, 1.0, 1.0, 3.0, 4.0, 0.0]).unwrap();
        assert_eq!(
            prox_group_l2(&x, 10.0).unwrap().data(),
            &[1.0, 1.0, 1.0, 0.0, 0.0, 0.0]
        );
        assert_eq!(
            prox_group_l2(&x, 5.0).unwrap().data(),
            &[1.0, 1.0, 1.0, 0.0, 0.0, 0.0]
        );
        let x = StackedEdgeVector::new(3, 2, vec![0.0, 0.0, 0.0, 6.0, 8.0, 0.0]).unwrap();
        let p = prox_group_l2(&x, 5.0).unwrap();
        assert_eq!(p.data(), &[0.0, 0.0, 0.0, 3.0, 4.0, 0.0]);
        assert!(prox_group_l2(&x, -1.0).is_err());
    }

    #[test]
    fn moreau_of_zero_function_is_zero() {
        let y = vec![1.0, -2.0, 3.5];
        let out = moreau_dual_prox(&y, 0.3, |v, _| Ok(v.to_vec())).unwrap();
        assert!(out.iter().all(|v| v.abs() < 1e-15));
    }

    #[test]
    fn moreau_identity_for_l1() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let v = rand_vec(&mut rng, 40, 5.0);
        let gamma = 0.6;
        // v = prox_{γf}(v) + γ prox_{f*/γ}(v/γ)
        let primal = soft_threshold_values(&v, gamma);
        let scaled: Vec<f64> = v.iter().map(|x| x / gamma).collect();
        let dual =
            moreau_dual_prox(&scaled, 1.0 / gamma, |x, s| Ok(soft_threshold_values(x, s))).unwrap();
        for ((vi, pi), di) in v.iter().zip(&primal).zip(&dual) {
            assert!((pi + gamma * di - vi).abs() < 1e-12);
        }
        // the conjugate of ‖·‖₁ is the indicator of the unit ∞-ball
        assert!(dual.iter().all(|d| d.abs() <= 1.0 + 1e-12));
    }

    #[test]
    fn dual_l1_prox_is_clipping() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let y = rand_vec(&mut rng, 100, 4.0);
        let (gamma, eta) = (0.25, 1.3);
        let out =
            moreau_dual_prox(&y, gamma, |x, s| Ok(soft_threshold_values(x, eta * s))).unwrap();
        for (yi, oi) in y.iter().zip(&out) {
            assert!((oi - yi.clamp(-eta, eta)).abs() < 1e-12);
        }
    }

    #[test]
    fn dual_log_barrier_closed_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let y = rand_vec(&mut rng, 50, 4.0);
        let (gamma, alpha) = (0.3, 2.0);
        let out =
            moreau_dual_prox(&y, gamma, |x, s| Ok(log_barrier_prox_values(x, s * alpha))).unwrap();
        for (yi, oi) in y.iter().zip(&out) {
            let closed = 0.5 * (yi - (yi * yi + 4.0 * alpha * gamma).sqrt());
            assert!((oi - closed).abs() < 1e-12 * closed.abs().max(1.0));
        }
    }

    fn firmly_nonexpansive(a: &[f64], b: &[f64], pa: &[f64], pb: &[f64]) -> bool {
        let dp: Vec<f64> = pa.iter().zip(pb).map(|(x, y)| x - y).collect();
        let dx: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
        dot(&dp, &dp) <= dot(&dp, &dx) + 1e-12 * dot(&dx, &dx).max(1.0)
    }

    proptest! {
        #[test]
        fn prox_maps_are_firmly_nonexpansive(seed in any::<u64>(), tau in 0.01f64..3.0) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (n, t) = (4, 3);
            let len = n_edges(n) * t;
            let a = StackedEdgeVector::new(n, t, rand_vec(&mut rng, len, 5.0)).unwrap();
            let b = StackedEdgeVector::new(n, t, rand_vec(&mut rng, len, 5.0)).unwrap();
            let z = StackedEdgeVector::new(n, t, rand_vec(&mut rng, len, 2.0).iter().map(|v| v.abs()).collect()).unwrap();

            let (pa, pb) = (prox_l1(&a, tau).unwrap(), prox_l1(&b, tau).unwrap());
            prop_assert!(firmly_nonexpansive(a.data(), b.data(), pa.data(), pb.data()));
            let (pa, pb) = (prox_group_l2(&a, tau).unwrap(), prox_group_l2(&b, tau).unwrap());
            prop_assert!(firmly_nonexpansive(a.data(), b.data(), pa.data(), pb.data()));
            let (pa, pb) = (prox_data_nonneg(&a, &z, tau).unwrap(), prox_data_nonneg(&b, &z, tau).unwrap());
            prop_assert!(firmly_nonexpansive(a.data(), b.data(), pa.data(), pb.data()));
            prop_assert!(pa.data().iter().all(|v| *v >= 0.0));

            let da = DegreeStack::new(n, t, rand_vec(&mut rng, n * t, 5.0)).unwrap();
            let db = DegreeStack::new(n, t, rand_vec(&mut rng, n * t, 5.0)).unwrap();
            let (pa, pb) = (prox_log_barrier(&da, tau, 1.5).unwrap(), prox_log_barrier(&db, tau, 1.5).unwrap());
            prop_assert!(firmly_nonexpansive(da.data(), db.data(), pa.data(), pb.data()));
            prop_assert!(pa.data().iter().all(|v| *v > 0.0));
        }
    }
}
