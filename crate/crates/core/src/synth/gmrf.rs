use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{check_positive, Error, Result};
use crate::graph::{adjacency_to_laplacian, SignalWindows, TimeVaryingGraph};

/// Draws `k` signals per slot from `N(0, (L_t + σ²I)⁻¹)`.
///
/// With `Q = R Rᵀ` the Cholesky factorization of the precision, `x` solves
/// `Rᵀ x = ε` for standard normal `ε`, so `cov(x) = (R Rᵀ)⁻¹ = Q⁻¹`.
pub fn sample_gmrf(g: &TimeVaryingGraph, k: usize, sigma: f64, seed: u64) -> Result<SignalWindows> {
    check_positive("sigma", sigma)?;
    if k == 0 {
        return Err(Error::InvalidParameter {
            name: "k",
            reason: "at least one sample per window is required".into(),
        });
    }
    let n = g.n_nodes();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut windows = Vec::with_capacity(g.n_slots());
    for slot in g.slots() {
        let mut precision = adjacency_to_laplacian(&slot.to_adjacency())?;
        for i in 0..n {
            precision[(i, i)] += sigma * sigma;
        }
        let factor = precision
            .cholesky()
            .ok_or(Error::NotPositiveDefinite)?
            .l()
            .transpose();
        let mut window = DMatrix::zeros(n, k);
        for c in 0..k {
            let eps = DVector::from_fn(n, |_, _| StandardNormal.sample(&mut rng));
            let x = factor
                .solve_upper_triangular(&eps)
                .ok_or(Error::NotPositiveDefinite)?;
            window.set_column(c, &x);
        }
        windows.push(window);
    }
    SignalWindows::new(windows)
}
