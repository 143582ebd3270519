//! Graph representations and the smoothness machinery shared by the solver
//! and the benchmark code.
//!
//! An undirected graph on `n` nodes is stored as its upper-triangular edge
//! vector. Edges are laid out lexicographically: `(0,1), (0,2), …, (0,n-1),
//! (1,2), …`. Every vector-valued quantity indexed by node pairs (weights,
//! squared distances, dual variables) uses this layout.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Number of unordered node pairs, `n(n-1)/2`.
pub fn n_edges(n_nodes: usize) -> usize {
    n_nodes * n_nodes.saturating_sub(1) / 2
}

/// Position of the pair `(i, j)`, `i < j`, in the lexicographic layout.
#[inline]
pub fn edge_index(n_nodes: usize, i: usize, j: usize) -> usize {
    debug_assert!(i < j && j < n_nodes);
    i * n_nodes - i * (i + 1) / 2 + (j - i - 1)
}

/// Iterates node pairs in layout order.
pub fn edge_pairs(n_nodes: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..n_nodes).flat_map(move |i| ((i + 1)..n_nodes).map(move |j| (i, j)))
}

/// Nonnegative upper-triangular vectorization of a weighted adjacency matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeVector {
    n_nodes: usize,
    weights: Vec<f64>,
}

impl EdgeVector {
    pub fn new(n_nodes: usize, weights: Vec<f64>) -> Result<Self> {
        if n_nodes == 0 {
            return Err(Error::InvalidInput("graph needs at least one node".into()));
        }
        if weights.len() != n_edges(n_nodes) {
            return Err(Error::DimensionMismatch {
                expected: n_edges(n_nodes),
                got: weights.len(),
            });
        }
        if let Some(pos) = weights.iter().position(|w| !(w.is_finite() && *w >= 0.0)) {
            let (i, j) = edge_pairs(n_nodes).nth(pos).unwrap();
            return Err(Error::NegativeWeight(i, j));
        }
        Ok(Self { n_nodes, weights })
    }

    pub fn zeros(n_nodes: usize) -> Self {
        Self {
            n_nodes,
            weights: vec![0.0; n_edges(n_nodes)],
        }
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn into_weights(self) -> Vec<f64> {
        self.weights
    }

    pub fn weight(&self, i: usize, j: usize) -> f64 {
        match i.cmp(&j) {
            std::cmp::Ordering::Less => self.weights[edge_index(self.n_nodes, i, j)],
            std::cmp::Ordering::Greater => self.weights[edge_index(self.n_nodes, j, i)],
            std::cmp::Ordering::Equal => 0.0,
        }
    }

    pub fn norm(&self) -> f64 {
        self.weights.iter().map(|w| w * w).sum::<f64>().sqrt()
    }

    pub fn to_adjacency(&self) -> DMatrix<f64> {
        edge_vector_to_adjacency(self)
    }

    /// Builds the edge vector of a valid adjacency matrix (symmetric,
    /// nonnegative, zero diagonal).
    pub fn from_adjacency(adjacency: &DMatrix<f64>) -> Result<Self> {
        adjacency_to_edge_vector(adjacency)
    }
}

/// Ordered sequence of graphs over a fixed node set.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeVaryingGraph {
    n_nodes: usize,
    slots: Vec<EdgeVector>,
}

impl TimeVaryingGraph {
    pub fn new(slots: Vec<EdgeVector>) -> Result<Self> {
        let first = slots
            .first()
            .ok_or(Error::TooFewSlots { needed: 1, got: 0 })?;
        let n_nodes = first.n_nodes();
        if let Some(bad) = slots.iter().find(|s| s.n_nodes() != n_nodes) {
            return Err(Error::DimensionMismatch {
                expected: n_nodes,
                got: bad.n_nodes(),
            });
        }
        Ok(Self { n_nodes, slots })
    }

    /// Splits a concatenation of per-slot edge vectors.
    pub fn from_stacked(n_nodes: usize, data: &[f64]) -> Result<Self> {
        let m = n_edges(n_nodes);
        if m == 0 || !data.len().is_multiple_of(m) {
            return Err(Error::InvalidInput(format!(
                "stacked length {} is not a multiple of {m}",
                data.len()
            )));
        }
        let slots = data
            .chunks(m)
            .map(|c| EdgeVector::new(n_nodes, c.to_vec()))
            .collect::<Result<Vec<_>>>()?;
        Self::new(slots)
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    pub fn n_slots(&self) -> usize {
        self.slots.len()
    }

    pub fn slots(&self) -> &[EdgeVector] {
        &self.slots
    }

    pub fn slot(&self, t: usize) -> &EdgeVector {
        &self.slots[t]
    }

    pub fn stacked(&self) -> Vec<f64> {
        self.slots
            .iter()
            .flat_map(|s| s.weights().iter().copied())
            .collect()
    }
}

/// `T` windows of `K` node-signal observations each; window `t` is an
/// `n_nodes × K` matrix whose columns are observations.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalWindows {
    n_nodes: usize,
    windows: Vec<DMatrix<f64>>,
}

impl SignalWindows {
    pub fn new(windows: Vec<DMatrix<f64>>) -> Result<Self> {
        let first = windows
            .first()
            .ok_or(Error::TooFewSlots { needed: 1, got: 0 })?;
        let (n_nodes, k) = first.shape();
        if n_nodes == 0 || k == 0 {
            return Err(Error::InvalidInput(
                "signal windows need at least one node and one observation".into(),
            ));
        }
        for w in &windows {
            if w.nrows() != n_nodes {
                return Err(Error::DimensionMismatch {
                    expected: n_nodes,
                    got: w.nrows(),
                });
            }
            if w.ncols() != k {
                return Err(Error::DimensionMismatch {
                    expected: k,
                    got: w.ncols(),
                });
            }
        }
        Ok(Self { n_nodes, windows })
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    pub fn n_slots(&self) -> usize {
        self.windows.len()
    }

    pub fn samples_per_window(&self) -> usize {
        self.windows[0].ncols()
    }

    pub fn windows(&self) -> &[DMatrix<f64>] {
        &self.windows
    }

    pub fn all_finite(&self) -> bool {
        self.windows.iter().all(|w| w.iter().all(|x| x.is_finite()))
    }
}

/// Per-slot pairwise squared distances in edge layout.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceSequence {
    n_nodes: usize,
    slots: Vec<Vec<f64>>,
}

impl DistanceSequence {
    pub fn new(n_nodes: usize, slots: Vec<Vec<f64>>) -> Result<Self> {
        if slots.is_empty() {
            return Err(Error::TooFewSlots { needed: 1, got: 0 });
        }
        let m = n_edges(n_nodes);
        for s in &slots {
            if s.len() != m {
                return Err(Error::DimensionMismatch {
                    expected: m,
                    got: s.len(),
                });
            }
            if s.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
                return Err(Error::InvalidInput(
                    "distances must be finite and nonnegative".into(),
                ));
            }
        }
        Ok(Self { n_nodes, slots })
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    pub fn slots(&self) -> &[Vec<f64>] {
        &self.slots
    }

    pub fn stacked(&self) -> Vec<f64> {
        self.slots.iter().flatten().copied().collect()
    }

    /// Largest off-diagonal distance over all slots.
    pub fn max_value(&self) -> f64 {
        self.slots.iter().flatten().copied().fold(0.0, f64::max)
    }
}

pub fn edge_vector_to_adjacency(w: &EdgeVector) -> DMatrix<f64> {
    let n = w.n_nodes();
    let mut adj = DMatrix::zeros(n, n);
    for ((i, j), &v) in edge_pairs(n).zip(w.weights()) {
        adj[(i, j)] = v;
        adj[(j, i)] = v;
    }
    adj
}

fn validate_adjacency(adj: &DMatrix<f64>) -> Result<()> {
    let (n, m) = adj.shape();
    if n != m {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: m,
        });
    }
    let scale = adj.iter().fold(1.0_f64, |acc, v| acc.max(v.abs()));
    for i in 0..n {
        if adj[(i, i)] != 0.0 {
            return Err(Error::InvalidInput(format!(
                "nonzero diagonal entry at ({i}, {i})"
            )));
        }
        for j in (i + 1)..n {
            let (a, b) = (adj[(i, j)], adj[(j, i)]);
            if (a - b).abs() > 1e-12 * scale {
                return Err(Error::Asymmetric(i, j));
            }
            if a < 0.0 || b < 0.0 {
                return Err(Error::NegativeWeight(i, j));
            }
        }
    }
    Ok(())
}

pub fn adjacency_to_edge_vector(adj: &DMatrix<f64>) -> Result<EdgeVector> {
    validate_adjacency(adj)?;
    let n = adj.nrows();
    let weights = edge_pairs(n).map(|(i, j)| adj[(i, j)]).collect();
    EdgeVector::new(n, weights)
}

/// `L = D - W`. Rejects asymmetric, negative or self-looped input.
pub fn adjacency_to_laplacian(adj: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    validate_adjacency(adj)?;
    let n = adj.nrows();
    let mut lap = -adj.clone();
    for i in 0..n {
        lap[(i, i)] = adj.row(i).sum();
    }
    Ok(lap)
}

/// Laplacian quadratic form `fᵀLf = ½ Σ_{m,n} w_mn (f_m - f_n)²`.
pub fn smoothness(f: &[f64], w: &EdgeVector) -> Result<f64> {
    let n = w.n_nodes();
    if f.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: f.len(),
        });
    }
    Ok(edge_pairs(n)
        .zip(w.weights())
        .map(|((i, j), &wij)| {
            let d = f[i] - f[j];
            wij * d * d
        })
        .sum())
}

/// Squared differences of node values summed over the observations of each
/// window.
pub fn pairwise_distances(x: &SignalWindows) -> DistanceSequence {
    let n = x.n_nodes();
    let slots = x
        .windows()
        .iter()
        .map(|win| {
            let mut z = Vec::with_capacity(n_edges(n));
            for (i, j) in edge_pairs(n) {
                let s: f64 = win
                    .row(i)
                    .iter()
                    .zip(win.row(j).iter())
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum();
                z.push(s);
            }
            z
        })
        .collect();
    DistanceSequence { n_nodes: n, slots }
}

/// `‖w_t - w_{t-1}‖₂` for `t = 1..T`; entry `t-1` describes the transition
/// into slot `t`.
pub fn temporal_change_signal(g: &TimeVaryingGraph) -> Result<Vec<f64>> {
    if g.n_slots() < 2 {
        return Err(Error::TooFewSlots {
            needed: 2,
            got: g.n_slots(),
        });
    }
    Ok(g.slots()
        .windows(2)
        .map(|pair| {
            pair[1]
                .weights()
                .iter()
                .zip(pair[0].weights())
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt()
        })
        .collect())
}
