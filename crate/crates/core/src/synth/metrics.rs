use crate::error::{Error, Result};
use crate::graph::{EdgeVector, TimeVaryingGraph};

/// Decides which edges of a weighted graph count as present.
///
/// An edge is present when its weight exceeds `relative` times the largest
/// weight of its slot (and is strictly positive).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PresenceRule {
    pub relative: f64,
}

impl Default for PresenceRule {
    fn default() -> Self {
        Self { relative: 1e-4 }
    }
}

impl PresenceRule {
    pub fn present(&self, w: &EdgeVector) -> Vec<bool> {
        let max = w.weights().iter().copied().fold(0.0, f64::max);
        let cut = self.relative * max;
        w.weights().iter().map(|v| *v > 0.0 && *v > cut).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricReport {
    pub relative_error: f64,
    pub f_measure: f64,
    pub per_slot_relative_error: Vec<f64>,
    pub per_slot_f_measure: Vec<f64>,
}

fn check_dims(est: &TimeVaryingGraph, truth: &TimeVaryingGraph) -> Result<()> {
    if est.n_nodes() != truth.n_nodes() {
        return Err(Error::DimensionMismatch {
            expected: truth.n_nodes(),
            got: est.n_nodes(),
        });
    }
    if est.n_slots() != truth.n_slots() {
        return Err(Error::DimensionMismatch {
            expected: truth.n_slots(),
            got: est.n_slots(),
        });
    }
    Ok(())
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// `‖Ŵ_t - W*_t‖_F / ‖W*_t‖_F` per slot and its average over slots.
pub fn relative_error(est: &TimeVaryingGraph, truth: &TimeVaryingGraph) -> Result<(Vec<f64>, f64)> {
    check_dims(est, truth)?;
    let per_slot = est
        .slots()
        .iter()
        .zip(truth.slots())
        .enumerate()
        .map(|(t, (e, w))| {
            // both Frobenius norms count each edge twice; the factor cancels
            let denom = w.norm();
            if denom == 0.0 {
                return Err(Error::ZeroTruthSlot(t));
            }
            let num = e
                .weights()
                .iter()
                .zip(w.weights())
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            Ok(num / denom)
        })
        .collect::<Result<Vec<_>>>()?;
    let avg = mean(&per_slot);
    Ok((per_slot, avg))
}

/// `2tp / (2tp + fn + fp)` on edge-presence sets per slot, and its average.
/// A slot where neither graph has an edge scores 1.
pub fn f_measure(
    est: &TimeVaryingGraph,
    truth: &TimeVaryingGraph,
    rule: PresenceRule,
) -> Result<(Vec<f64>, f64)> {
    check_dims(est, truth)?;
    let per_slot: Vec<f64> = est
        .slots()
        .iter()
        .zip(truth.slots())
        .map(|(e, w)| {
            let (pe, pt) = (rule.present(e), rule.present(w));
            let (mut tp, mut fp, mut fn_) = (0usize, 0usize, 0usize);
            for (a, b) in pe.iter().zip(&pt) {
                match (a, b) {
                    (true, true) => tp += 1,
                    (true, false) => fp += 1,
                    (false, true) => fn_ += 1,
                    (false, false) => {}
                }
            }
            if tp + fp + fn_ == 0 {
                1.0
            } else {
                2.0 * tp as f64 / (2 * tp + fp + fn_) as f64
            }
        })
        .collect();
    let avg = mean(&per_slot);
    Ok((per_slot, avg))
}

pub fn evaluate(
    est: &TimeVaryingGraph,
    truth: &TimeVaryingGraph,
    rule: PresenceRule,
) -> Result<MetricReport> {
    let (per_slot_relative_error, relative_error) = relative_error(est, truth)?;
    let (per_slot_f_measure, f_measure) = f_measure(est, truth, rule)?;
    Ok(MetricReport {
        relative_error,
        f_measure,
        per_slot_relative_error,
        per_slot_f_measure,
    })
}

/// Indices of the `k` largest entries of a temporal change signal, in
/// increasing order. Ties go to the earlier index. Entry `i` of the signal
/// is the transition into slot `i + 1`.
pub fn detect_changes(signal: &[f64], k: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..signal.len()).collect();
    order.sort_by(|&a, &b| signal[b].total_cmp(&signal[a]).then(a.cmp(&b)));
    let mut picked: Vec<usize> = order.into_iter().take(k).collect();
    picked.sort_unstable();
    picked
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{edge_pairs, n_edges};
    use crate::synth::{generate_tver_graph, ErConfig};
    use proptest::prelude::*;

    fn tvg(n: usize, slots: &[Vec<f64>]) -> TimeVaryingGraph {
        TimeVaryingGraph::new(
            slots
                .iter()
                .map(|s| EdgeVector::new(n, s.clone()).unwrap())
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn relative_error_examples() {
        let truth = tvg(3, &[vec![1.0, 0.0, 2.0], vec![0.5, 0.5, 0.0]]);
        assert_eq!(relative_error(&truth, &truth).unwrap().1, 0.0);
        let zero = tvg(3, &[vec![0.0; 3], vec![0.0; 3]]);
        assert!((relative_error(&zero, &truth).unwrap().1 - 1.0).abs() < 1e-15);
        let double = tvg(3, &[vec![2.0, 0.0, 4.0], vec![1.0, 1.0, 0.0]]);
        assert!((relative_error(&double, &truth).unwrap().1 - 1.0).abs() < 1e-15);
        assert_eq!(relative_error(&truth, &zero), Err(Error::ZeroTruthSlot(0)));
    }

    #[test]
    fn relative_error_matches_frobenius() {
        let truth = tvg(3, &[vec![1.0, 0.3, 2.0]]);
        let est = tvg(3, &[vec![0.7, 0.0, 2.5]]);
        let (a, b) = (est.slot(0).to_adjacency(), truth.slot(0).to_adjacency());
        let expected = (a - &b).norm() / b.norm();
        assert!((relative_error(&est, &truth).unwrap().1 - expected).abs() < 1e-15);
    }

    #[test]
    fn f_measure_examples() {
        let rule = PresenceRule::default();
        let truth = tvg(3, &[vec![0.0, 1.0, 1.0]]);
        assert_eq!(f_measure(&truth, &truth, rule).unwrap().1, 1.0);
        let est = tvg(3, &[vec![1.0, 1.0, 0.0]]);
        assert_eq!(f_measure(&est, &truth, rule).unwrap().1, 0.5);
        let disjoint = tvg(3, &[vec![1.0, 0.0, 0.0]]);
        assert_eq!(f_measure(&disjoint, &truth, rule).unwrap().1, 0.0);
        let empty = tvg(3, &[vec![0.0; 3]]);
        assert_eq!(f_measure(&empty, &empty, rule).unwrap().1, 1.0);
    }

    #[test]
    fn presence_rule_is_relative() {
        let w = EdgeVector::new(3, vec![1.0, 5e-5, 2e-4]).unwrap();
        assert_eq!(PresenceRule::default().present(&w), vec![true, false, true]);
    }

    #[test]
    fn averages_are_means_of_slots() {
        let truth = tvg(3, &[vec![0.0, 1.0, 1.0], vec![1.0, 1.0, 1.0]]);
        let est = tvg(3, &[vec![1.0, 1.0, 0.0], vec![1.0, 2.0, 0.5]]);
        let r = evaluate(&est, &truth, PresenceRule::default()).unwrap();
        assert_eq!(r.f_measure, mean(&r.per_slot_f_measure));
        assert_eq!(r.relative_error, mean(&r.per_slot_relative_error));
        assert!(evaluate(&est, &tvg(3, &[vec![1.0; 3]]), PresenceRule::default()).is_err());
    }

    #[test]
    fn detect_changes_examples() {
        assert_eq!(detect_changes(&[0.0, 5.0, 0.0, 3.0], 2), vec![1, 3]);
        assert_eq!(detect_changes(&[1.0, 2.0, 3.0], 3), vec![0, 1, 2]);
        assert_eq!(detect_changes(&[2.0, 1.0, 2.0], 1), vec![0]);
    }

    fn permute(g: &TimeVaryingGraph, perm: &[usize]) -> TimeVaryingGraph {
        let n = g.n_nodes();
        let slots = g
            .slots()
            .iter()
            .map(|s| {
                let mut w = vec![0.0; n_edges(n)];
                for ((i, j), v) in edge_pairs(n).zip(w.iter_mut()) {
                    *v = s.weight(perm[i], perm[j]);
                }
                EdgeVector::new(n, w).unwrap()
            })
            .collect();
        TimeVaryingGraph::new(slots).unwrap()
    }

    proptest! {
        #[test]
        fn metrics_are_permutation_equivariant(seed in 0u64..1000, shift in 1usize..10) {
            let cfg = ErConfig { n_nodes: 10, edge_prob: 0.3, n_slots: 4, seed, ..ErConfig::default() };
            let truth = generate_tver_graph(&cfg).unwrap();
            let est = generate_tver_graph(&ErConfig { seed: seed + 1, ..cfg }).unwrap();
            let perm: Vec<usize> = (0..10).map(|i| (i * 3 + shift) % 10).collect();
            let a = evaluate(&est, &truth, PresenceRule::default()).unwrap();
            let b = evaluate(&permute(&est, &perm), &permute(&truth, &perm), PresenceRule::default()).unwrap();
            prop_assert!((a.relative_error - b.relative_error).abs() < 1e-12);
            prop_assert_eq!(a.f_measure, b.f_measure);
        }
    }
}
