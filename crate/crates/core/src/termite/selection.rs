//! Pheromone-to-probability transform and categorical sampling over next hops.

use rand::Rng;
use thiserror::Error;

use crate::net::NodeId;
use crate::scalar::Scalar;

use super::pheromone::PheromoneTable;

#[derive(Debug, Error, PartialEq, Eq)]
#[error("no neighbor available for destination {0}")]
pub struct NoRoute(pub NodeId);

/// `P[s] = (T[s] + alpha)^beta / sum_i (T[i] + alpha)^beta`.
///
/// Falls back to the uniform distribution when every weight is zero.
pub fn selection_probabilities<S: Scalar>(pheromone: &[S], alpha: S, beta: S) -> Vec<S> {
    let weights: Vec<S> = pheromone.iter().map(|&t| (t + alpha).powf(beta)).collect();
    let total = weights.iter().fold(S::zero(), |a, &w| a + w);
    if !(total > S::zero()) || !total.is_finite() {
        let u = S::one() / S::from_usize(pheromone.len().max(1)).expect("count fits scalar");
        return vec![u; pheromone.len()];
    }
    weights.into_iter().map(|w| w / total).collect()
}

/// Probability of each current neighbor being chosen toward one destination.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityRow<S> {
    pub destination: NodeId,
    pub alpha: S,
    pub beta: S,
    pub entries: Vec<(NodeId, S)>,
}

impl<S: Scalar> ProbabilityRow<S> {
    pub fn total(&self) -> S {
        self.entries.iter().fold(S::zero(), |a, e| a + e.1)
    }

    pub fn probability_of(&self, n: NodeId) -> Option<S> {
        self.entries.iter().find(|e| e.0 == n).map(|e| e.1)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> NodeId {
        let probs: Vec<S> = self.entries.iter().map(|e| e.1).collect();
        self.entries[sample_index(&probs, rng)].0
    }
}

/// Selection probabilities over the current neighbors of `table`. A destination without a column yet is
/// treated as if every neighbor held the initial pheromone, which yields `1/|neighbors|`.
pub fn route_probabilities<S: Scalar>(
    table: &PheromoneTable<S>,
    destination: NodeId,
    alpha: S,
    beta: S,
) -> Result<ProbabilityRow<S>, NoRoute> {
    let column: Vec<(NodeId, S)> = match table.column(destination) {
        Some(c) => c,
        None => table
            .neighbors()
            .map(|n| (n, table.limits().initial))
            .collect(),
    };
    if column.is_empty() {
        return Err(NoRoute(destination));
    }
    let values: Vec<S> = column.iter().map(|e| e.1).collect();
    let probs = selection_probabilities(&values, alpha, beta);
    Ok(ProbabilityRow {
        destination,
        alpha,
        beta,
        entries: column.iter().map(|e| e.0).zip(probs).collect(),
    })
}

/// Draws an index with probability proportional to `probs[i]`.
pub fn sample_index<S: Scalar, R: Rng + ?Sized>(probs: &[S], rng: &mut R) -> usize {
    assert!(!probs.is_empty(), "sampling from an empty distribution");
    let total = probs.iter().fold(S::zero(), |a, &p| a + p);
    let u = S::lit(rng.gen::<f64>()) * total;
    let mut acc = S::zero();
    for (i, &p) in probs.iter().enumerate() {
        acc = acc + p;
        if u < acc {
            return i;
        }
    }
    // Rounding can leave `u` just above the accumulated total.
    probs
        .iter()
        .rposition(|&p| p > S::zero())
        .unwrap_or(probs.len() - 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::{RngStreams, StreamId};
    use crate::termite::pheromone::PheromoneLimits;

    #[test]
    fn squared_weights() {
        let p = selection_probabilities(&[3.0f64, 1.0], 0.0, 2.0);
        assert!((p[0] - 0.9).abs() < 1e-15);
        assert!((p[1] - 0.1).abs() < 1e-15);
    }

    #[test]
    fn alpha_breaks_zero_weights() {
        assert_eq!(
            selection_probabilities(&[0.0, 0.0], 1.0, 2.0),
            vec![0.5, 0.5]
        );
        assert_eq!(
            selection_probabilities(&[0.0, 0.0], 0.0, 2.0),
            vec![0.5, 0.5]
        );
    }

    #[test]
    fn fresh_table_is_uniform() {
        let mut t: PheromoneTable<f64> = PheromoneTable::new(PheromoneLimits::default()).unwrap();
        assert_eq!(route_probabilities(&t, 0, 0.0, 2.0), Err(NoRoute(0)));
        for n in 1..=4 {
            t.add_neighbor(n);
        }
        let row = route_probabilities(&t, 0, 0.0, 2.0).unwrap();
        assert!(row.entries.iter().all(|e| (e.1 - 0.25).abs() < 1e-15));
    }

    #[test]
    fn single_option_always_chosen() {
        let mut rng = RngStreams::new(1).stream(StreamId::Protocol);
        for _ in 0..100 {
            assert_eq!(sample_index(&[1.0f64], &mut rng), 0);
        }
    }

    #[test]
    fn sampling_frequency_follows_probability() {
        let mut rng = RngStreams::new(8).stream(StreamId::Protocol);
        let n = 10_000;
        let first = (0..n)
            .filter(|_| sample_index(&[0.9f64, 0.1], &mut rng) == 0)
            .count();
        let f = first as f64 / n as f64;
        assert!((f - 0.9).abs() <= 0.02, "{f}");
    }

    #[test]
    fn sampling_is_deterministic_per_seed() {
        let draw = |seed| {
            let mut rng = RngStreams::new(seed).stream(StreamId::Protocol);
            (0..50)
                .map(|_| sample_index(&[0.2f64, 0.3, 0.5], &mut rng))
                .collect::<Vec<_>>()
        };
        assert_eq!(draw(3), draw(3));
    }

    proptest::proptest! {
        #[test]
        fn probabilities_sum_to_one(
            row in proptest::collection::vec(0.0f64..10.0, 1..12),
            alpha in 0.0f64..2.0,
            beta in 0.0f64..4.0,
        ) {
            let p = selection_probabilities(&row, alpha, beta);
            let total: f64 = p.iter().sum();
            proptest::prop_assert!((total - 1.0).abs() < 1e-9);
            proptest::prop_assert!(p.iter().all(|&x| (0.0..=1.0).contains(&x)));
        }

        #[test]
        fn more_pheromone_never_lowers_probability(
            row in proptest::collection::vec(0.05f64..10.0, 2..10),
            pick in 0usize..10,
            boost in 0.0f64..5.0,
            beta in 0.0f64..4.0,
        ) {
            let i = pick % row.len();
            let before = selection_probabilities(&row, 0.0, beta)[i];
            let mut raised = row.clone();
            raised[i] += boost;
            let after = selection_probabilities(&raised, 0.0, beta)[i];
            proptest::prop_assert!(after >= before - 1e-12);
        }

        #[test]
        fn heaviest_entry_is_most_likely(
            row in proptest::collection::vec(0.05f64..10.0, 1..10),
            beta in 0.0f64..4.0,
        ) {
            let p = selection_probabilities(&row, 0.0, beta);
            let heavy = (0..row.len()).max_by(|&a, &b| row[a].total_cmp(&row[b])).unwrap();
            proptest::prop_assert!(p.iter().all(|&x| x <= p[heavy] + 1e-12));
        }
    }
}
