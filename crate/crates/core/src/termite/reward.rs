//! Path reward carried by backward soldiers.

use crate::scalar::Scalar;

/// Path statistics a forward soldier has accumulated, in a common energy unit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RewardInputs<S> {
    /// Total number of nodes in the network.
    pub network_size: S,
    /// Initial node energy.
    pub initial_energy: S,
    /// Minimum node energy seen on the path.
    pub min_energy: S,
    /// Average node energy on the path.
    pub avg_energy: S,
    /// Nodes visited by the soldier.
    pub visited: S,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Reward<S> {
    Value(S),
    /// The formula was singular; the configured maximum is used instead.
    Clamped(S),
}

impl<S: Copy> Reward<S> {
    pub fn value(&self) -> S {
        match *self {
            Reward::Value(v) | Reward::Clamped(v) => v,
        }
    }

    pub fn is_clamped(&self) -> bool {
        matches!(self, Reward::Clamped(_))
    }
}

/// `gamma = N / (E - (E_min - N_j) / (E_av - N_j))`.
///
/// When `E_av == N_j`, or the outer denominator is not positive, or the result is
/// not finite, `gamma_max` is returned as [`Reward::Clamped`].
pub fn compute_reward<S: Scalar>(inp: &RewardInputs<S>, gamma_max: S) -> Reward<S> {
    let inner = inp.avg_energy - inp.visited;
    if inner == S::zero() {
        return Reward::Clamped(gamma_max);
    }
    let ratio = (inp.min_energy - inp.visited) / inner;
    let denom = inp.initial_energy - ratio;
    if !(denom > S::zero()) {
        return Reward::Clamped(gamma_max);
    }
    let gamma = inp.network_size / denom;
    if gamma.is_finite() {
        Reward::Value(gamma)
    } else {
        Reward::Clamped(gamma_max)
    }
}

/// Default clamp: `factor * N / E`.
pub fn default_gamma_max<S: Scalar>(factor: S, network_size: S, initial_energy: S) -> S {
    factor * network_size / initial_energy
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_evaluated_example() {
        let r = compute_reward(
            &RewardInputs {
                network_size: 10.0,
                initial_energy: 100.0,
                min_energy: 50.0,
                avg_energy: 60.0,
                visited: 5.0,
            },
            1.0,
        );
        // 10 / (100 - 45/55)
        let expected: f64 = 10.0 / (100.0 - 45.0 / 55.0);
        assert_eq!(r, Reward::Value(expected));
        assert!((expected - 0.100_824_9).abs() < 1e-7);
    }

    #[test]
    fn flat_energy_path_ignores_hops() {
        for hops in [0.0, 1.0, 4.0, 17.0] {
            let r = compute_reward(
                &RewardInputs {
                    network_size: 20.0f64,
                    initial_energy: 500.0,
                    min_energy: 300.0,
                    avg_energy: 300.0,
                    visited: hops,
                },
                99.0,
            );
            assert!((r.value() - 20.0 / 499.0).abs() < 1e-15);
        }
    }

    #[test]
    fn singular_case_clamps() {
        let gmax = default_gamma_max(10.0, 100.0, 1.0);
        let r = compute_reward(
            &RewardInputs {
                network_size: 100.0,
                initial_energy: 1.0,
                min_energy: 1.0,
                avg_energy: 1.0,
                visited: 0.0,
            },
            gmax,
        );
        assert_eq!(r, Reward::Clamped(1000.0));
        let eq = compute_reward(
            &RewardInputs {
                network_size: 5.0,
                initial_energy: 10.0,
                min_energy: 2.0,
                avg_energy: 3.0,
                visited: 3.0,
            },
            7.0,
        );
        assert!(eq.is_clamped());
    }

    #[test]
    fn generic_over_f32() {
        let r = compute_reward(
            &RewardInputs {
                network_size: 10.0f32,
                initial_energy: 100.0,
                min_energy: 50.0,
                avg_energy: 60.0,
                visited: 5.0,
            },
            1.0,
        );
        assert!((r.value() - 0.100_825f32).abs() < 1e-6);
    }
}
