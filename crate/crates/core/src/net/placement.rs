use std::collections::VecDeque;

use rand::Rng;

use super::{Area, NetError, Position};

/// How sensor positions are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlacementPolicy {
    /// One uniform draw, whatever the resulting connectivity.
    Uniform,
    /// Uniform draws repeated until the unit-disk graph is connected.
    Connected { max_attempts: u32 },
}

/// Places `n` nodes. Node 0 is the sink and sits at `sink_at`; the rest are uniform in `area`.
pub fn place_nodes<R: Rng + ?Sized>(
    n: usize,
    area: Area,
    sink_at: Position,
    range: f64,
    policy: PlacementPolicy,
    rng: &mut R,
) -> Result<Vec<Position>, NetError> {
    if n < 2 {
        return Err(NetError::Placement(format!(
            "need at least 2 nodes, got {n}"
        )));
    }
    if !area.contains(&sink_at) {
        return Err(NetError::Placement("sink position outside area".into()));
    }
    let draw = |rng: &mut R| {
        let mut v = Vec::with_capacity(n);
        v.push(sink_at);
        v.extend((1..n).map(|_| area.random_point(rng)));
        v
    };
    match policy {
        PlacementPolicy::Uniform => Ok(draw(rng)),
        PlacementPolicy::Connected { max_attempts } => {
            for _ in 0..max_attempts.max(1) {
                let v = draw(rng);
                if is_connected(&v, range) {
                    return Ok(v);
                }
            }
            Err(NetError::Placement(format!(
                "no connected placement of {n} nodes within {max_attempts} attempts"
            )))
        }
    }
}

/// Breadth-first connectivity test on the unit-disk graph.
pub fn is_connected(positions: &[Position], range: f64) -> bool {
    if positions.is_empty() {
        return true;
    }
    let mut seen = vec![false; positions.len()];
    let mut queue = VecDeque::from([0usize]);
    seen[0] = true;
    let mut count = 1;
    while let Some(a) = queue.pop_front() {
        for b in 0..positions.len() {
            if !seen[b] && positions[a].distance(&positions[b]) <= range {
                seen[b] = true;
                count += 1;
                queue.push_back(b);
            }
        }
    }
    count == positions.len()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::{RngStreams, StreamId};

    #[test]
    fn connected_policy_yields_connected_graph() {
        let area = Area::new(100.0, 100.0);
        for seed in 0..10 {
            let mut rng = RngStreams::new(seed).stream(StreamId::Placement);
            let v = place_nodes(
                9,
                area,
                area.center(),
                35.0,
                PlacementPolicy::Connected {
                    max_attempts: 100_000,
                },
                &mut rng,
            )
            .unwrap();
            assert_eq!(v.len(), 9);
            assert_eq!(v[0], area.center());
            assert!(is_connected(&v, 35.0));
            assert!(v.iter().all(|p| area.contains(p)));
        }
    }

    #[test]
    fn same_seed_same_placement() {
        let area = Area::new(100.0, 100.0);
        let mk = || {
            let mut rng = RngStreams::new(42).stream(StreamId::Placement);
            place_nodes(
                50,
                area,
                area.center(),
                35.0,
                PlacementPolicy::Uniform,
                &mut rng,
            )
            .unwrap()
        };
        assert_eq!(mk(), mk());
    }

    #[test]
    fn impossible_connectivity_reports_error() {
        let area = Area::new(1000.0, 1000.0);
        let mut rng = RngStreams::new(1).stream(StreamId::Placement);
        let r = place_nodes(
            5,
            area,
            area.center(),
            1.0,
            PlacementPolicy::Connected { max_attempts: 10 },
            &mut rng,
        );
        assert!(matches!(r, Err(NetError::Placement(_))));
    }
}
