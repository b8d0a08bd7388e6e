//! Minimal comparator protocols: flooded-forward ants (FF), sensor-driven
//! cost-aware routing (SC) and an on-demand distance-vector protocol (AODV-lite).
//!
//! These are small reconstructions meant to show qualitative contrasts, not
//! faithful implementations of the original protocols.

pub mod aodv;
pub mod ff;
pub mod sc;

use std::collections::HashMap;

use crate::net::NodeId;
use crate::sim::SimTime;

pub use aodv::{AodvLite, AodvPacket, AodvParams, AodvTimer, RouteEntry};
pub use ff::{FfPacket, FfParams, FloodedForward};
pub use sc::{CostTable, ScPacket, ScParams, SensorDriven};

/// Per-node duplicate suppression keyed by `(origin, sequence)`.
#[derive(Debug, Clone, Default)]
pub struct SeenSet {
    seen: HashMap<(NodeId, u64), SimTime>,
}

impl SeenSet {
    /// Returns `true` the first time a key is offered.
    pub fn first_sighting(&mut self, origin: NodeId, seq: u64, now: SimTime) -> bool {
        use std::collections::hash_map::Entry;
        match self.seen.entry((origin, seq)) {
            Entry::Occupied(_) => false,
            Entry::Vacant(v) => {
                v.insert(now);
                true
            }
        }
    }

    pub fn contains(&self, origin: NodeId, seq: u64) -> bool {
        self.seen.contains_key(&(origin, seq))
    }

    pub fn purge(&mut self, now: SimTime, ttl: SimTime) {
        self.seen.retain(|_, &mut t| now - t < ttl);
    }

    pub fn len(&self) -> usize {
        self.seen.len()
    }

    pub fn is_empty(&self) -> bool {
        self.seen.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn duplicates_suppressed_until_purged() {
        let mut s = SeenSet::default();
        assert!(s.first_sighting(3, 7, 0.0));
        assert!(!s.first_sighting(3, 7, 0.5));
        assert!(s.first_sighting(3, 8, 0.5));
        s.purge(20.0, 10.0);
        assert!(s.is_empty());
        assert!(s.first_sighting(3, 7, 20.0));
    }
}
