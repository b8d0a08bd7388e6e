//! The interface every routing protocol implements and the link-layer services
//! the simulator offers to it.

use std::fmt;

use rand::RngCore;

use crate::net::{NodeId, UnicastOutcome};
use crate::sim::SimTime;

/// Identity of one application event (a sensed phenomenon).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EventId {
    pub source: NodeId,
    pub seq: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AppEvent {
    pub id: EventId,
    pub generated_at: SimTime,
}

/// A routing-layer packet carried in a radio frame.
pub trait Packet: Clone + fmt::Debug {
    fn size_bits(&self) -> u32;
    fn kind(&self) -> &'static str;
}

/// Services the network offers a protocol while it handles an event.
///
/// Protocols only learn about their surroundings through what they receive and
/// through unicast outcomes; there is no neighbor oracle here.
pub trait Link<P, T> {
    fn now(&self) -> SimTime;
    fn node_count(&self) -> usize;
    fn sink(&self) -> NodeId;
    fn is_sink(&self, node: NodeId) -> bool {
        node == self.sink()
    }
    /// Remaining energy of `node` in joules.
    fn energy(&self, node: NodeId) -> f64;
    /// Initial energy of a sensor node in joules.
    fn initial_energy(&self) -> f64;
    /// One-hop broadcast. Returns how many neighbors will receive the frame.
    fn broadcast(&mut self, from: NodeId, packet: P) -> usize;
    /// MAC unicast with retransmissions. A failure is also reported later via
    /// [`Protocol::on_mac_failure`].
    fn unicast(&mut self, from: NodeId, to: NodeId, packet: P) -> UnicastOutcome;
    /// Hands an application event to the sink's application layer.
    fn deliver(&mut self, at: NodeId, event: &AppEvent);
    /// Records that an event was discarded by the routing layer.
    fn discard(&mut self, at: NodeId, event: &AppEvent, reason: &str);
    fn set_timer(&mut self, node: NodeId, delay: SimTime, timer: T);
    fn rng(&mut self) -> &mut dyn RngCore;
    fn note(&mut self, node: NodeId, kind: &str, detail: fmt::Arguments<'_>);
}

/// Callbacks a routing protocol implements. Per-node state lives inside the
/// implementor; the simulator never looks at it.
pub trait Protocol {
    type Packet: Packet;
    type Timer: Clone + fmt::Debug;

    fn name(&self) -> &'static str;

    /// Period of [`Protocol::on_decay_tick`], if the protocol wants one.
    fn decay_period(&self) -> Option<SimTime> {
        None
    }

    fn start(&mut self, _link: &mut dyn Link<Self::Packet, Self::Timer>) {}

    fn on_app_event(
        &mut self,
        link: &mut dyn Link<Self::Packet, Self::Timer>,
        node: NodeId,
        event: AppEvent,
    );

    fn on_packet(
        &mut self,
        link: &mut dyn Link<Self::Packet, Self::Timer>,
        node: NodeId,
        from: NodeId,
        packet: Self::Packet,
    );

    fn on_decay_tick(&mut self, _link: &mut dyn Link<Self::Packet, Self::Timer>) {}

    fn on_mac_failure(
        &mut self,
        link: &mut dyn Link<Self::Packet, Self::Timer>,
        node: NodeId,
        dest: NodeId,
        packet: Self::Packet,
    );

    fn on_timer(
        &mut self,
        _link: &mut dyn Link<Self::Packet, Self::Timer>,
        _node: NodeId,
        _timer: Self::Timer,
    ) {
    }

    /// Called after the sink moved.
    fn on_topology_change(&mut self, _link: &mut dyn Link<Self::Packet, Self::Timer>) {}

    /// Human-readable per-node routing state, one line per entry.
    fn dump_tables(&self, _node: NodeId) -> Vec<String> {
        Vec::new()
    }
}
