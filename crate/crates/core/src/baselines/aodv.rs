//! AODV-lite: on-demand RREQ floods answered by the sink with an RREP along the
//! reverse path. No sequence numbers, no HELLO messages, no route errors; link
//! breaks are discovered through MAC failures.
//!
//! Route freshness uses the sink's discovery counter: every sink reply carries
//! the counter's next value, a request asks for something newer than the
//! requester's last route, and a relay may answer only with a route at least
//! that fresh. A node whose route lapsed accepts only strictly newer news.
//! Together this keeps intermediate replies from forming loops.

use std::collections::{HashMap, VecDeque};

use crate::net::NodeId;
use crate::protocol::{AppEvent, Link, Packet, Protocol};
use crate::sim::SimTime;

use super::SeenSet;

#[derive(Debug, Clone, PartialEq)]
pub struct AodvParams {
    /// Idle lifetime of an active route; refreshed each time it carries data.
    pub active_route_timeout: SimTime,
    pub discovery_timeout: SimTime,
    pub discovery_retries: u32,
    /// A relay holding an active route answers an RREQ itself instead of
    /// propagating it.
    pub intermediate_reply: bool,
    pub buffer_capacity: usize,
    pub rreq_bytes: u32,
    pub rrep_bytes: u32,
    pub data_bytes: u32,
    pub max_hops: u32,
    pub memory_ttl: SimTime,
}

impl Default for AodvParams {
    fn default() -> Self {
        Self {
            active_route_timeout: 3.0,
            discovery_timeout: 1.0,
            discovery_retries: 2,
            intermediate_reply: false,
            buffer_capacity: 16,
            rreq_bytes: 20,
            rrep_bytes: 20,
            data_bytes: 40,
            max_hops: 64,
            memory_ttl: 10.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RouteEntry {
    pub destination: NodeId,
    pub next_hop: NodeId,
    pub hop_count: u32,
    /// Sink discovery counter value the route was learned with.
    pub epoch: u64,
    pub valid: bool,
    pub expires: SimTime,
}

impl RouteEntry {
    pub fn usable(&self, now: SimTime) -> bool {
        self.valid && self.expires > now
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum AodvPacket {
    Rreq {
        origin: NodeId,
        id: u64,
        hops: u32,
        min_epoch: u64,
        bits: u32,
    },
    Rrep {
        origin: NodeId,
        id: u64,
        hops_to_sink: u32,
        epoch: u64,
        bits: u32,
    },
    Data {
        payload: AppEvent,
        hops: u32,
        bits: u32,
    },
}

impl Packet for AodvPacket {
    fn size_bits(&self) -> u32 {
        match *self {
            AodvPacket::Rreq { bits, .. }
            | AodvPacket::Rrep { bits, .. }
            | AodvPacket::Data { bits, .. } => bits,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            AodvPacket::Rreq { .. } => "rreq",
            AodvPacket::Rrep { .. } => "rrep",
            AodvPacket::Data { .. } => "aodv-data",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AodvTimer {
    Discovery(u64),
}

#[derive(Debug, Clone, Default)]
struct AodvNode {
    route: Option<RouteEntry>,
    seen: SeenSet,
    reverse: HashMap<(NodeId, u64), (NodeId, SimTime)>,
    buffer: VecDeque<(AppEvent, u32)>,
    discovery: Option<(u64, u32)>,
    next_id: u64,
}

#[derive(Debug, Clone)]
pub struct AodvLite {
    params: AodvParams,
    nodes: Vec<AodvNode>,
    sink_epoch: u64,
    pub rreq_floods: u64,
    pub rreq_rebroadcasts: u64,
}

impl AodvLite {
    pub fn new(params: AodvParams, node_count: usize) -> Result<Self, String> {
        if !(params.active_route_timeout > 0.0 && params.discovery_timeout > 0.0)
            || params.buffer_capacity == 0
        {
            return Err("aodv parameters out of range".into());
        }
        Ok(Self {
            params,
            nodes: vec![AodvNode::default(); node_count],
            sink_epoch: 0,
            rreq_floods: 0,
            rreq_rebroadcasts: 0,
        })
    }

    pub fn route(&self, n: NodeId) -> Option<&RouteEntry> {
        self.nodes[n].route.as_ref()
    }

    fn data(&self, payload: AppEvent, hops: u32) -> AodvPacket {
        AodvPacket::Data {
            payload,
            hops,
            bits: self.params.data_bytes * 8,
        }
    }

    fn send(
        &mut self,
        link: &mut dyn Link<AodvPacket, AodvTimer>,
        node: NodeId,
        payload: AppEvent,
        hops: u32,
    ) {
        if hops >= self.params.max_hops {
            link.discard(node, &payload, "hop-limit");
            return;
        }
        let now = link.now();
        let timeout = self.params.active_route_timeout;
        let st = &mut self.nodes[node];
        match st.route.as_mut() {
            Some(r) if r.usable(now) => {
                r.expires = now + timeout;
                let next = r.next_hop;
                let pkt = self.data(payload, hops + 1);
                link.unicast(node, next, pkt);
            }
            _ => {
                if st.buffer.len() >= self.params.buffer_capacity {
                    if let Some((old, _)) = st.buffer.pop_front() {
                        link.discard(node, &old, "buffer-overflow");
                    }
                }
                self.nodes[node].buffer.push_back((payload, hops));
                if self.nodes[node].discovery.is_none() {
                    self.discover(link, node, 0);
                }
            }
        }
    }

    fn discover(&mut self, link: &mut dyn Link<AodvPacket, AodvTimer>, node: NodeId, attempt: u32) {
        let now = link.now();
        let st = &mut self.nodes[node];
        let id = st.next_id;
        st.next_id += 1;
        st.discovery = Some((id, attempt));
        st.seen.first_sighting(node, id, now);
        let min_epoch = st.route.map_or(0, |r| r.epoch + 1);
        self.rreq_floods += 1;
        link.broadcast(
            node,
            AodvPacket::Rreq {
                origin: node,
                id,
                hops: 0,
                min_epoch,
                bits: self.params.rreq_bytes * 8,
            },
        );
        link.set_timer(
            node,
            self.params.discovery_timeout,
            AodvTimer::Discovery(id),
        );
    }

    fn drain(&mut self, link: &mut dyn Link<AodvPacket, AodvTimer>, node: NodeId) {
        let pending: Vec<(AppEvent, u32)> = self.nodes[node].buffer.drain(..).collect();
        for (ev, hops) in pending {
            self.send(link, node, ev, hops);
        }
    }
}

impl Protocol for AodvLite {
    type Packet = AodvPacket;
    type Timer = AodvTimer;

    fn name(&self) -> &'static str {
        "aodv"
    }

    fn decay_period(&self) -> Option<SimTime> {
        Some(1.0)
    }

    fn on_app_event(
        &mut self,
        link: &mut dyn Link<AodvPacket, AodvTimer>,
        node: NodeId,
        event: AppEvent,
    ) {
        self.send(link, node, event, 0);
    }

    fn on_packet(
        &mut self,
        link: &mut dyn Link<AodvPacket, AodvTimer>,
        node: NodeId,
        from: NodeId,
        packet: AodvPacket,
    ) {
        let now = link.now();
        match packet {
            AodvPacket::Data { payload, hops, .. } => {
                if link.is_sink(node) {
                    link.deliver(node, &payload);
                } else {
                    self.send(link, node, payload, hops);
                }
            }
            AodvPacket::Rreq {
                origin,
                id,
                hops,
                min_epoch,
                bits,
            } => {
                let st = &mut self.nodes[node];
                if !st.seen.first_sighting(origin, id, now) {
                    return;
                }
                st.reverse.insert((origin, id), (from, now));
                let known = match st.route {
                    Some(r)
                        if self.params.intermediate_reply
                            && r.usable(now)
                            && r.epoch >= min_epoch =>
                    {
                        Some((r.hop_count, r.epoch))
                    }
                    _ => None,
                };
                let reply = if link.is_sink(node) {
                    self.sink_epoch = self.sink_epoch.max(min_epoch) + 1;
                    Some((0, self.sink_epoch))
                } else {
                    known
                };
                if let Some((hops_to_sink, epoch)) = reply {
                    link.unicast(
                        node,
                        from,
                        AodvPacket::Rrep {
                            origin,
                            id,
                            hops_to_sink,
                            epoch,
                            bits: self.params.rrep_bytes * 8,
                        },
                    );
                } else {
                    self.rreq_rebroadcasts += 1;
                    link.broadcast(
                        node,
                        AodvPacket::Rreq {
                            origin,
                            id,
                            hops: hops + 1,
                            min_epoch,
                            bits,
                        },
                    );
                }
            }
            AodvPacket::Rrep {
                origin,
                id,
                hops_to_sink,
                epoch,
                bits,
            } => {
                let sink = link.sink();
                let hop_count = hops_to_sink + 1;
                let st = &mut self.nodes[node];
                let replace = match st.route {
                    Some(r) if r.usable(now) => epoch > r.epoch || (epoch == r.epoch && hop_count < r.hop_count),
                    // A lapsed route only yields to news from after it lapsed; anything
                    // older may lead back through this node.
                    Some(r) => epoch > r.epoch,
                    None => true,
                };
                if replace {
                    st.route = Some(RouteEntry {
                        destination: sink,
                        next_hop: from,
                        hop_count,
                        epoch,
                        valid: true,
                        expires: now + self.params.active_route_timeout,
                    });
                }
                if origin == node {
                    if st.discovery.is_some_and(|d| d.0 == id) {
                        st.discovery = None;
                    }
                    self.drain(link, node);
                    return;
                }
                if let Some((prev, _)) = st.reverse.remove(&(origin, id)) {
                    link.unicast(
                        node,
                        prev,
                        AodvPacket::Rrep {
                            origin,
                            id,
                            hops_to_sink: hop_count,
                            epoch,
                            bits,
                        },
                    );
                }
                if !self.nodes[node].buffer.is_empty() {
                    self.drain(link, node);
                }
            }
        }
    }

    fn on_decay_tick(&mut self, link: &mut dyn Link<AodvPacket, AodvTimer>) {
        let now = link.now();
        let ttl = self.params.memory_ttl;
        for st in &mut self.nodes {
            st.seen.purge(now, ttl);
            st.reverse.retain(|_, &mut (_, t)| now - t < ttl);
        }
    }

    fn on_mac_failure(
        &mut self,
        link: &mut dyn Link<AodvPacket, AodvTimer>,
        node: NodeId,
        dest: NodeId,
        packet: AodvPacket,
    ) {
        if let Some(r) = self.nodes[node].route.as_mut() {
            if r.next_hop == dest {
                r.valid = false;
            }
        }
        if let AodvPacket::Data { payload, .. } = packet {
            link.discard(node, &payload, "link-break");
        }
    }

    fn on_timer(
        &mut self,
        link: &mut dyn Link<AodvPacket, AodvTimer>,
        node: NodeId,
        timer: AodvTimer,
    ) {
        let AodvTimer::Discovery(id) = timer;
        let Some((current, attempt)) = self.nodes[node].discovery else {
            return;
        };
        if current != id {
            return;
        }
        self.nodes[node].discovery = None;
        if attempt < self.params.discovery_retries {
            self.discover(link, node, attempt + 1);
        } else {
            let dropped: Vec<(AppEvent, u32)> = self.nodes[node].buffer.drain(..).collect();
            for (ev, _) in dropped {
                link.discard(node, &ev, "discovery-timeout");
            }
        }
    }

    fn dump_tables(&self, node: NodeId) -> Vec<String> {
        match &self.nodes[node].route {
            Some(r) => vec![format!(
                "route dest={} next={} hops={} epoch={} valid={} expires={:.6}",
                r.destination, r.next_hop, r.hop_count, r.epoch, r.valid, r.expires
            )],
            None => Vec::new(),
        }
    }
}
