//! Sensor-driven cost-aware routing: a sink-rooted flood lays down hop-count
//! costs, data follows neighbors weighted by `1 / (1 + cost)`.

use std::collections::BTreeMap;

use crate::net::NodeId;
use crate::protocol::{AppEvent, Link, Packet, Protocol};
use crate::sim::SimTime;
use crate::termite::sample_index;

pub const UNREACHABLE: u32 = u32::MAX;

#[derive(Debug, Clone, PartialEq)]
pub struct ScParams {
    /// Period of the sink's cost flood.
    pub refresh_period: SimTime,
    pub cost_bytes: u32,
    pub data_bytes: u32,
    pub max_hops: u32,
}

impl Default for ScParams {
    fn default() -> Self {
        Self {
            refresh_period: 30.0,
            cost_bytes: 12,
            data_bytes: 40,
            max_hops: 64,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ScPacket {
    Cost {
        round: u64,
        cost: u32,
        bits: u32,
    },
    Data {
        payload: AppEvent,
        hops: u32,
        bits: u32,
    },
}

impl Packet for ScPacket {
    fn size_bits(&self) -> u32 {
        match *self {
            ScPacket::Cost { bits, .. } | ScPacket::Data { bits, .. } => bits,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            ScPacket::Cost { .. } => "sc-cost",
            ScPacket::Data { .. } => "sc-data",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScTimer {
    Refresh,
}

/// Estimated cost to the sink, own and per neighbor, for the latest flood round.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CostTable {
    pub round: Option<u64>,
    pub own: Option<u32>,
    pub neighbors: BTreeMap<NodeId, u32>,
}

impl CostTable {
    /// Forwarding probabilities: neighbors cheaper than this node if any,
    /// otherwise every neighbor with a finite cost.
    pub fn probabilities(&self) -> Vec<(NodeId, f64)> {
        let own = self.own.unwrap_or(UNREACHABLE);
        let finite: Vec<(NodeId, u32)> = self
            .neighbors
            .iter()
            .filter(|(_, &c)| c != UNREACHABLE)
            .map(|(&n, &c)| (n, c))
            .collect();
        let cheaper: Vec<(NodeId, u32)> =
            finite.iter().copied().filter(|&(_, c)| c < own).collect();
        let pool = if cheaper.is_empty() { finite } else { cheaper };
        let total: f64 = pool.iter().map(|&(_, c)| 1.0 / (1.0 + c as f64)).sum();
        pool.into_iter()
            .map(|(n, c)| (n, 1.0 / (1.0 + c as f64) / total))
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct SensorDriven {
    params: ScParams,
    tables: Vec<CostTable>,
    round: u64,
    pub floods: u64,
}

impl SensorDriven {
    pub fn new(params: ScParams, node_count: usize) -> Result<Self, String> {
        if !(params.refresh_period > 0.0) {
            return Err("sc refresh period must be > 0".into());
        }
        Ok(Self {
            params,
            tables: vec![CostTable::default(); node_count],
            round: 0,
            floods: 0,
        })
    }

    pub fn table(&self, n: NodeId) -> &CostTable {
        &self.tables[n]
    }

    fn cost_packet(&self, round: u64, cost: u32) -> ScPacket {
        ScPacket::Cost {
            round,
            cost,
            bits: self.params.cost_bytes * 8,
        }
    }

    fn flood(&mut self, link: &mut dyn Link<ScPacket, ScTimer>) {
        let sink = link.sink();
        self.floods += 1;
        let pkt = self.cost_packet(self.round, 0);
        self.tables[sink].own = Some(0);
        self.tables[sink].round = Some(self.round);
        link.broadcast(sink, pkt);
        self.round += 1;
    }

    fn forward(
        &mut self,
        link: &mut dyn Link<ScPacket, ScTimer>,
        node: NodeId,
        payload: AppEvent,
        hops: u32,
    ) {
        if hops >= self.params.max_hops {
            link.discard(node, &payload, "hop-limit");
            return;
        }
        let probs = self.tables[node].probabilities();
        if probs.is_empty() {
            link.discard(node, &payload, "no-finite-cost");
            return;
        }
        let weights: Vec<f64> = probs.iter().map(|p| p.1).collect();
        let next = probs[sample_index(&weights, link.rng())].0;
        let pkt = ScPacket::Data {
            payload,
            hops: hops + 1,
            bits: self.params.data_bytes * 8,
        };
        link.unicast(node, next, pkt);
    }
}

impl Protocol for SensorDriven {
    type Packet = ScPacket;
    type Timer = ScTimer;

    fn name(&self) -> &'static str {
        "sc"
    }

    fn start(&mut self, link: &mut dyn Link<ScPacket, ScTimer>) {
        self.flood(link);
        let sink = link.sink();
        link.set_timer(sink, self.params.refresh_period, ScTimer::Refresh);
    }

    fn on_app_event(
        &mut self,
        link: &mut dyn Link<ScPacket, ScTimer>,
        node: NodeId,
        event: AppEvent,
    ) {
        self.forward(link, node, event, 0);
    }

    fn on_packet(
        &mut self,
        link: &mut dyn Link<ScPacket, ScTimer>,
        node: NodeId,
        from: NodeId,
        packet: ScPacket,
    ) {
        match packet {
            ScPacket::Data { payload, hops, .. } => {
                if link.is_sink(node) {
                    link.deliver(node, &payload);
                } else {
                    self.forward(link, node, payload, hops);
                }
            }
            ScPacket::Cost { round, cost, .. } => {
                if link.is_sink(node) {
                    return;
                }
                let t = &mut self.tables[node];
                if t.round.map_or(true, |r| round > r) {
                    t.round = Some(round);
                    t.own = None;
                    t.neighbors.clear();
                }
                if t.round != Some(round) {
                    return;
                }
                t.neighbors.insert(from, cost);
                if t.own.is_none() {
                    t.own = Some(cost + 1);
                    let pkt = self.cost_packet(round, cost + 1);
                    link.broadcast(node, pkt);
                }
            }
        }
    }

    fn on_mac_failure(
        &mut self,
        link: &mut dyn Link<ScPacket, ScTimer>,
        node: NodeId,
        dest: NodeId,
        packet: ScPacket,
    ) {
        self.tables[node].neighbors.insert(dest, UNREACHABLE);
        if let ScPacket::Data { payload, hops, .. } = packet {
            self.forward(link, node, payload, hops);
        }
    }

    fn on_timer(&mut self, link: &mut dyn Link<ScPacket, ScTimer>, node: NodeId, timer: ScTimer) {
        match timer {
            ScTimer::Refresh => {
                self.flood(link);
                link.set_timer(node, self.params.refresh_period, ScTimer::Refresh);
            }
        }
    }

    fn dump_tables(&self, node: NodeId) -> Vec<String> {
        let t = &self.tables[node];
        let mut out = vec![format!("cost own={:?} round={:?}", t.own, t.round)];
        for (n, p) in t.probabilities() {
            out.push(format!(
                "probability neighbor={n} cost={} p={p:.6}",
                t.neighbors[&n]
            ));
        }
        out
    }
}
