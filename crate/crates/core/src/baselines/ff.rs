//! Flooded-forward ant routing: every event travels inside a flooded ant; the
//! sink sends a backward ant along the first copy's reverse path, which
//! reinforces link probabilities and tells the source how far the sink is so
//! later floods can be scoped.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::net::NodeId;
use crate::protocol::{AppEvent, Link, Packet, Protocol};
use crate::sim::SimTime;

use super::SeenSet;

#[derive(Debug, Clone, PartialEq)]
pub struct FfParams {
    /// Extra hops allowed beyond the best known path length.
    pub ttl_slack: u32,
    /// Without a backward ant within this time the hop estimate is forgotten.
    pub reply_timeout: SimTime,
    /// Reinforcement applied to a link each time a backward ant crosses it.
    pub reinforcement: f64,
    pub ant_bytes: u32,
    pub backward_bytes: u32,
    pub memory_ttl: SimTime,
}

impl Default for FfParams {
    fn default() -> Self {
        Self {
            ttl_slack: 2,
            reply_timeout: 1.0,
            reinforcement: 0.3,
            ant_bytes: 40,
            backward_bytes: 20,
            memory_ttl: 10.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum FfPacket {
    Ant {
        payload: AppEvent,
        hops: u32,
        ttl: Option<u32>,
        bits: u32,
    },
    Backward {
        origin: NodeId,
        seq: u64,
        path_hops: u32,
        bits: u32,
    },
}

impl Packet for FfPacket {
    fn size_bits(&self) -> u32 {
        match *self {
            FfPacket::Ant { bits, .. } | FfPacket::Backward { bits, .. } => bits,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            FfPacket::Ant { .. } => "ff-ant",
            FfPacket::Backward { .. } => "ff-back",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FfTimer {
    ReplyTimeout(u64),
}

#[derive(Debug, Clone, Default)]
struct FfNode {
    seen: SeenSet,
    replied: SeenSet,
    reverse: HashMap<(NodeId, u64), (NodeId, SimTime)>,
    best_hops: Option<u32>,
    pending: BTreeSet<u64>,
    /// Probability of each neighbor lying on a good path to the sink.
    link_prob: BTreeMap<NodeId, f64>,
}

#[derive(Debug, Clone)]
pub struct FloodedForward {
    params: FfParams,
    nodes: Vec<FfNode>,
    pub suppressed: u64,
    pub rebroadcasts: u64,
}

impl FloodedForward {
    pub fn new(params: FfParams, node_count: usize) -> Result<Self, String> {
        if !(params.reply_timeout > 0.0) || !(0.0..=1.0).contains(&params.reinforcement) {
            return Err("ff parameters out of range".into());
        }
        Ok(Self {
            params,
            nodes: vec![FfNode::default(); node_count],
            suppressed: 0,
            rebroadcasts: 0,
        })
    }

    pub fn best_hops(&self, n: NodeId) -> Option<u32> {
        self.nodes[n].best_hops
    }

    pub fn link_probabilities(&self, n: NodeId) -> &BTreeMap<NodeId, f64> {
        &self.nodes[n].link_prob
    }

    fn reinforce(&mut self, node: NodeId, via: NodeId) {
        let r = self.params.reinforcement;
        let probs = &mut self.nodes[node].link_prob;
        if probs.is_empty() {
            probs.insert(via, 1.0);
            return;
        }
        probs.entry(via).or_insert(0.0);
        for (&n, p) in probs.iter_mut() {
            *p = if n == via {
                *p + r * (1.0 - *p)
            } else {
                *p * (1.0 - r)
            };
        }
    }
}

impl Protocol for FloodedForward {
    type Packet = FfPacket;
    type Timer = FfTimer;

    fn name(&self) -> &'static str {
        "ff"
    }

    fn decay_period(&self) -> Option<SimTime> {
        Some(1.0)
    }

    fn on_app_event(
        &mut self,
        link: &mut dyn Link<FfPacket, FfTimer>,
        node: NodeId,
        event: AppEvent,
    ) {
        let now = link.now();
        let st = &mut self.nodes[node];
        st.seen.first_sighting(node, event.id.seq, now);
        st.pending.insert(event.id.seq);
        let ttl = st.best_hops.map(|h| h + self.params.ttl_slack);
        link.broadcast(
            node,
            FfPacket::Ant {
                payload: event,
                hops: 0,
                ttl,
                bits: self.params.ant_bytes * 8,
            },
        );
        link.set_timer(
            node,
            self.params.reply_timeout,
            FfTimer::ReplyTimeout(event.id.seq),
        );
    }

    fn on_packet(
        &mut self,
        link: &mut dyn Link<FfPacket, FfTimer>,
        node: NodeId,
        from: NodeId,
        packet: FfPacket,
    ) {
        let now = link.now();
        match packet {
            FfPacket::Ant {
                payload,
                hops,
                ttl,
                bits,
            } => {
                let (origin, seq) = (payload.id.source, payload.id.seq);
                if link.is_sink(node) {
                    link.deliver(node, &payload);
                    if self.nodes[node].replied.first_sighting(origin, seq, now) {
                        link.unicast(
                            node,
                            from,
                            FfPacket::Backward {
                                origin,
                                seq,
                                path_hops: hops + 1,
                                bits: self.params.backward_bytes * 8,
                            },
                        );
                    }
                    return;
                }
                let st = &mut self.nodes[node];
                if !st.seen.first_sighting(origin, seq, now) {
                    self.suppressed += 1;
                    return;
                }
                st.reverse.insert((origin, seq), (from, now));
                let hops = hops + 1;
                if ttl.map_or(true, |t| hops < t) {
                    self.rebroadcasts += 1;
                    link.broadcast(
                        node,
                        FfPacket::Ant {
                            payload,
                            hops,
                            ttl,
                            bits,
                        },
                    );
                }
            }
            FfPacket::Backward {
                origin,
                seq,
                path_hops,
                bits,
            } => {
                self.reinforce(node, from);
                let st = &mut self.nodes[node];
                if origin == node {
                    if st.pending.remove(&seq) {
                        st.best_hops = Some(path_hops);
                    }
                    return;
                }
                if let Some((prev, _)) = st.reverse.remove(&(origin, seq)) {
                    link.unicast(
                        node,
                        prev,
                        FfPacket::Backward {
                            origin,
                            seq,
                            path_hops,
                            bits,
                        },
                    );
                }
            }
        }
    }

    fn on_decay_tick(&mut self, link: &mut dyn Link<FfPacket, FfTimer>) {
        let now = link.now();
        let ttl = self.params.memory_ttl;
        for st in &mut self.nodes {
            st.seen.purge(now, ttl);
            st.replied.purge(now, ttl);
            st.reverse.retain(|_, &mut (_, t)| now - t < ttl);
        }
    }

    fn on_mac_failure(
        &mut self,
        _link: &mut dyn Link<FfPacket, FfTimer>,
        node: NodeId,
        dest: NodeId,
        _packet: FfPacket,
    ) {
        self.nodes[node].link_prob.remove(&dest);
    }

    fn on_timer(&mut self, _link: &mut dyn Link<FfPacket, FfTimer>, node: NodeId, timer: FfTimer) {
        let FfTimer::ReplyTimeout(seq) = timer;
        let st = &mut self.nodes[node];
        if st.pending.remove(&seq) {
            st.best_hops = None;
        }
    }

    fn dump_tables(&self, node: NodeId) -> Vec<String> {
        let st = &self.nodes[node];
        let mut out = vec![format!("best_hops={:?}", st.best_hops)];
        for (n, p) in &st.link_prob {
            out.push(format!("probability neighbor={n} p={p:.6}"));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reinforcement_keeps_probabilities_normalized() {
        let mut ff = FloodedForward::new(FfParams::default(), 4).unwrap();
        ff.reinforce(0, 1);
        ff.reinforce(0, 2);
        ff.reinforce(0, 2);
        ff.reinforce(0, 3);
        let p = ff.link_probabilities(0);
        let sum: f64 = p.values().sum();
        assert!((sum - 1.0).abs() < 1e-12);
        assert!(p[&2] > p[&1]);
    }
}
