//! Per-node Termite-hill routing: soldier-based route discovery, pheromone
//! deposit on backward soldiers, probabilistic forwarding of worker packets.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::fmt;

use rand::Rng;

use crate::net::NodeId;
use crate::protocol::{AppEvent, Link, Packet, Protocol};
use crate::sim::SimTime;

use super::pheromone::{Evaporation, PheromoneLimits, PheromoneTable};
use super::reward::{compute_reward, default_gamma_max, Reward, RewardInputs};
use super::selection::route_probabilities;

/// Packet sizes in bytes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PacketSizes {
    pub forward_soldier: u32,
    pub backward_soldier: u32,
    pub worker: u32,
    pub beacon: u32,
}

impl Default for PacketSizes {
    fn default() -> Self {
        Self {
            forward_soldier: 20,
            backward_soldier: 20,
            worker: 40,
            beacon: 12,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TermiteParams {
    pub alpha: f64,
    pub beta: f64,
    pub evaporation: Evaporation<f64>,
    pub decay_period: SimTime,
    pub limits: PheromoneLimits<f64>,
    /// Hop count up to which forward soldiers are always rebroadcast.
    pub hmax: u32,
    /// Rebroadcast probability beyond `hmax`.
    pub p_sf: f64,
    pub event_cache_capacity: usize,
    pub sizes: PacketSizes,
    /// Energies enter the reward formula multiplied by this factor (1000 = millijoules).
    pub reward_energy_scale: f64,
    /// Clamp for singular rewards is `factor * N / E`.
    pub gamma_max_factor: f64,
    pub discovery_timeout: SimTime,
    pub discovery_retries: u32,
    /// How long the sink gathers copies of one forward soldier before answering.
    /// Zero answers the first copy immediately.
    pub sink_reply_window: SimTime,
    /// Neighbors of a source may reuse a freshly established path.
    pub beacon_adoption: bool,
    pub beacon_ttl: SimTime,
    pub max_worker_hops: u32,
    pub soldier_cache_ttl: SimTime,
    pub relay_miss: RelayMiss,
}

/// What a relay does with a worker whose path id it has no entry for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RelayMiss {
    /// Keep the worker in the event cache and discover a route from here.
    #[default]
    Hold,
    /// Drop it and discover a route for later traffic.
    Drop,
    /// Send it along one of this node's own routes, dropping when there is none.
    Reroute,
}

impl RelayMiss {
    pub fn name(self) -> &'static str {
        match self {
            RelayMiss::Hold => "hold",
            RelayMiss::Drop => "drop",
            RelayMiss::Reroute => "reroute",
        }
    }
}

impl std::str::FromStr for RelayMiss {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "hold" => Ok(RelayMiss::Hold),
            "drop" => Ok(RelayMiss::Drop),
            "reroute" => Ok(RelayMiss::Reroute),
            _ => Err(format!(
                "unknown relay miss policy '{s}' (hold, drop, reroute)"
            )),
        }
    }
}

impl Default for TermiteParams {
    fn default() -> Self {
        Self {
            alpha: 0.0,
            beta: 2.0,
            evaporation: Evaporation::Exponential { rho: 0.1 },
            decay_period: 1.0,
            limits: PheromoneLimits::default(),
            hmax: 10,
            p_sf: 0.5,
            event_cache_capacity: 16,
            sizes: PacketSizes::default(),
            reward_energy_scale: 1000.0,
            gamma_max_factor: 10.0,
            discovery_timeout: 1.0,
            discovery_retries: 2,
            sink_reply_window: 0.0,
            beacon_adoption: true,
            beacon_ttl: 10.0,
            max_worker_hops: 64,
            soldier_cache_ttl: 10.0,
            relay_miss: RelayMiss::Hold,
        }
    }
}

impl TermiteParams {
    pub fn validate(&self) -> Result<(), String> {
        self.limits.validate().map_err(|e| e.to_string())?;
        self.evaporation.validate().map_err(|e| e.to_string())?;
        let checks: [(bool, &str); 9] = [
            (
                self.alpha >= 0.0 && self.alpha.is_finite(),
                "alpha must be >= 0",
            ),
            (
                self.beta >= 0.0 && self.beta.is_finite(),
                "beta must be >= 0",
            ),
            (self.decay_period > 0.0, "decay period must be > 0"),
            ((0.0..=1.0).contains(&self.p_sf), "p_sf must be in [0, 1]"),
            (
                self.event_cache_capacity > 0,
                "event cache capacity must be > 0",
            ),
            (
                self.reward_energy_scale > 0.0,
                "reward energy scale must be > 0",
            ),
            (
                self.discovery_timeout > 0.0,
                "discovery timeout must be > 0",
            ),
            (
                self.sink_reply_window >= 0.0,
                "sink reply window must be >= 0",
            ),
            (self.max_worker_hops > 0, "max worker hops must be > 0"),
        ];
        match checks.iter().find(|c| !c.0) {
            Some((_, msg)) => Err((*msg).to_string()),
            None => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SoldierId {
    pub source: NodeId,
    pub seq: u64,
}

pub type PathId = u64;

#[derive(Debug, Clone, PartialEq)]
pub struct ForwardSoldier {
    pub id: SoldierId,
    /// Relays traversed so far (the source counts as zero).
    pub hops: u32,
    pub min_energy: f64,
    pub energy_sum: f64,
    pub energy_count: u32,
    pub from: NodeId,
}

impl ForwardSoldier {
    pub fn avg_energy(&self) -> f64 {
        self.energy_sum / self.energy_count.max(1) as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BackwardSoldier {
    pub sink: NodeId,
    pub path: PathId,
    pub reward: f64,
    pub soldier: SoldierId,
    pub from: NodeId,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Worker {
    pub path: PathId,
    pub payload: AppEvent,
    pub hops: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Beacon {
    pub sink: NodeId,
    pub path: PathId,
}

#[derive(Debug, Clone, PartialEq)]
pub enum TermiteBody {
    Forward(ForwardSoldier),
    Backward(BackwardSoldier),
    Worker(Worker),
    Beacon(Beacon),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TermitePacket {
    pub bits: u32,
    pub body: TermiteBody,
}

impl Packet for TermitePacket {
    fn size_bits(&self) -> u32 {
        self.bits
    }

    fn kind(&self) -> &'static str {
        match self.body {
            TermiteBody::Forward(_) => "fs",
            TermiteBody::Backward(_) => "bs",
            TermiteBody::Worker(_) => "worker",
            TermiteBody::Beacon(_) => "beacon",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum TermiteTimer {
    DiscoveryTimeout(SoldierId),
    SinkReply(SoldierId),
}

/// Whether a relay keeps propagating a soldier it has seen.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SoldierFlag {
    Forwarded,
    Deleted,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SoldierCacheEntry {
    /// Best predecessor seen so far; the backward soldier returns through it.
    pub from: NodeId,
    pub flag: SoldierFlag,
    pub reward: f64,
    pub matched: bool,
    pub created: SimTime,
}

#[derive(Debug, Clone, PartialEq)]
struct SinkPending {
    best_from: NodeId,
    best_reward: f64,
    replied: bool,
    created: SimTime,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Discovery {
    soldier: SoldierId,
    attempt: u32,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Adopted {
    path: PathId,
    via: NodeId,
    expires: SimTime,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct CachedEvent {
    event: AppEvent,
    hops: u32,
}

#[derive(Debug, Clone)]
pub struct NodeRouting {
    pub table: PheromoneTable<f64>,
    /// First hop of each established own path.
    pub paths: BTreeMap<NodeId, PathId>,
    /// Next hop toward the sink per path id.
    pub forwarding: BTreeMap<PathId, NodeId>,
    pub soldiers: HashMap<SoldierId, SoldierCacheEntry>,
    cache: VecDeque<CachedEvent>,
    discovery: Option<Discovery>,
    adopted: Option<Adopted>,
    sink_pending: HashMap<SoldierId, SinkPending>,
    next_soldier: u64,
}

impl NodeRouting {
    fn new(limits: PheromoneLimits<f64>) -> Self {
        Self {
            table: PheromoneTable::new(limits).expect("limits validated"),
            paths: BTreeMap::new(),
            forwarding: BTreeMap::new(),
            soldiers: HashMap::new(),
            cache: VecDeque::new(),
            discovery: None,
            adopted: None,
            sink_pending: HashMap::new(),
            next_soldier: 0,
        }
    }

    pub fn cached_events(&self) -> usize {
        self.cache.len()
    }

    pub fn discovering(&self) -> bool {
        self.discovery.is_some()
    }

    fn forget_neighbor(&mut self, n: NodeId) {
        self.table.remove_neighbor(n);
        self.paths.remove(&n);
        self.forwarding.retain(|_, &mut hop| hop != n);
        if self.adopted.is_some_and(|a| a.via == n) {
            self.adopted = None;
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TermiteCounters {
    pub discoveries: u64,
    pub fs_rebroadcasts: u64,
    /// Rebroadcasts of soldiers that had already exceeded the hop threshold.
    pub fs_rebroadcasts_beyond_hmax: u64,
    pub bs_sent: u64,
    pub bs_forwarded: u64,
    pub reward_clamps: u64,
    pub workers_sent: u64,
    pub route_failures: u64,
    pub beacons: u64,
}

#[derive(Debug, Clone)]
pub struct TermiteHill {
    params: TermiteParams,
    nodes: Vec<NodeRouting>,
    next_path: PathId,
    pub counters: TermiteCounters,
}

enum Route {
    Own { first_hop: NodeId, path: PathId },
    Adopted { via: NodeId, path: PathId },
}

impl Route {
    fn hop_and_path(&self) -> (NodeId, PathId) {
        match *self {
            Route::Own { first_hop, path } => (first_hop, path),
            Route::Adopted { via, path } => (via, path),
        }
    }
}

type Ln<'a> = dyn Link<TermitePacket, TermiteTimer> + 'a;

impl TermiteHill {
    pub fn new(params: TermiteParams, node_count: usize) -> Result<Self, String> {
        params.validate()?;
        let nodes = (0..node_count)
            .map(|_| NodeRouting::new(params.limits))
            .collect();
        Ok(Self {
            params,
            nodes,
            next_path: 0,
            counters: TermiteCounters::default(),
        })
    }

    pub fn params(&self) -> &TermiteParams {
        &self.params
    }

    pub fn node(&self, n: NodeId) -> &NodeRouting {
        &self.nodes[n]
    }

    pub fn node_mut(&mut self, n: NodeId) -> &mut NodeRouting {
        &mut self.nodes[n]
    }

    fn packet(&self, body: TermiteBody) -> TermitePacket {
        let s = &self.params.sizes;
        let bytes = match body {
            TermiteBody::Forward(_) => s.forward_soldier,
            TermiteBody::Backward(_) => s.backward_soldier,
            TermiteBody::Worker(_) => s.worker,
            TermiteBody::Beacon(_) => s.beacon,
        };
        TermitePacket {
            bits: bytes * 8,
            body,
        }
    }

    fn reward(&mut self, link: &Ln<'_>, min_energy: f64, avg_energy: f64, visited: u32) -> f64 {
        let k = self.params.reward_energy_scale;
        let n = link.node_count() as f64;
        let e = link.initial_energy() * k;
        let r = compute_reward(
            &RewardInputs {
                network_size: n,
                initial_energy: e,
                min_energy: min_energy * k,
                avg_energy: avg_energy * k,
                visited: visited as f64,
            },
            default_gamma_max(self.params.gamma_max_factor, n, e),
        );
        if let Reward::Clamped(_) = r {
            self.counters.reward_clamps += 1;
        }
        r.value()
    }

    fn choose_route(&self, link: &mut Ln<'_>, node: NodeId) -> Option<Route> {
        let st = &self.nodes[node];
        let sink = link.sink();
        if !st.paths.is_empty() {
            if let Ok(row) =
                route_probabilities(&st.table, sink, self.params.alpha, self.params.beta)
            {
                let first_hop = row.sample(link.rng());
                if let Some(&path) = st.paths.get(&first_hop) {
                    return Some(Route::Own { first_hop, path });
                }
            }
        }
        match st.adopted {
            Some(a) if a.expires > link.now() => Some(Route::Adopted {
                via: a.via,
                path: a.path,
            }),
            _ => None,
        }
    }

    fn send_worker(
        &mut self,
        link: &mut Ln<'_>,
        node: NodeId,
        route: Route,
        event: AppEvent,
        hops: u32,
    ) {
        let (hop, path) = route.hop_and_path();
        self.counters.workers_sent += 1;
        let pkt = self.packet(TermiteBody::Worker(Worker {
            path,
            payload: event,
            hops: hops + 1,
        }));
        link.unicast(node, hop, pkt);
    }

    fn enqueue(&mut self, link: &mut Ln<'_>, node: NodeId, event: AppEvent, hops: u32) {
        let cap = self.params.event_cache_capacity;
        let st = &mut self.nodes[node];
        let dropped = if st.cache.len() >= cap {
            st.cache.pop_front()
        } else {
            None
        };
        st.cache.push_back(CachedEvent { event, hops });
        if let Some(old) = dropped {
            link.discard(node, &old.event, "cache-overflow");
        }
    }

    fn drain(&mut self, link: &mut Ln<'_>, node: NodeId) {
        while let Some(c) = self.nodes[node].cache.pop_front() {
            match self.choose_route(link, node) {
                Some(route) => self.send_worker(link, node, route, c.event, c.hops),
                None => {
                    self.nodes[node].cache.push_front(c);
                    break;
                }
            }
        }
    }

    fn launch_discovery(&mut self, link: &mut Ln<'_>, node: NodeId, attempt: u32) {
        let st = &mut self.nodes[node];
        let id = SoldierId {
            source: node,
            seq: st.next_soldier,
        };
        st.next_soldier += 1;
        st.discovery = Some(Discovery {
            soldier: id,
            attempt,
        });
        let e = link.energy(node);
        self.counters.discoveries += 1;
        link.note(
            node,
            "discover",
            format_args!("soldier={} attempt={attempt}", id.seq),
        );
        let pkt = self.packet(TermiteBody::Forward(ForwardSoldier {
            id,
            hops: 0,
            min_energy: e,
            energy_sum: e,
            energy_count: 1,
            from: node,
        }));
        link.broadcast(node, pkt);
        link.set_timer(
            node,
            self.params.discovery_timeout,
            TermiteTimer::DiscoveryTimeout(id),
        );
    }

    fn ensure_discovery(&mut self, link: &mut Ln<'_>, node: NodeId) {
        if self.nodes[node].discovery.is_none() {
            self.launch_discovery(link, node, 0);
        }
    }

    /// Handles a forward soldier at `node`.
    pub fn on_forward_soldier(&mut self, link: &mut Ln<'_>, node: NodeId, fs: ForwardSoldier) {
        if fs.id.source == node {
            return;
        }
        let now = link.now();
        if link.is_sink(node) {
            let reward = self.reward(link, fs.min_energy, fs.avg_energy(), fs.hops);
            let window = self.params.sink_reply_window;
            let st = &mut self.nodes[node];
            match st.sink_pending.get_mut(&fs.id) {
                None => {
                    st.sink_pending.insert(
                        fs.id,
                        SinkPending {
                            best_from: fs.from,
                            best_reward: reward,
                            replied: false,
                            created: now,
                        },
                    );
                    if window > 0.0 {
                        link.set_timer(node, window, TermiteTimer::SinkReply(fs.id));
                    } else {
                        self.sink_reply(link, node, fs.id);
                    }
                }
                Some(p) if !p.replied && reward > p.best_reward => {
                    p.best_from = fs.from;
                    p.best_reward = reward;
                }
                Some(_) => {}
            }
            return;
        }

        let energy = link.energy(node);
        let hops = fs.hops + 1;
        let min_energy = fs.min_energy.min(energy);
        let energy_sum = fs.energy_sum + energy;
        let energy_count = fs.energy_count + 1;
        let reward = self.reward(link, min_energy, energy_sum / energy_count as f64, hops);

        if let Some(entry) = self.nodes[node].soldiers.get_mut(&fs.id) {
            if entry.flag == SoldierFlag::Forwarded && !entry.matched && reward > entry.reward {
                entry.from = fs.from;
                entry.reward = reward;
            }
            return;
        }

        let beyond = hops > self.params.hmax;
        let forward = !beyond || link.rng().gen_bool(self.params.p_sf);
        self.nodes[node].soldiers.insert(
            fs.id,
            SoldierCacheEntry {
                from: fs.from,
                flag: if forward {
                    SoldierFlag::Forwarded
                } else {
                    SoldierFlag::Deleted
                },
                reward,
                matched: false,
                created: now,
            },
        );
        if forward {
            self.counters.fs_rebroadcasts += 1;
            if beyond {
                self.counters.fs_rebroadcasts_beyond_hmax += 1;
            }
            let pkt = self.packet(TermiteBody::Forward(ForwardSoldier {
                id: fs.id,
                hops,
                min_energy,
                energy_sum,
                energy_count,
                from: node,
            }));
            link.broadcast(node, pkt);
        }
    }

    fn sink_reply(&mut self, link: &mut Ln<'_>, node: NodeId, id: SoldierId) {
        let Some(p) = self.nodes[node].sink_pending.get_mut(&id) else {
            return;
        };
        if p.replied {
            return;
        }
        p.replied = true;
        let (to, reward) = (p.best_from, p.best_reward);
        let path = self.next_path;
        self.next_path += 1;
        self.counters.bs_sent += 1;
        link.note(
            node,
            "bs",
            format_args!(
                "soldier={}:{} path={path} reward={reward:.6} to={to}",
                id.source, id.seq
            ),
        );
        let pkt = self.packet(TermiteBody::Backward(BackwardSoldier {
            sink: node,
            path,
            reward,
            soldier: id,
            from: node,
        }));
        link.unicast(node, to, pkt);
    }

    /// Handles a backward soldier arriving at `node` from `from`.
    pub fn on_backward_soldier(
        &mut self,
        link: &mut Ln<'_>,
        node: NodeId,
        from: NodeId,
        bs: BackwardSoldier,
    ) {
        if bs.soldier.source == node {
            let st = &mut self.nodes[node];
            st.table.add_neighbor(from);
            st.table
                .deposit(from, bs.sink, bs.reward)
                .expect("row was just added and reward is finite");
            st.paths.insert(from, bs.path);
            st.forwarding.insert(bs.path, from);
            if st.discovery.is_some_and(|d| d.soldier == bs.soldier) {
                st.discovery = None;
            }
            link.note(
                node,
                "route",
                format_args!("path={} via={from} reward={:.6}", bs.path, bs.reward),
            );
            if self.params.beacon_adoption {
                self.counters.beacons += 1;
                let pkt = self.packet(TermiteBody::Beacon(Beacon {
                    sink: bs.sink,
                    path: bs.path,
                }));
                link.broadcast(node, pkt);
            }
            self.drain(link, node);
            return;
        }
        let st = &mut self.nodes[node];
        let Some(entry) = st.soldiers.get_mut(&bs.soldier) else {
            link.note(node, "bs-orphan", format_args!("path={}", bs.path));
            return;
        };
        if entry.flag != SoldierFlag::Forwarded || entry.matched {
            return;
        }
        entry.matched = true;
        let back = entry.from;
        st.forwarding.insert(bs.path, from);
        self.counters.bs_forwarded += 1;
        let pkt = self.packet(TermiteBody::Backward(BackwardSoldier { from: node, ..bs }));
        link.unicast(node, back, pkt);
    }

    /// Handles a worker packet arriving at `node`.
    pub fn on_worker(&mut self, link: &mut Ln<'_>, node: NodeId, w: Worker) {
        if link.is_sink(node) {
            link.deliver(node, &w.payload);
            return;
        }
        if w.hops >= self.params.max_worker_hops {
            link.discard(node, &w.payload, "hop-limit");
            return;
        }
        if let Some(&next) = self.nodes[node].forwarding.get(&w.path) {
            let pkt = self.packet(TermiteBody::Worker(Worker {
                hops: w.hops + 1,
                ..w
            }));
            link.unicast(node, next, pkt);
            return;
        }
        self.counters.route_failures += 1;
        link.note(node, "route-failure", format_args!("path={}", w.path));
        match self.params.relay_miss {
            RelayMiss::Hold => {
                self.enqueue(link, node, w.payload, w.hops);
                self.ensure_discovery(link, node);
            }
            RelayMiss::Reroute if let Some(route) = self.choose_route(link, node) => {
                self.send_worker(link, node, route, w.payload, w.hops);
            }
            RelayMiss::Drop | RelayMiss::Reroute => {
                link.discard(node, &w.payload, "no-forwarding-entry");
                self.ensure_discovery(link, node);
            }
        }
    }

    fn on_beacon(&mut self, link: &mut Ln<'_>, node: NodeId, from: NodeId, b: Beacon) {
        if !self.params.beacon_adoption || link.is_sink(node) {
            return;
        }
        let expires = link.now() + self.params.beacon_ttl;
        self.nodes[node].adopted = Some(Adopted {
            path: b.path,
            via: from,
            expires,
        });
        if !self.nodes[node].cache.is_empty() {
            self.drain(link, node);
        }
    }
}

impl Protocol for TermiteHill {
    type Packet = TermitePacket;
    type Timer = TermiteTimer;

    fn name(&self) -> &'static str {
        "termite-hill"
    }

    fn decay_period(&self) -> Option<SimTime> {
        Some(self.params.decay_period)
    }

    fn on_app_event(&mut self, link: &mut Ln<'_>, node: NodeId, event: AppEvent) {
        match self.choose_route(link, node) {
            Some(route) => self.send_worker(link, node, route, event, 0),
            None => {
                self.enqueue(link, node, event, 0);
                self.ensure_discovery(link, node);
            }
        }
    }

    fn on_packet(&mut self, link: &mut Ln<'_>, node: NodeId, from: NodeId, packet: TermitePacket) {
        match packet.body {
            TermiteBody::Forward(fs) => self.on_forward_soldier(link, node, fs),
            TermiteBody::Backward(bs) => self.on_backward_soldier(link, node, from, bs),
            TermiteBody::Worker(w) => self.on_worker(link, node, w),
            TermiteBody::Beacon(b) => self.on_beacon(link, node, from, b),
        }
    }

    fn on_decay_tick(&mut self, link: &mut Ln<'_>) {
        let now = link.now();
        let sink = link.sink();
        let ttl = self.params.soldier_cache_ttl;
        let law = self.params.evaporation;
        for st in &mut self.nodes {
            if !st.table.is_empty() {
                st.table.evaporate(&law);
                st.table.prune_decayed(&[]);
                let table = &st.table;
                let dropped: Vec<(NodeId, PathId)> = st
                    .paths
                    .iter()
                    .filter(|(&r, _)| table.get(r, sink).is_none())
                    .map(|(&r, &p)| (r, p))
                    .collect();
                for (r, p) in dropped {
                    st.paths.remove(&r);
                    st.forwarding.remove(&p);
                }
            }
            st.soldiers.retain(|_, e| now - e.created < ttl);
            st.sink_pending.retain(|_, p| now - p.created < ttl);
            if st.adopted.is_some_and(|a| a.expires <= now) {
                st.adopted = None;
            }
        }
    }

    fn on_mac_failure(
        &mut self,
        link: &mut Ln<'_>,
        node: NodeId,
        dest: NodeId,
        packet: TermitePacket,
    ) {
        self.nodes[node].forget_neighbor(dest);
        link.note(
            node,
            "link-lost",
            format_args!("neighbor={dest} kind={}", packet.kind()),
        );
        if let TermiteBody::Worker(w) = packet.body {
            if w.hops >= self.params.max_worker_hops {
                link.discard(node, &w.payload, "hop-limit");
                return;
            }
            self.enqueue(link, node, w.payload, w.hops);
            self.drain(link, node);
            if !self.nodes[node].cache.is_empty() {
                self.ensure_discovery(link, node);
            }
        }
    }

    fn on_timer(&mut self, link: &mut Ln<'_>, node: NodeId, timer: TermiteTimer) {
        match timer {
            TermiteTimer::SinkReply(id) => self.sink_reply(link, node, id),
            TermiteTimer::DiscoveryTimeout(id) => {
                let Some(d) = self.nodes[node].discovery else {
                    return;
                };
                if d.soldier != id {
                    return;
                }
                self.nodes[node].discovery = None;
                self.drain(link, node);
                if !self.nodes[node].cache.is_empty() && d.attempt < self.params.discovery_retries {
                    self.launch_discovery(link, node, d.attempt + 1);
                }
            }
        }
    }

    fn dump_tables(&self, node: NodeId) -> Vec<String> {
        let st = &self.nodes[node];
        let mut out = Vec::new();
        for d in st.table.destinations() {
            for (n, v) in st.table.column(d).unwrap_or_default() {
                out.push(format!("pheromone neighbor={n} dest={d} value={v:.6}"));
            }
            if let Ok(row) = route_probabilities(&st.table, d, self.params.alpha, self.params.beta)
            {
                for (n, p) in row.entries {
                    out.push(format!("probability neighbor={n} dest={d} p={p:.6}"));
                }
            }
        }
        for (p, n) in &st.forwarding {
            out.push(format!("forwarding path={p} next={n}"));
        }
        out
    }
}

impl fmt::Display for TermiteCounters {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "discoveries={} fs_rebroadcasts={} bs_sent={} bs_forwarded={} workers={} route_failures={} clamps={}",
            self.discoveries,
            self.fs_rebroadcasts,
            self.bs_sent,
            self.bs_forwarded,
            self.workers_sent,
            self.route_failures,
            self.reward_clamps
        )
    }
}
