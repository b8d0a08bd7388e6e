//! Drives one simulation run: traffic generation, sink motion, periodic ticks,
//! and dispatch of radio frames to the routing protocol.

use std::collections::HashSet;
use std::fmt;

use rand::{Rng, RngCore};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::net::{
    place_nodes, Energy, NetError, Network, NetworkConfig, NodeId, PlacementPolicy, Position, Role,
    Trace, UnicastOutcome,
};
use crate::protocol::{AppEvent, EventId, Link, Packet, Protocol};
use crate::sim::{EventQueue, RngStreams, SimTime, StreamId};
use crate::trace_event;

#[derive(Debug, Error)]
pub enum SimError {
    #[error(transparent)]
    Net(#[from] NetError),
    #[error("invalid simulation configuration: {0}")]
    Config(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SinkMode {
    Static,
    /// The sink jumps to a uniform random point every `t_change` seconds.
    Dynamic {
        t_change: SimTime,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub enum SourceSet {
    /// Every node except the sink.
    AllSensors,
    List(Vec<NodeId>),
}

#[derive(Debug, Clone)]
pub struct SimConfig {
    pub network: NetworkConfig,
    pub nodes: usize,
    pub placement: PlacementPolicy,
    pub sink_position: Position,
    pub sink_mode: SinkMode,
    /// Events per second per source; 0 disables generated traffic.
    pub traffic_rate: f64,
    pub sources: SourceSet,
    pub duration: SimTime,
    pub sample_period: SimTime,
}

impl Default for SimConfig {
    fn default() -> Self {
        let network = NetworkConfig::default();
        Self {
            sink_position: network.area.center(),
            network,
            nodes: 100,
            placement: PlacementPolicy::Connected {
                max_attempts: 100_000,
            },
            sink_mode: SinkMode::Static,
            traffic_rate: 0.1,
            sources: SourceSet::AllSensors,
            duration: 360.0,
            sample_period: 10.0,
        }
    }
}

/// Periodic snapshot taken by the metric-sample tick.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricSample {
    pub time: SimTime,
    pub consumed: Energy,
    pub ledger_total: Energy,
    pub generated: u64,
    pub delivered: u64,
}

#[derive(Debug, Default, Clone)]
pub struct RunStats {
    pub generated: u64,
    pub generated_per_source: Vec<u64>,
    delivered: HashSet<EventId>,
    pub duplicate_deliveries: u64,
    pub latency_sum: f64,
    pub discarded: u64,
    pub relocations: u64,
    pub mac_failures: u64,
    pub samples: Vec<MetricSample>,
}

impl RunStats {
    pub fn delivered(&self) -> u64 {
        self.delivered.len() as u64
    }

    pub fn was_delivered(&self, id: &EventId) -> bool {
        self.delivered.contains(id)
    }

    pub fn mean_latency(&self) -> Option<f64> {
        (!self.delivered.is_empty()).then(|| self.latency_sum / self.delivered.len() as f64)
    }
}

enum Ev<P: Protocol> {
    Arrival {
        to: NodeId,
        from: NodeId,
        packet: P::Packet,
    },
    MacFailure {
        node: NodeId,
        dest: NodeId,
        packet: P::Packet,
    },
    Timer {
        node: NodeId,
        timer: P::Timer,
    },
    AppEvent {
        source: NodeId,
    },
    TrafficTick {
        source: NodeId,
    },
    DecayTick,
    SinkMove,
    IdleTick,
    MetricSample,
}

pub struct Simulation<P: Protocol> {
    queue: EventQueue<Ev<P>>,
    net: Network,
    protocol: P,
    cfg: SimConfig,
    seed: u64,
    radio_rng: ChaCha8Rng,
    protocol_rng: ChaCha8Rng,
    traffic_rng: ChaCha8Rng,
    motion_rng: ChaCha8Rng,
    next_seq: Vec<u64>,
    stats: RunStats,
    started: bool,
}

impl<P: Protocol> fmt::Debug for Simulation<P> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Simulation")
            .field("protocol", &self.protocol.name())
            .field("seed", &self.seed)
            .field("clock", &self.queue.clock())
            .finish()
    }
}

impl<P: Protocol> Simulation<P> {
    /// Builds a run with seeded random placement (node 0 is the sink).
    pub fn new(cfg: SimConfig, protocol: P, seed: u64) -> Result<Self, SimError> {
        let streams = RngStreams::new(seed);
        let mut placement_rng = streams.stream(StreamId::Placement);
        let positions = place_nodes(
            cfg.nodes,
            cfg.network.area,
            cfg.sink_position,
            cfg.network.radio.range,
            cfg.placement,
            &mut placement_rng,
        )?;
        Self::with_positions(cfg, &positions, protocol, seed)
    }

    /// Builds a run on explicit positions; index 0 is the sink.
    pub fn with_positions(
        mut cfg: SimConfig,
        positions: &[Position],
        protocol: P,
        seed: u64,
    ) -> Result<Self, SimError> {
        if !(cfg.duration > 0.0) {
            return Err(SimError::Config("duration must be > 0".into()));
        }
        if !(cfg.traffic_rate >= 0.0 && cfg.traffic_rate.is_finite()) {
            return Err(SimError::Config("traffic rate must be >= 0".into()));
        }
        if let SinkMode::Dynamic { t_change } = cfg.sink_mode {
            if !(t_change > 0.0) {
                return Err(SimError::Config("t_change must be > 0".into()));
            }
        }
        if let SourceSet::List(list) = &cfg.sources {
            if let Some(&bad) = list.iter().find(|&&s| s == 0 || s >= positions.len()) {
                return Err(SimError::Config(format!("invalid source node {bad}")));
            }
        }
        cfg.nodes = positions.len();
        let net = Network::new(&cfg.network, positions, 0)?;
        let streams = RngStreams::new(seed);
        Ok(Self {
            queue: EventQueue::new(),
            next_seq: vec![0; positions.len()],
            stats: RunStats {
                generated_per_source: vec![0; positions.len()],
                ..RunStats::default()
            },
            net,
            protocol,
            cfg,
            seed,
            radio_rng: streams.stream(StreamId::Radio),
            protocol_rng: streams.stream(StreamId::Protocol),
            traffic_rng: streams.stream(StreamId::Traffic),
            motion_rng: streams.stream(StreamId::SinkMotion),
            started: false,
        })
    }

    pub fn set_trace(&mut self, trace: Trace) {
        self.net.trace = trace;
    }

    pub fn take_trace(&mut self) -> Trace {
        std::mem::take(&mut self.net.trace)
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn config(&self) -> &SimConfig {
        &self.cfg
    }

    pub fn network(&self) -> &Network {
        &self.net
    }

    pub fn network_mut(&mut self) -> &mut Network {
        &mut self.net
    }

    pub fn protocol(&self) -> &P {
        &self.protocol
    }

    pub fn protocol_mut(&mut self) -> &mut P {
        &mut self.protocol
    }

    pub fn stats(&self) -> &RunStats {
        &self.stats
    }

    pub fn clock(&self) -> SimTime {
        self.queue.clock()
    }

    /// Schedules a single application event at `source` at absolute time `at`.
    pub fn inject_event(&mut self, at: SimTime, source: NodeId) {
        self.queue
            .schedule(at, Ev::AppEvent { source })
            .expect("injected event in the past");
    }

    fn sources(&self) -> Vec<NodeId> {
        match &self.cfg.sources {
            SourceSet::AllSensors => (0..self.net.len())
                .filter(|&n| n != self.net.sink())
                .collect(),
            SourceSet::List(v) => v.clone(),
        }
    }

    fn start(&mut self) {
        if self.started {
            return;
        }
        self.started = true;
        if self.cfg.traffic_rate > 0.0 {
            let period = 1.0 / self.cfg.traffic_rate;
            for s in self.sources() {
                // First tick in (0, period] so that a run of length k*period yields exactly k events.
                let offset = period * (1.0 - self.traffic_rng.gen::<f64>());
                self.schedule(offset, Ev::TrafficTick { source: s });
            }
        }
        if let Some(p) = self.protocol.decay_period() {
            self.schedule(p, Ev::DecayTick);
        }
        if let SinkMode::Dynamic { t_change } = self.cfg.sink_mode {
            self.schedule(t_change, Ev::SinkMove);
        }
        if self.cfg.network.energy.idle_joules_per_second > 0.0 {
            self.schedule(1.0, Ev::IdleTick);
        }
        if self.cfg.sample_period > 0.0 {
            self.schedule(self.cfg.sample_period, Ev::MetricSample);
        }
        let mut ctx = self.ctx();
        let (proto, link) = ctx.split();
        proto.start(link);
    }

    fn schedule(&mut self, at: SimTime, ev: Ev<P>) {
        self.queue.schedule(at, ev).expect("scheduling in the past");
    }

    fn ctx(&mut self) -> CtxHolder<'_, P> {
        CtxHolder {
            protocol: &mut self.protocol,
            link: Ctx {
                queue: &mut self.queue,
                net: &mut self.net,
                radio_rng: &mut self.radio_rng,
                protocol_rng: &mut self.protocol_rng,
                stats: &mut self.stats,
            },
        }
    }

    /// Runs until the configured duration.
    pub fn run(&mut self) -> SimTime {
        let d = self.cfg.duration;
        self.run_until(d)
    }

    /// Dispatches every event with time `<= until`.
    pub fn run_until(&mut self, until: SimTime) -> SimTime {
        self.start();
        while let Some(ev) = self.queue.pop_until(until) {
            self.dispatch(ev.payload);
        }
        if until > self.queue.clock() {
            // Advance the clock to the horizon through an empty pass.
            self.queue.run(until, |_, _| {
                unreachable!("queue already drained up to horizon")
            });
        }
        self.queue.clock()
    }

    fn dispatch(&mut self, ev: Ev<P>) {
        let now = self.queue.clock();
        match ev {
            Ev::Arrival { to, from, packet } => {
                if self.net.receive(now, to, from, packet.size_bits()) {
                    let mut ctx = self.ctx();
                    let (proto, link) = ctx.split();
                    proto.on_packet(link, to, from, packet);
                }
            }
            Ev::MacFailure { node, dest, packet } => {
                self.stats.mac_failures += 1;
                if self.net.is_alive(node) {
                    let mut ctx = self.ctx();
                    let (proto, link) = ctx.split();
                    proto.on_mac_failure(link, node, dest, packet);
                }
            }
            Ev::Timer { node, timer } => {
                if self.net.is_alive(node) {
                    let mut ctx = self.ctx();
                    let (proto, link) = ctx.split();
                    proto.on_timer(link, node, timer);
                }
            }
            Ev::AppEvent { source } => self.generate(source),
            Ev::TrafficTick { source } => {
                if self.net.is_alive(source) {
                    self.generate(source);
                    let period = 1.0 / self.cfg.traffic_rate;
                    self.schedule(now + period, Ev::TrafficTick { source });
                }
            }
            Ev::DecayTick => {
                let mut ctx = self.ctx();
                let (proto, link) = ctx.split();
                proto.on_decay_tick(link);
                if let Some(p) = self.protocol.decay_period() {
                    self.schedule(now + p, Ev::DecayTick);
                }
            }
            Ev::SinkMove => {
                self.net.relocate_sink(now, &mut self.motion_rng);
                self.stats.relocations += 1;
                let mut ctx = self.ctx();
                let (proto, link) = ctx.split();
                proto.on_topology_change(link);
                if let SinkMode::Dynamic { t_change } = self.cfg.sink_mode {
                    self.schedule(now + t_change, Ev::SinkMove);
                }
            }
            Ev::IdleTick => {
                self.net.charge_idle(now, 1.0);
                self.schedule(now + 1.0, Ev::IdleTick);
            }
            Ev::MetricSample => {
                self.stats.samples.push(MetricSample {
                    time: now,
                    consumed: self.net.total_energy_consumed(),
                    ledger_total: self.net.ledger().total,
                    generated: self.stats.generated,
                    delivered: self.stats.delivered(),
                });
                self.schedule(now + self.cfg.sample_period, Ev::MetricSample);
            }
        }
    }

    fn generate(&mut self, source: NodeId) {
        let now = self.queue.clock();
        let Ok(node) = self.net.node(source) else {
            return;
        };
        if !node.alive || node.role == Role::Sink {
            return;
        }
        let seq = self.next_seq[source];
        self.next_seq[source] += 1;
        self.stats.generated += 1;
        self.stats.generated_per_source[source] += 1;
        let event = AppEvent {
            id: EventId { source, seq },
            generated_at: now,
        };
        trace_event!(self.net.trace, now, "generate", Some(source), "seq={seq}");
        let mut ctx = self.ctx();
        let (proto, link) = ctx.split();
        proto.on_app_event(link, source, event);
    }

    /// Writes every node's routing tables to the trace.
    pub fn dump_tables(&mut self) {
        if !self.net.trace.enabled() {
            return;
        }
        let now = self.queue.clock();
        for n in 0..self.net.len() {
            for line in self.protocol.dump_tables(n) {
                trace_event!(self.net.trace, now, "table", Some(n), "{line}");
            }
        }
    }
}

struct CtxHolder<'a, P: Protocol> {
    protocol: &'a mut P,
    link: Ctx<'a, P>,
}

impl<'a, P: Protocol> CtxHolder<'a, P> {
    fn split(&mut self) -> (&mut P, &mut dyn Link<P::Packet, P::Timer>) {
        (&mut *self.protocol, &mut self.link)
    }
}

struct Ctx<'a, P: Protocol> {
    queue: &'a mut EventQueue<Ev<P>>,
    net: &'a mut Network,
    radio_rng: &'a mut ChaCha8Rng,
    protocol_rng: &'a mut ChaCha8Rng,
    stats: &'a mut RunStats,
}

impl<'a, P: Protocol> Link<P::Packet, P::Timer> for Ctx<'a, P> {
    fn now(&self) -> SimTime {
        self.queue.clock()
    }

    fn node_count(&self) -> usize {
        self.net.len()
    }

    fn sink(&self) -> NodeId {
        self.net.sink()
    }

    fn energy(&self, node: NodeId) -> f64 {
        self.net
            .node(node)
            .map(|n| n.energy.joules())
            .unwrap_or(0.0)
    }

    fn initial_energy(&self) -> f64 {
        self.net
            .nodes()
            .iter()
            .find(|n| n.role == Role::Source)
            .map(|n| n.initial_energy.joules())
            .unwrap_or(0.0)
    }

    fn broadcast(&mut self, from: NodeId, packet: P::Packet) -> usize {
        let now = self.queue.clock();
        let receivers = self
            .net
            .broadcast(now, from, packet.size_bits(), &mut *self.radio_rng)
            .expect("broadcast from unknown node");
        let n = receivers.len();
        for (to, at) in receivers {
            self.queue
                .schedule(
                    at,
                    Ev::Arrival {
                        to,
                        from,
                        packet: packet.clone(),
                    },
                )
                .expect("arrival in the past");
        }
        n
    }

    fn unicast(&mut self, from: NodeId, to: NodeId, packet: P::Packet) -> UnicastOutcome {
        let now = self.queue.clock();
        let outcome = self
            .net
            .unicast(now, from, to, packet.size_bits(), &mut *self.radio_rng)
            .expect("unicast to unknown node");
        let ev = match outcome {
            UnicastOutcome::Delivered { arrival, .. } => {
                (arrival, Ev::Arrival { to, from, packet })
            }
            UnicastOutcome::Failed { notify_at, .. } => (
                notify_at,
                Ev::MacFailure {
                    node: from,
                    dest: to,
                    packet,
                },
            ),
        };
        self.queue
            .schedule(ev.0, ev.1)
            .expect("mac event in the past");
        outcome
    }

    fn deliver(&mut self, at: NodeId, event: &AppEvent) {
        let now = self.queue.clock();
        if self.stats.delivered.insert(event.id) {
            self.stats.latency_sum += now - event.generated_at;
            trace_event!(
                self.net.trace,
                now,
                "deliver",
                Some(at),
                "src={} seq={}",
                event.id.source,
                event.id.seq
            );
        } else {
            self.stats.duplicate_deliveries += 1;
        }
    }

    fn discard(&mut self, at: NodeId, event: &AppEvent, reason: &str) {
        self.stats.discarded += 1;
        let now = self.queue.clock();
        trace_event!(
            self.net.trace,
            now,
            "discard",
            Some(at),
            "src={} seq={} reason={reason}",
            event.id.source,
            event.id.seq
        );
    }

    fn set_timer(&mut self, node: NodeId, delay: SimTime, timer: P::Timer) {
        self.queue
            .schedule_in(delay.max(0.0), Ev::Timer { node, timer })
            .expect("timer in the past");
    }

    fn rng(&mut self) -> &mut dyn RngCore {
        &mut *self.protocol_rng
    }

    fn note(&mut self, node: NodeId, kind: &str, detail: fmt::Arguments<'_>) {
        let now = self.queue.clock();
        if self.net.trace.enabled() {
            self.net.trace.record(now, kind, Some(node), detail);
        }
    }
}
