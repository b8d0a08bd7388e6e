//! Nodes, unit-disk radio with Bernoulli frame loss, MAC retransmission, and
//! exact energy accounting.

mod energy;
mod placement;
mod trace;

pub use energy::{ChargeKind, ChargeLedger, Energy, EnergyConfig};
pub use placement::{is_connected, place_nodes, PlacementPolicy};
pub use trace::Trace;

use rand::Rng;
use thiserror::Error;

use crate::sim::SimTime;
use crate::trace_event;

pub type NodeId = usize;

#[derive(Debug, Error, PartialEq)]
pub enum NetError {
    #[error("unknown node id {0}")]
    UnknownNode(NodeId),
    #[error("invalid network configuration: {0}")]
    Config(String),
    #[error("placement failed: {0}")]
    Placement(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Position {
    pub x: f64,
    pub y: f64,
}

impl Position {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: &Position) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Area {
    pub width: f64,
    pub height: f64,
}

impl Area {
    pub fn new(width: f64, height: f64) -> Self {
        Self { width, height }
    }

    pub fn contains(&self, p: &Position) -> bool {
        (0.0..=self.width).contains(&p.x) && (0.0..=self.height).contains(&p.y)
    }

    pub fn center(&self) -> Position {
        Position::new(self.width / 2.0, self.height / 2.0)
    }

    pub fn random_point<R: Rng + ?Sized>(&self, rng: &mut R) -> Position {
        Position::new(
            rng.gen::<f64>() * self.width,
            rng.gen::<f64>() * self.height,
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    Source,
    Sink,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NodeState {
    pub id: NodeId,
    pub position: Position,
    pub energy: Energy,
    pub initial_energy: Energy,
    pub role: Role,
    pub alive: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadioConfig {
    pub range: f64,
    pub delivery_probability: f64,
    /// bits per second
    pub data_rate: f64,
    /// Processing delay added to the serialization time of every hop.
    pub processing_delay: f64,
}

impl Default for RadioConfig {
    fn default() -> Self {
        Self {
            range: 35.0,
            delivery_probability: 0.95,
            data_rate: 250_000.0,
            processing_delay: 0.001,
        }
    }
}

impl RadioConfig {
    pub fn per_hop_latency(&self, size_bits: u32) -> SimTime {
        f64::from(size_bits) / self.data_rate + self.processing_delay
    }

    pub fn validate(&self) -> Result<(), NetError> {
        if !(self.range > 0.0 && self.range.is_finite()) {
            return Err(NetError::Config(format!(
                "range must be > 0, got {}",
                self.range
            )));
        }
        if !(0.0..=1.0).contains(&self.delivery_probability) {
            return Err(NetError::Config(format!(
                "delivery_probability must be in [0, 1], got {}",
                self.delivery_probability
            )));
        }
        if !(self.data_rate > 0.0 && self.data_rate.is_finite()) {
            return Err(NetError::Config(format!(
                "data_rate must be > 0, got {}",
                self.data_rate
            )));
        }
        if !(self.processing_delay >= 0.0 && self.processing_delay.is_finite()) {
            return Err(NetError::Config("processing_delay must be >= 0".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MacConfig {
    pub max_retransmissions: u32,
    pub ack_timeout: SimTime,
}

impl Default for MacConfig {
    fn default() -> Self {
        Self {
            max_retransmissions: 3,
            ack_timeout: 0.01,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Destination {
    Node(NodeId),
    Broadcast,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Frame<P> {
    pub sender: NodeId,
    pub destination: Destination,
    pub size_bits: u32,
    pub payload: P,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum UnicastOutcome {
    Delivered { attempts: u32, arrival: SimTime },
    Failed { attempts: u32, notify_at: SimTime },
}

impl UnicastOutcome {
    pub fn delivered(&self) -> bool {
        matches!(self, UnicastOutcome::Delivered { .. })
    }
}

/// Everything needed to build a [`Network`].
#[derive(Debug, Clone)]
pub struct NetworkConfig {
    pub area: Area,
    pub radio: RadioConfig,
    pub mac: MacConfig,
    pub energy: EnergyConfig,
    pub initial_energy: f64,
    pub sink_initial_energy: f64,
}

impl Default for NetworkConfig {
    fn default() -> Self {
        Self {
            area: Area::new(100.0, 100.0),
            radio: RadioConfig::default(),
            mac: MacConfig::default(),
            energy: EnergyConfig::default(),
            initial_energy: 1.0,
            sink_initial_energy: 1000.0,
        }
    }
}

#[derive(Debug)]
pub struct Network {
    nodes: Vec<NodeState>,
    sink: NodeId,
    area: Area,
    radio: RadioConfig,
    mac: MacConfig,
    energy: EnergyConfig,
    neighbors: Vec<Vec<NodeId>>,
    ledger: ChargeLedger,
    pub trace: Trace,
}

impl Network {
    /// Builds a network from positions. `sink` selects which position hosts the sink.
    pub fn new(
        cfg: &NetworkConfig,
        positions: &[Position],
        sink: NodeId,
    ) -> Result<Self, NetError> {
        cfg.radio.validate()?;
        if !cfg.energy.is_valid() {
            return Err(NetError::Config(
                "energy costs must be finite and >= 0".into(),
            ));
        }
        if !(cfg.initial_energy > 0.0) || !(cfg.sink_initial_energy > 0.0) {
            return Err(NetError::Config("initial energies must be > 0".into()));
        }
        if sink >= positions.len() {
            return Err(NetError::UnknownNode(sink));
        }
        if let Some(p) = positions.iter().find(|p| !cfg.area.contains(p)) {
            return Err(NetError::Config(format!(
                "position ({}, {}) outside area",
                p.x, p.y
            )));
        }
        let nodes = positions
            .iter()
            .enumerate()
            .map(|(id, &position)| {
                let (role, e) = if id == sink {
                    (Role::Sink, cfg.sink_initial_energy)
                } else {
                    (Role::Source, cfg.initial_energy)
                };
                let e = Energy::from_joules(e);
                NodeState {
                    id,
                    position,
                    energy: e,
                    initial_energy: e,
                    role,
                    alive: true,
                }
            })
            .collect();
        let mut net = Self {
            nodes,
            sink,
            area: cfg.area,
            radio: cfg.radio,
            mac: cfg.mac,
            energy: cfg.energy,
            neighbors: Vec::new(),
            ledger: ChargeLedger::default(),
            trace: Trace::disabled(),
        };
        net.refresh_neighbors();
        Ok(net)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn sink(&self) -> NodeId {
        self.sink
    }

    pub fn area(&self) -> Area {
        self.area
    }

    pub fn radio(&self) -> &RadioConfig {
        &self.radio
    }

    pub fn mac(&self) -> &MacConfig {
        &self.mac
    }

    pub fn energy_config(&self) -> &EnergyConfig {
        &self.energy
    }

    pub fn nodes(&self) -> &[NodeState] {
        &self.nodes
    }

    pub fn node(&self, id: NodeId) -> Result<&NodeState, NetError> {
        self.nodes.get(id).ok_or(NetError::UnknownNode(id))
    }

    pub fn is_alive(&self, id: NodeId) -> bool {
        self.nodes.get(id).is_some_and(|n| n.alive)
    }

    /// Alive nodes within range of `node`, excluding itself, in ascending id order.
    pub fn neighbors_of(&self, node: NodeId) -> Result<&[NodeId], NetError> {
        self.neighbors
            .get(node)
            .map(Vec::as_slice)
            .ok_or(NetError::UnknownNode(node))
    }

    pub fn in_range(&self, a: NodeId, b: NodeId) -> bool {
        match (self.nodes.get(a), self.nodes.get(b)) {
            (Some(x), Some(y)) => {
                a != b && x.alive && y.alive && x.position.distance(&y.position) <= self.radio.range
            }
            _ => false,
        }
    }

    fn refresh_neighbors(&mut self) {
        let n = self.nodes.len();
        let mut table = vec![Vec::new(); n];
        for a in 0..n {
            if !self.nodes[a].alive {
                continue;
            }
            for b in (a + 1)..n {
                if self.nodes[b].alive
                    && self.nodes[a].position.distance(&self.nodes[b].position) <= self.radio.range
                {
                    table[a].push(b);
                    table[b].push(a);
                }
            }
        }
        self.neighbors = table;
    }

    /// Deducts up to `amount` from `node`; returns the energy actually removed.
    pub fn charge(
        &mut self,
        now: SimTime,
        node: NodeId,
        kind: ChargeKind,
        amount: Energy,
    ) -> Energy {
        let Some(state) = self.nodes.get_mut(node) else {
            return Energy::ZERO;
        };
        if !state.alive || amount.is_zero() {
            return Energy::ZERO;
        }
        let applied = amount.min(state.energy);
        state.energy = state.energy - applied;
        self.ledger.record(kind, applied);
        trace_event!(
            self.trace,
            now,
            "charge",
            Some(node),
            "kind={} pj={}",
            kind.label(),
            applied.picojoules()
        );
        if state.energy.is_zero() {
            state.alive = false;
            trace_event!(self.trace, now, "death", Some(node), "");
            self.refresh_neighbors();
        }
        applied
    }

    /// Charges the idle cost of `seconds` to every alive node.
    pub fn charge_idle(&mut self, now: SimTime, seconds: f64) {
        let cost = self.energy.idle_cost(seconds);
        if cost.is_zero() {
            return;
        }
        for id in 0..self.nodes.len() {
            self.charge(now, id, ChargeKind::Idle, cost);
        }
    }

    /// Sends one frame to every neighbor. Each neighbor independently receives it with
    /// the delivery probability. Returns `(receiver, arrival_time)` pairs.
    pub fn broadcast<R: Rng + ?Sized>(
        &mut self,
        now: SimTime,
        sender: NodeId,
        size_bits: u32,
        rng: &mut R,
    ) -> Result<Vec<(NodeId, SimTime)>, NetError> {
        let state = self.node(sender)?;
        if !state.alive {
            trace_event!(
                self.trace,
                now,
                "drop",
                Some(sender),
                "reason=dead-sender dst=broadcast"
            );
            return Ok(Vec::new());
        }
        let candidates = self.neighbors[sender].clone();
        let cost = self.energy.tx_cost(size_bits);
        self.charge(now, sender, ChargeKind::Tx, cost);
        let arrival = now + self.radio.per_hop_latency(size_bits);
        trace_event!(
            self.trace,
            now,
            "tx",
            Some(sender),
            "dst=broadcast bits={size_bits}"
        );
        let p = self.radio.delivery_probability;
        let mut out = Vec::with_capacity(candidates.len());
        for r in candidates {
            if rng.gen_bool(p) {
                out.push((r, arrival));
            } else {
                trace_event!(self.trace, now, "loss", Some(r), "from={sender}");
            }
        }
        Ok(out)
    }

    /// Unicast with up to `1 + max_retransmissions` attempts. Each attempt succeeds with the
    /// delivery probability when the destination is alive and in range.
    pub fn unicast<R: Rng + ?Sized>(
        &mut self,
        now: SimTime,
        sender: NodeId,
        dest: NodeId,
        size_bits: u32,
        rng: &mut R,
    ) -> Result<UnicastOutcome, NetError> {
        self.node(dest)?;
        let state = self.node(sender)?;
        let latency = self.radio.per_hop_latency(size_bits);
        let slot = latency + self.mac.ack_timeout;
        if !state.alive {
            trace_event!(
                self.trace,
                now,
                "drop",
                Some(sender),
                "reason=dead-sender dst={dest}"
            );
            return Ok(UnicastOutcome::Failed {
                attempts: 0,
                notify_at: now,
            });
        }
        let cost = self.energy.tx_cost(size_bits);
        let max_attempts = 1 + self.mac.max_retransmissions;
        let mut attempts = 0;
        while attempts < max_attempts {
            if !self.nodes[sender].alive {
                break;
            }
            attempts += 1;
            self.charge(now, sender, ChargeKind::Tx, cost);
            trace_event!(
                self.trace,
                now,
                "tx",
                Some(sender),
                "dst={dest} bits={size_bits} attempt={attempts}"
            );
            if self.in_range(sender, dest) && rng.gen_bool(self.radio.delivery_probability) {
                let arrival = now + f64::from(attempts - 1) * slot + latency;
                return Ok(UnicastOutcome::Delivered { attempts, arrival });
            }
        }
        trace_event!(
            self.trace,
            now,
            "drop",
            Some(sender),
            "reason=mac-failure dst={dest} attempts={attempts}"
        );
        Ok(UnicastOutcome::Failed {
            attempts,
            notify_at: now + f64::from(attempts.max(1)) * slot,
        })
    }

    /// Charges reception at `node`. Returns whether the node is alive to process the frame.
    pub fn receive(&mut self, now: SimTime, node: NodeId, from: NodeId, size_bits: u32) -> bool {
        if !self.is_alive(node) {
            trace_event!(
                self.trace,
                now,
                "drop",
                Some(node),
                "reason=dead-receiver from={from}"
            );
            return false;
        }
        let cost = self.energy.rx_cost(size_bits);
        self.charge(now, node, ChargeKind::Rx, cost);
        trace_event!(
            self.trace,
            now,
            "rx",
            Some(node),
            "from={from} bits={size_bits}"
        );
        self.is_alive(node)
    }

    /// Moves the sink to a uniform random point of the area and recomputes neighborhoods.
    pub fn relocate_sink<R: Rng + ?Sized>(&mut self, now: SimTime, rng: &mut R) -> Position {
        let p = self.area.random_point(rng);
        self.move_node(now, self.sink, p);
        p
    }

    pub fn move_node(&mut self, now: SimTime, node: NodeId, p: Position) {
        if let Some(state) = self.nodes.get_mut(node) {
            state.position = p;
            trace_event!(
                self.trace,
                now,
                "relocate",
                Some(node),
                "x={:.3} y={:.3}",
                p.x,
                p.y
            );
            self.refresh_neighbors();
        }
    }

    /// Test and fault-injection hook: drains the node's battery.
    pub fn kill(&mut self, now: SimTime, node: NodeId) {
        if let Some(state) = self.nodes.get(node) {
            let e = state.energy;
            self.charge(now, node, ChargeKind::Idle, e);
        }
    }

    /// Sum over nodes of `initial_energy - energy`.
    pub fn total_energy_consumed(&self) -> Energy {
        self.nodes.iter().map(|n| n.initial_energy - n.energy).sum()
    }

    pub fn ledger(&self) -> &ChargeLedger {
        &self.ledger
    }
}
