//! Scenario files: flat `key = value` lines, `#` comments, and a `[protocol]`
//! section for routing parameters. Every key is optional; omitted keys keep the
//! defaults of the reference configuration.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use thiserror::Error;

use crate::baselines::{AodvParams, FfParams, ScParams};
use crate::net::{Area, PlacementPolicy, Position};
use crate::runner::{SimConfig, SinkMode, SourceSet};
use crate::termite::{Evaporation, TermiteParams};

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("line {line}: unknown key `{key}` in section [{section}]")]
    UnknownKey {
        line: usize,
        section: String,
        key: String,
    },
    #[error("line {line}: invalid value for `{key}`: {msg}")]
    Value {
        line: usize,
        key: String,
        msg: String,
    },
    #[error("invalid scenario: {0}")]
    Invalid(String),
    #[error("cannot read scenario `{path}`: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ProtocolKind {
    TermiteHill,
    Ff,
    Sc,
    Aodv,
}

impl ProtocolKind {
    pub const ALL: [ProtocolKind; 4] = [
        ProtocolKind::TermiteHill,
        ProtocolKind::Ff,
        ProtocolKind::Sc,
        ProtocolKind::Aodv,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ProtocolKind::TermiteHill => "termite-hill",
            ProtocolKind::Ff => "ff",
            ProtocolKind::Sc => "sc",
            ProtocolKind::Aodv => "aodv",
        }
    }
}

impl fmt::Display for ProtocolKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ProtocolKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ProtocolKind::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| {
                format!("unknown protocol `{s}` (expected termite-hill, ff, sc or aodv)")
            })
    }
}

#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub protocol: ProtocolKind,
    pub sim: SimConfig,
    pub replications: u32,
    pub base_seed: u64,
    /// Payload size credited per delivered event in the efficiency metric.
    pub payload_bits: u32,
    pub termite: TermiteParams,
    pub ff: FfParams,
    pub sc: ScParams,
    pub aodv: AodvParams,
}

impl Default for Scenario {
    fn default() -> Self {
        Self {
            name: "default".into(),
            protocol: ProtocolKind::TermiteHill,
            sim: SimConfig::default(),
            replications: 10,
            base_seed: 1,
            payload_bits: 320,
            termite: TermiteParams::default(),
            ff: FfParams::default(),
            sc: ScParams::default(),
            aodv: AodvParams::default(),
        }
    }
}

pub const TABLE1_STATIC: &str = include_str!("../../profiles/table1-static.scn");
pub const TABLE1_DYNAMIC: &str = include_str!("../../profiles/table1-dynamic.scn");

/// Names of the profiles compiled into the binary.
pub const PROFILES: [(&str, &str); 2] = [
    ("table1-static", TABLE1_STATIC),
    ("table1-dynamic", TABLE1_DYNAMIC),
];

impl Scenario {
    pub fn validate(&self) -> Result<(), ScenarioError> {
        let bad = |m: &str| Err(ScenarioError::Invalid(m.to_string()));
        if !(self.sim.duration > 0.0) {
            return bad("duration must be > 0");
        }
        if self.replications < 1 {
            return bad("replications must be >= 1");
        }
        if self.sim.nodes < 2 {
            return bad("nodes must be >= 2 (a sink and at least one source)");
        }
        if !(self.sim.traffic_rate >= 0.0) {
            return bad("traffic_rate must be >= 0");
        }
        if !self.sim.network.area.contains(&self.sim.sink_position) {
            return bad("sink position lies outside the area");
        }
        if let SinkMode::Dynamic { t_change } = self.sim.sink_mode {
            if !(t_change > 0.0) {
                return bad("t_change must be > 0");
            }
        }
        if let SourceSet::List(l) = &self.sim.sources {
            if l.is_empty() || l.iter().any(|&s| s == 0 || s >= self.sim.nodes) {
                return bad("sources must list node ids in 1..nodes");
            }
        }
        self.sim
            .network
            .radio
            .validate()
            .map_err(|e| ScenarioError::Invalid(e.to_string()))?;
        if !self.sim.network.energy.is_valid() || !(self.sim.network.initial_energy > 0.0) {
            return bad(
                "energy parameters must be finite, non-negative, with positive initial energy",
            );
        }
        self.termite.validate().map_err(ScenarioError::Invalid)?;
        Ok(())
    }

    /// Parses scenario text; `name` labels the scenario in result files.
    pub fn parse(text: &str, name: &str) -> Result<Self, ScenarioError> {
        let mut s = Scenario {
            name: name.to_string(),
            ..Scenario::default()
        };
        let mut sink_x = None;
        let mut sink_y = None;
        let mut sink_mode = "static".to_string();
        let mut t_change = 2.0;
        let mut decay = "exponential".to_string();
        let mut rho = 0.1;
        let mut x = 0.1;
        let mut placement_attempts = 100_000;
        let mut placement = "connected".to_string();
        let mut section = String::new();

        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            if let Some(rest) = content.strip_prefix('[') {
                let Some(sec) = rest.strip_suffix(']') else {
                    return Err(ScenarioError::Syntax {
                        line,
                        msg: "unterminated section header".into(),
                    });
                };
                let sec = sec.trim();
                if sec != "protocol" {
                    return Err(ScenarioError::Syntax {
                        line,
                        msg: format!("unknown section [{sec}]"),
                    });
                }
                section = sec.to_string();
                continue;
            }
            let Some((key, value)) = content.split_once('=') else {
                return Err(ScenarioError::Syntax {
                    line,
                    msg: "expected `key = value`".into(),
                });
            };
            let (key, value) = (key.trim(), value.trim());
            let v = Val { line, key, value };
            let unknown = || ScenarioError::UnknownKey {
                line,
                section: if section.is_empty() {
                    "top".into()
                } else {
                    section.clone()
                },
                key: key.to_string(),
            };
            let net = &mut s.sim.network;
            if section.is_empty() {
                match key {
                    "name" => s.name = value.to_string(),
                    "protocol" => s.protocol = v.parse()?,
                    "area_width" => net.area.width = v.parse()?,
                    "area_height" => net.area.height = v.parse()?,
                    "nodes" => s.sim.nodes = v.parse()?,
                    "placement" => placement = v.one_of(&["connected", "uniform"])?,
                    "placement_attempts" => placement_attempts = v.parse()?,
                    "range" => net.radio.range = v.parse()?,
                    "delivery_probability" => net.radio.delivery_probability = v.parse()?,
                    "data_rate" => net.radio.data_rate = v.parse()?,
                    "processing_delay" => net.radio.processing_delay = v.parse()?,
                    "max_retransmissions" => net.mac.max_retransmissions = v.parse()?,
                    "ack_timeout" => net.mac.ack_timeout = v.parse()?,
                    "tx_energy_per_bit" => net.energy.tx_joules_per_bit = v.parse()?,
                    "rx_energy_per_bit" => net.energy.rx_joules_per_bit = v.parse()?,
                    "idle_power" => net.energy.idle_joules_per_second = v.parse()?,
                    "initial_energy" => net.initial_energy = v.parse()?,
                    "sink_initial_energy" => net.sink_initial_energy = v.parse()?,
                    "sink_x" => sink_x = Some(v.parse()?),
                    "sink_y" => sink_y = Some(v.parse()?),
                    "sink_mode" => sink_mode = v.one_of(&["static", "dynamic"])?,
                    "t_change" => t_change = v.parse()?,
                    "traffic_rate" => s.sim.traffic_rate = v.parse()?,
                    "sources" => s.sim.sources = v.sources()?,
                    "duration" => s.sim.duration = v.parse()?,
                    "sample_period" => s.sim.sample_period = v.parse()?,
                    "replications" => s.replications = v.parse()?,
                    "base_seed" => s.base_seed = v.parse()?,
                    "payload_bits" => s.payload_bits = v.parse()?,
                    _ => return Err(unknown()),
                }
            } else {
                let t = &mut s.termite;
                match key {
                    "alpha" => t.alpha = v.parse()?,
                    "beta" => t.beta = v.parse()?,
                    "decay" => decay = v.one_of(&["exponential", "linear"])?,
                    "rho" => rho = v.parse()?,
                    "x" => x = v.parse()?,
                    "decay_period" => t.decay_period = v.parse()?,
                    "pheromone_floor" => t.limits.floor = v.parse()?,
                    "pheromone_ceiling" => t.limits.ceiling = v.parse()?,
                    "pheromone_initial" => t.limits.initial = v.parse()?,
                    "hmax" => t.hmax = v.parse()?,
                    "p_sf" => t.p_sf = v.parse()?,
                    "event_cache" => t.event_cache_capacity = v.parse()?,
                    "fs_bytes" => t.sizes.forward_soldier = v.parse()?,
                    "bs_bytes" => t.sizes.backward_soldier = v.parse()?,
                    "worker_bytes" => t.sizes.worker = v.parse()?,
                    "beacon_bytes" => t.sizes.beacon = v.parse()?,
                    "reward_energy_scale" => t.reward_energy_scale = v.parse()?,
                    "gamma_max_factor" => t.gamma_max_factor = v.parse()?,
                    "discovery_timeout" => t.discovery_timeout = v.parse()?,
                    "discovery_retries" => t.discovery_retries = v.parse()?,
                    "sink_reply_window" => t.sink_reply_window = v.parse()?,
                    "beacon_adoption" => t.beacon_adoption = v.parse()?,
                    "beacon_ttl" => t.beacon_ttl = v.parse()?,
                    "max_worker_hops" => t.max_worker_hops = v.parse()?,
                    "soldier_cache_ttl" => t.soldier_cache_ttl = v.parse()?,
                    "relay_miss" => t.relay_miss = v.parse()?,
                    "sc.refresh_period" => s.sc.refresh_period = v.parse()?,
                    "sc.cost_bytes" => s.sc.cost_bytes = v.parse()?,
                    "sc.data_bytes" => s.sc.data_bytes = v.parse()?,
                    "ff.ttl_slack" => s.ff.ttl_slack = v.parse()?,
                    "ff.reply_timeout" => s.ff.reply_timeout = v.parse()?,
                    "ff.reinforcement" => s.ff.reinforcement = v.parse()?,
                    "ff.ant_bytes" => s.ff.ant_bytes = v.parse()?,
                    "ff.backward_bytes" => s.ff.backward_bytes = v.parse()?,
                    "aodv.active_route_timeout" => s.aodv.active_route_timeout = v.parse()?,
                    "aodv.discovery_timeout" => s.aodv.discovery_timeout = v.parse()?,
                    "aodv.discovery_retries" => s.aodv.discovery_retries = v.parse()?,
                    "aodv.intermediate_reply" => s.aodv.intermediate_reply = v.parse()?,
                    "aodv.buffer_capacity" => s.aodv.buffer_capacity = v.parse()?,
                    "aodv.rreq_bytes" => s.aodv.rreq_bytes = v.parse()?,
                    "aodv.rrep_bytes" => s.aodv.rrep_bytes = v.parse()?,
                    "aodv.data_bytes" => s.aodv.data_bytes = v.parse()?,
                    _ => return Err(unknown()),
                }
            }
        }

        let center = s.sim.network.area.center();
        s.sim.sink_position = Position::new(sink_x.unwrap_or(center.x), sink_y.unwrap_or(center.y));
        s.sim.sink_mode = if sink_mode == "dynamic" {
            SinkMode::Dynamic { t_change }
        } else {
            SinkMode::Static
        };
        s.sim.placement = if placement == "uniform" {
            PlacementPolicy::Uniform
        } else {
            PlacementPolicy::Connected {
                max_attempts: placement_attempts,
            }
        };
        s.termite.evaporation = if decay == "linear" {
            Evaporation::Linear { x }
        } else {
            Evaporation::Exponential { rho }
        };
        s.validate()?;
        Ok(s)
    }

    /// Loads a scenario from a file path, or from a built-in profile name.
    pub fn load(name_or_path: &str) -> Result<Self, ScenarioError> {
        if let Some((name, text)) = PROFILES.iter().find(|p| p.0 == name_or_path) {
            return Self::parse(text, name);
        }
        let path = Path::new(name_or_path);
        let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
            path: name_or_path.to_string(),
            source,
        })?;
        let name = path.file_stem().and_then(|s| s.to_str()).unwrap_or(name_or_path);
        Self::parse(&text, name)
    }

    pub fn area(&self) -> Area {
        self.sim.network.area
    }
}

struct Val<'a> {
    line: usize,
    key: &'a str,
    value: &'a str,
}

impl Val<'_> {
    fn err(&self, msg: impl Into<String>) -> ScenarioError {
        ScenarioError::Value {
            line: self.line,
            key: self.key.to_string(),
            msg: msg.into(),
        }
    }

    fn parse<T: FromStr>(&self) -> Result<T, ScenarioError>
    where
        T::Err: fmt::Display,
    {
        self.value
            .parse()
            .map_err(|e: T::Err| self.err(format!("`{}`: {e}", self.value)))
    }

    fn one_of(&self, allowed: &[&str]) -> Result<String, ScenarioError> {
        if allowed.contains(&self.value) {
            Ok(self.value.to_string())
        } else {
            Err(self.err(format!("expected one of {}", allowed.join(", "))))
        }
    }

    fn sources(&self) -> Result<SourceSet, ScenarioError> {
        if self.value == "all" {
            return Ok(SourceSet::AllSensors);
        }
        self.value
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<usize>()
                    .map_err(|e| self.err(format!("`{t}`: {e}")))
            })
            .collect::<Result<Vec<_>, _>>()
            .map(SourceSet::List)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn static_profile_matches_reference_setup() {
        let s = Scenario::load("table1-static").unwrap();
        assert_eq!(s.sim.nodes, 100);
        assert_eq!((s.area().width, s.area().height), (100.0, 100.0));
        assert_eq!(s.sim.network.radio.range, 35.0);
        assert_eq!(s.sim.network.radio.data_rate, 250_000.0);
        assert_eq!(s.sim.network.mac.max_retransmissions, 3);
        assert_eq!(s.sim.duration, 360.0);
        assert_eq!(s.replications, 10);
        assert_eq!(s.sim.sink_mode, SinkMode::Static);
    }

    #[test]
    fn dynamic_profile_moves_the_sink() {
        let s = Scenario::load("table1-dynamic").unwrap();
        assert_eq!(s.sim.sink_mode, SinkMode::Dynamic { t_change: 2.0 });
    }

    #[test]
    fn zero_replications_rejected() {
        let e = Scenario::parse("replications = 0\n", "x").unwrap_err();
        assert!(e.to_string().contains("replications"), "{e}");
    }

    #[test]
    fn omitted_exponents_default() {
        let s = Scenario::parse("protocol = ff\n[protocol]\nhmax = 4\n", "x").unwrap();
        assert_eq!((s.termite.alpha, s.termite.beta), (0.0, 2.0));
        assert_eq!(s.termite.hmax, 4);
        assert_eq!(s.protocol, ProtocolKind::Ff);
    }

    #[test]
    fn unknown_key_reported_with_line() {
        let e = Scenario::parse("# c\nnodes = 9\nbogus = 1\n", "x").unwrap_err();
        assert!(
            matches!(e, ScenarioError::UnknownKey { line: 3, .. }),
            "{e}"
        );
    }

    #[test]
    fn bad_values_rejected() {
        assert!(Scenario::parse("protocol = ospf\n", "x").is_err());
        assert!(Scenario::parse("nodes = many\n", "x").is_err());
        assert!(Scenario::parse("delivery_probability = 1.5\n", "x").is_err());
        assert!(Scenario::parse("[protocol]\np_sf = 2\n", "x").is_err());
        assert!(Scenario::parse("[other]\n", "x").is_err());
    }

    #[test]
    fn linear_decay_and_source_list() {
        let s = Scenario::parse(
            "nodes = 5\nsources = 1, 3\n[protocol]\ndecay = linear\nx = 0.2\n",
            "x",
        )
        .unwrap();
        assert_eq!(s.termite.evaporation, Evaporation::Linear { x: 0.2 });
        assert_eq!(s.sim.sources, SourceSet::List(vec![1, 3]));
    }
}
