//! Discrete-event simulator for pheromone-based routing in wireless sensor
//! networks, with the Termite-hill protocol, three baselines, and the termite
//! world used to illustrate the biological analogy.

pub mod baselines;
pub mod harness;
pub mod net;
pub mod protocol;
pub mod runner;
pub mod scalar;
pub mod sim;
pub mod termite;
pub mod world;

pub use net::{Energy, Network, NetworkConfig, NodeId, Position};
pub use protocol::{AppEvent, EventId, Link, Packet, Protocol};
pub use runner::{RunStats, SimConfig, SimError, Simulation, SinkMode, SourceSet};
pub use scalar::Scalar;
pub use sim::{EventQueue, RngStreams, SimTime, StreamId};
pub use termite::{TermiteHill, TermiteParams};

pub type PheromoneTableF64 = termite::PheromoneTable<f64>;
pub type PheromoneTableF32 = termite::PheromoneTable<f32>;
