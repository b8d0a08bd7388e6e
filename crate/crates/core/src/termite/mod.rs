//! Termite-hill routing protocol.

pub mod agent;
pub mod pheromone;
pub mod reward;
pub mod selection;

pub use agent::{
    BackwardSoldier, Beacon, ForwardSoldier, NodeRouting, PacketSizes, PathId, RelayMiss,
    SoldierCacheEntry, SoldierFlag, SoldierId, TermiteBody, TermiteCounters, TermiteHill,
    TermitePacket, TermiteParams, TermiteTimer, Worker,
};
pub use pheromone::{Evaporation, PheromoneError, PheromoneLimits, PheromoneTable, PruneReport};
pub use reward::{compute_reward, default_gamma_max, Reward, RewardInputs};
pub use selection::{
    route_probabilities, sample_index, selection_probabilities, NoRoute, ProbabilityRow,
};
