//! Per-node pheromone matrix `T[neighbor, destination]` with floor, ceiling and
//! initial-value semantics, periodic evaporation, and decayed-entry pruning.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::net::NodeId;
use crate::scalar::Scalar;

#[derive(Debug, Error, PartialEq)]
pub enum PheromoneError {
    #[error("node {0} is not a known neighbor")]
    NotANeighbor(NodeId),
    #[error("reward must be finite and non-negative")]
    BadReward,
    #[error("invalid pheromone limits: need 0 <= floor <= initial <= ceiling")]
    Limits,
    #[error("evaporation parameter out of range: {0}")]
    Evaporation(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PheromoneLimits<S> {
    pub floor: S,
    pub ceiling: S,
    pub initial: S,
}

impl<S: Scalar> Default for PheromoneLimits<S> {
    fn default() -> Self {
        Self {
            floor: S::lit(0.05),
            ceiling: S::lit(10.0),
            initial: S::lit(1.0),
        }
    }
}

impl<S: Scalar> PheromoneLimits<S> {
    pub fn validate(&self) -> Result<(), PheromoneError> {
        let ok = self.floor >= S::zero()
            && self.floor <= self.initial
            && self.initial <= self.ceiling
            && self.ceiling.is_finite();
        if ok {
            Ok(())
        } else {
            Err(PheromoneError::Limits)
        }
    }
}

/// Evaporation law applied once per decay period.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Evaporation<S> {
    /// `T' = T * exp(-rho)`
    Exponential { rho: S },
    /// `T' = (1 - x) * T`
    Linear { x: S },
}

impl<S: Scalar> Evaporation<S> {
    pub fn validate(&self) -> Result<(), PheromoneError> {
        match *self {
            Evaporation::Exponential { rho } if !(rho >= S::zero() && rho.is_finite()) => {
                Err(PheromoneError::Evaporation("rho must be >= 0"))
            }
            Evaporation::Linear { x } if !(x >= S::zero() && x <= S::one()) => {
                Err(PheromoneError::Evaporation("x must be in [0, 1]"))
            }
            _ => Ok(()),
        }
    }

    /// Multiplicative factor of one period.
    pub fn factor(&self) -> S {
        match *self {
            Evaporation::Exponential { rho } => (-rho).exp(),
            Evaporation::Linear { x } => S::one() - x,
        }
    }
}

/// What [`PheromoneTable::prune_decayed`] removed.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PruneReport {
    pub rows: Vec<NodeId>,
    pub columns: Vec<NodeId>,
}

/// Complete matrix over the current neighbor set and known destinations.
#[derive(Debug, Clone, PartialEq)]
pub struct PheromoneTable<S> {
    limits: PheromoneLimits<S>,
    neighbors: BTreeSet<NodeId>,
    destinations: BTreeSet<NodeId>,
    entries: BTreeMap<(NodeId, NodeId), S>,
}

impl<S: Scalar> PheromoneTable<S> {
    pub fn new(limits: PheromoneLimits<S>) -> Result<Self, PheromoneError> {
        limits.validate()?;
        Ok(Self {
            limits,
            neighbors: BTreeSet::new(),
            destinations: BTreeSet::new(),
            entries: BTreeMap::new(),
        })
    }

    pub fn limits(&self) -> &PheromoneLimits<S> {
        &self.limits
    }

    pub fn neighbors(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.neighbors.iter().copied()
    }

    pub fn destinations(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.destinations.iter().copied()
    }

    pub fn has_neighbor(&self, n: NodeId) -> bool {
        self.neighbors.contains(&n)
    }

    pub fn has_destination(&self, d: NodeId) -> bool {
        self.destinations.contains(&d)
    }

    pub fn is_empty(&self) -> bool {
        self.neighbors.is_empty() && self.destinations.is_empty()
    }

    pub fn get(&self, n: NodeId, d: NodeId) -> Option<S> {
        self.entries.get(&(n, d)).copied()
    }

    /// Registers a neighbor; its row starts at the initial value for every known destination.
    pub fn add_neighbor(&mut self, n: NodeId) {
        if self.neighbors.insert(n) {
            for &d in &self.destinations {
                self.entries.insert((n, d), self.limits.initial);
            }
        }
    }

    pub fn add_destination(&mut self, d: NodeId) {
        if self.destinations.insert(d) {
            for &n in &self.neighbors {
                self.entries.insert((n, d), self.limits.initial);
            }
        }
    }

    /// Removes a neighbor row unconditionally (the neighbor left radio range).
    pub fn remove_neighbor(&mut self, n: NodeId) -> bool {
        if !self.neighbors.remove(&n) {
            return false;
        }
        for &d in &self.destinations {
            self.entries.remove(&(n, d));
        }
        true
    }

    fn remove_destination(&mut self, d: NodeId) {
        if self.destinations.remove(&d) {
            for &n in &self.neighbors {
                self.entries.remove(&(n, d));
            }
        }
    }

    /// Adds `reward` to `T[prev_hop, dest]`, creating the destination column if needed.
    /// Returns the updated value, capped at the ceiling.
    pub fn deposit(
        &mut self,
        prev_hop: NodeId,
        dest: NodeId,
        reward: S,
    ) -> Result<S, PheromoneError> {
        if !(reward >= S::zero() && reward.is_finite()) {
            return Err(PheromoneError::BadReward);
        }
        if !self.neighbors.contains(&prev_hop) {
            return Err(PheromoneError::NotANeighbor(prev_hop));
        }
        self.add_destination(dest);
        let ceiling = self.limits.ceiling;
        let v = self
            .entries
            .get_mut(&(prev_hop, dest))
            .expect("complete matrix");
        *v = (*v + reward).min(ceiling);
        Ok(*v)
    }

    /// Applies one decay period to every entry, never going below the floor.
    pub fn evaporate(&mut self, law: &Evaporation<S>) {
        let f = law.factor();
        let floor = self.limits.floor;
        for v in self.entries.values_mut() {
            *v = (*v * f).max(floor);
        }
    }

    fn row_decayed(&self, n: NodeId) -> bool {
        let floor = self.limits.floor;
        self.destinations
            .iter()
            .all(|&d| self.entries[&(n, d)] == floor)
    }

    fn column_decayed(&self, d: NodeId) -> bool {
        let floor = self.limits.floor;
        self.neighbors
            .iter()
            .all(|&n| self.entries[&(n, d)] == floor)
    }

    /// Removes lost neighbors, then every fully decayed row and every fully decayed
    /// column. A destination that is also a neighbor keeps its column until its
    /// neighbor row has decayed too.
    pub fn prune_decayed(&mut self, lost_neighbors: &[NodeId]) -> PruneReport {
        let mut report = PruneReport::default();
        for &n in lost_neighbors {
            if self.remove_neighbor(n) {
                report.rows.push(n);
            }
        }
        let dead_rows: Vec<NodeId> = self
            .neighbors
            .iter()
            .copied()
            .filter(|&n| self.row_decayed(n))
            .collect();
        let dead_cols: Vec<NodeId> = self
            .destinations
            .iter()
            .copied()
            .filter(|&d| self.column_decayed(d))
            .filter(|&d| !self.neighbors.contains(&d) || dead_rows.contains(&d))
            .collect();
        for d in dead_cols {
            self.remove_destination(d);
            report.columns.push(d);
        }
        for n in dead_rows {
            self.remove_neighbor(n);
            report.rows.push(n);
        }
        report
    }

    /// `(neighbor, T[neighbor, d])` for every current neighbor; `None` when `d` is unknown.
    pub fn column(&self, d: NodeId) -> Option<Vec<(NodeId, S)>> {
        if !self.destinations.contains(&d) {
            return None;
        }
        Some(
            self.neighbors
                .iter()
                .map(|&n| (n, self.entries[&(n, d)]))
                .collect(),
        )
    }

    /// Every entry lies within `[floor, ceiling]` and the matrix is complete.
    pub fn check_invariants(&self) -> bool {
        let complete = self.entries.len() == self.neighbors.len() * self.destinations.len();
        complete
            && self
                .entries
                .values()
                .all(|&v| v >= self.limits.floor && v <= self.limits.ceiling)
    }
}
