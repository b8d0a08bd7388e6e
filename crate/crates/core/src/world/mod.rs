//! Grid world of termites gathering scattered wood chips into piles.
//!
//! Every chip starts as its own pile. Termites wander on a torus; an empty-handed
//! termite next to a pile takes a chip from it, a laden termite next to a pile
//! adds its chip to it. Chips are never dropped in open space, so piles can only
//! disappear, never appear.

use std::collections::BTreeMap;
use std::fmt;

use rand::seq::index::sample;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::sim::{RngStreams, StreamId};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum WorldError {
    #[error("grid of {cells} cells cannot hold {requested} woods and termites")]
    Overfull { cells: u64, requested: u64 },
    #[error("grid dimensions must be positive")]
    EmptyGrid,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WorldConfig {
    pub width: u32,
    pub height: u32,
    pub termites: u32,
    pub woods: u32,
}

impl Default for WorldConfig {
    fn default() -> Self {
        Self {
            width: 200,
            height: 200,
            termites: 200,
            woods: 100,
        }
    }
}

pub type Cell = (u32, u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PileId(pub u32);

impl fmt::Display for PileId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Pile${}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pile {
    pub id: PileId,
    pub cell: Cell,
    pub wood: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Termite {
    pub cell: Cell,
    pub carrying: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WorldMetrics {
    pub live_piles: u32,
    pub woods_in_piles: u32,
    pub gathered_percent: f64,
    pub carried: u32,
}

const STEPS: [(i64, i64); 8] = [
    (-1, -1),
    (0, -1),
    (1, -1),
    (-1, 0),
    (1, 0),
    (-1, 1),
    (0, 1),
    (1, 1),
];

#[derive(Debug, Clone)]
pub struct World {
    cfg: WorldConfig,
    piles: BTreeMap<PileId, Pile>,
    grid: Vec<Option<PileId>>,
    termites: Vec<Termite>,
    rng: ChaCha8Rng,
    time: u64,
}

impl World {
    pub fn new(cfg: WorldConfig, seed: u64) -> Result<Self, WorldError> {
        Self::with_rng(cfg, RngStreams::new(seed).stream(StreamId::World))
    }

    pub fn with_rng(cfg: WorldConfig, mut rng: ChaCha8Rng) -> Result<Self, WorldError> {
        if cfg.width == 0 || cfg.height == 0 {
            return Err(WorldError::EmptyGrid);
        }
        let cells = cfg.width as u64 * cfg.height as u64;
        let requested = cfg.woods as u64 + cfg.termites as u64;
        if requested > cells {
            return Err(WorldError::Overfull { cells, requested });
        }
        let picks = sample(&mut rng, cells as usize, requested as usize).into_vec();
        let to_cell = |i: usize| {
            (
                (i as u64 % cfg.width as u64) as u32,
                (i as u64 / cfg.width as u64) as u32,
            )
        };
        let mut grid = vec![None; cells as usize];
        let mut piles = BTreeMap::new();
        for (k, &i) in picks[..cfg.woods as usize].iter().enumerate() {
            let id = PileId(k as u32 + 1);
            grid[i] = Some(id);
            piles.insert(
                id,
                Pile {
                    id,
                    cell: to_cell(i),
                    wood: 1,
                },
            );
        }
        let termites = picks[cfg.woods as usize..]
            .iter()
            .map(|&i| Termite {
                cell: to_cell(i),
                carrying: false,
            })
            .collect();
        Ok(Self {
            cfg,
            piles,
            grid,
            termites,
            rng,
            time: 0,
        })
    }

    pub fn config(&self) -> &WorldConfig {
        &self.cfg
    }

    pub fn time(&self) -> u64 {
        self.time
    }

    pub fn piles(&self) -> impl Iterator<Item = &Pile> {
        self.piles.values()
    }

    pub fn pile(&self, id: PileId) -> Option<&Pile> {
        self.piles.get(&id)
    }

    pub fn termites(&self) -> &[Termite] {
        &self.termites
    }

    pub fn metrics(&self) -> WorldMetrics {
        let woods_in_piles: u32 = self.piles.values().map(|p| p.wood).sum();
        WorldMetrics {
            live_piles: self.piles.len() as u32,
            woods_in_piles,
            gathered_percent: if self.cfg.woods == 0 {
                0.0
            } else {
                100.0 * woods_in_piles as f64 / self.cfg.woods as f64
            },
            carried: self.termites.iter().filter(|t| t.carrying).count() as u32,
        }
    }

    fn index(&self, c: Cell) -> usize {
        c.1 as usize * self.cfg.width as usize + c.0 as usize
    }

    fn offset(&self, c: Cell, dx: i64, dy: i64) -> Cell {
        let w = self.cfg.width as i64;
        let h = self.cfg.height as i64;
        (
            (c.0 as i64 + dx).rem_euclid(w) as u32,
            (c.1 as i64 + dy).rem_euclid(h) as u32,
        )
    }

    /// Chebyshev distance on the torus.
    pub fn distance(&self, a: Cell, b: Cell) -> u32 {
        let d = |p: u32, q: u32, n: u32| {
            let e = p.abs_diff(q);
            e.min(n - e)
        };
        d(a.0, b.0, self.cfg.width).max(d(a.1, b.1, self.cfg.height))
    }

    /// Closest live pile within the 8-neighborhood of `c` (including `c`),
    /// ties going to the lower pile id.
    pub fn nearest_pile(&self, c: Cell) -> Option<PileId> {
        let mut best: Option<(u32, PileId)> = None;
        for dy in -1..=1 {
            for dx in -1..=1 {
                let n = self.offset(c, dx, dy);
                if let Some(id) = self.grid[self.index(n)] {
                    let cand = (self.distance(c, n), id);
                    if best.map_or(true, |b| cand < b) {
                        best = Some(cand);
                    }
                }
            }
        }
        best.map(|b| b.1)
    }

    /// Pile-free cell next to `pile` nearest to `from`, ties in lexicographic cell order.
    pub fn deposit_cell(&self, pile: PileId, from: Cell) -> Option<Cell> {
        let p = self.piles.get(&pile)?.cell;
        STEPS
            .iter()
            .map(|&(dx, dy)| self.offset(p, dx, dy))
            .filter(|&n| self.grid[self.index(n)].is_none())
            .min_by_key(|&n| (self.distance(from, n), n))
    }

    /// Advances every termite by one move followed by its pick-up or put-down rule.
    pub fn step(&mut self) {
        for i in 0..self.termites.len() {
            let (dx, dy) = STEPS[self.rng.gen_range(0..STEPS.len())];
            let cell = self.offset(self.termites[i].cell, dx, dy);
            self.termites[i].cell = cell;
            let Some(id) = self.nearest_pile(cell) else {
                continue;
            };
            if self.termites[i].carrying {
                if self.deposit_cell(id, cell).is_some() {
                    self.piles.get_mut(&id).expect("live pile").wood += 1;
                    self.termites[i].carrying = false;
                }
            } else {
                let pile = self.piles.get_mut(&id).expect("live pile");
                pile.wood -= 1;
                self.termites[i].carrying = true;
                if pile.wood < 1 {
                    let at = pile.cell;
                    self.piles.remove(&id);
                    let k = self.index(at);
                    self.grid[k] = None;
                }
            }
        }
        self.time += 1;
    }

    pub fn run(&mut self, steps: u64) {
        for _ in 0..steps {
            self.step();
        }
    }
}

/// One row of an averaged world time series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WorldSample {
    pub time: u64,
    pub live_piles: f64,
    pub woods_in_piles: f64,
    pub carried: f64,
}

/// Runs one world per seed and averages the metrics every `sample_every` steps
/// (time 0 included).
pub fn averaged_series(
    cfg: WorldConfig,
    seeds: &[u64],
    steps: u64,
    sample_every: u64,
) -> Result<Vec<WorldSample>, WorldError> {
    let every = sample_every.max(1);
    let marks: Vec<u64> = (0..=steps)
        .filter(|t| t % every == 0 || *t == steps)
        .collect();
    let mut acc = vec![(0.0, 0.0, 0.0); marks.len()];
    for &seed in seeds {
        let mut w = World::new(cfg, seed)?;
        for (k, &t) in marks.iter().enumerate() {
            w.run(t - w.time());
            let m = w.metrics();
            acc[k].0 += m.live_piles as f64;
            acc[k].1 += m.woods_in_piles as f64;
            acc[k].2 += m.carried as f64;
        }
    }
    let n = seeds.len().max(1) as f64;
    Ok(marks
        .into_iter()
        .zip(acc)
        .map(|(time, (p, w, c))| WorldSample {
            time,
            live_piles: p / n,
            woods_in_piles: w / n,
            carried: c / n,
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(termites: u32, woods: u32, size: u32) -> WorldConfig {
        WorldConfig {
            width: size,
            height: size,
            termites,
            woods,
        }
    }

    #[test]
    fn full_size_init() {
        let w = World::new(WorldConfig::default(), 1).unwrap();
        assert_eq!(w.piles().count(), 100);
        assert_eq!(w.termites().len(), 200);
        let names: Vec<String> = w.piles().map(|p| p.id.to_string()).collect();
        assert_eq!(names.first().unwrap(), "Pile$1");
        assert_eq!(names.last().unwrap(), "Pile$100");
        let m = w.metrics();
        assert_eq!(
            (m.live_piles, m.woods_in_piles, m.gathered_percent),
            (100, 100, 100.0)
        );
    }

    #[test]
    fn tiny_grid_cells_are_disjoint() {
        let w = World::new(cfg(1, 1, 2), 4).unwrap();
        let pile = w.piles().next().unwrap().cell;
        assert_ne!(pile, w.termites()[0].cell);
    }

    #[test]
    fn overfull_grid_rejected() {
        assert_eq!(
            World::new(cfg(3, 2, 2), 0).unwrap_err(),
            WorldError::Overfull {
                cells: 4,
                requested: 5
            }
        );
    }

    #[test]
    fn lone_termite_wanders_empty_handed() {
        let mut w = World::new(cfg(1, 0, 200), 9).unwrap();
        let start = w.termites()[0].cell;
        w.step();
        assert_ne!(w.termites()[0].cell, start);
        assert!(!w.termites()[0].carrying);
    }

    #[test]
    fn no_termites_is_a_fixed_point() {
        let mut w = World::new(cfg(0, 30, 20), 2).unwrap();
        let before: Vec<Pile> = w.piles().cloned().collect();
        w.run(50);
        assert_eq!(w.piles().cloned().collect::<Vec<_>>(), before);
    }

    fn manual(piles: &[(u32, Cell, u32)], termites: &[(Cell, bool)]) -> World {
        let mut w = World::new(cfg(0, 0, 10), 0).unwrap();
        for &(id, cell, wood) in piles {
            let id = PileId(id);
            let k = w.index(cell);
            w.grid[k] = Some(id);
            w.piles.insert(id, Pile { id, cell, wood });
        }
        w.termites = termites
            .iter()
            .map(|&(cell, carrying)| Termite { cell, carrying })
            .collect();
        w
    }

    #[test]
    fn nearest_pile_prefers_distance_then_id() {
        let w = manual(&[(2, (5, 5), 1), (1, (6, 5), 1), (3, (4, 4), 1)], &[]);
        assert_eq!(w.nearest_pile((5, 5)), Some(PileId(2)));
        assert_eq!(w.nearest_pile((5, 4)), Some(PileId(1)));
        assert_eq!(w.nearest_pile((0, 0)), None);
    }

    #[test]
    fn deposit_cell_skips_pile_cells() {
        let w = manual(&[(1, (5, 5), 3), (2, (4, 4), 1)], &[]);
        let c = w.deposit_cell(PileId(1), (4, 4)).unwrap();
        assert_ne!(c, (4, 4));
        assert_eq!(w.distance(c, (5, 5)), 1);
    }

    #[test]
    fn last_chip_removes_pile_forever() {
        // Surround the termite with a single pile; any move stays adjacent on a 3x3 torus.
        let mut w = manual(&[(1, (1, 1), 1)], &[((0, 0), false)]);
        w.cfg.width = 3;
        w.cfg.height = 3;
        w.grid = vec![None; 9];
        w.grid[4] = Some(PileId(1));
        w.step();
        assert!(w.termites()[0].carrying);
        assert_eq!(w.piles().count(), 0);
        w.run(20);
        assert_eq!(w.piles().count(), 0);
        assert!(w.termites()[0].carrying);
    }

    #[test]
    fn seeded_runs_repeat() {
        let run = |seed| {
            let mut w = World::new(cfg(20, 30, 40), seed).unwrap();
            w.run(300);
            (w.metrics(), w.termites().to_vec())
        };
        assert_eq!(run(5), run(5));
    }

    #[test]
    fn series_starts_at_initial_state() {
        let s = averaged_series(cfg(10, 20, 30), &[1, 2], 100, 50).unwrap();
        assert_eq!(
            s.iter().map(|r| r.time).collect::<Vec<_>>(),
            vec![0, 50, 100]
        );
        assert_eq!(s[0].live_piles, 20.0);
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(24))]

        #[test]
        fn wood_is_conserved_and_piles_only_vanish(
            seed in 0u64..1000,
            termites in 0u32..40,
            woods in 0u32..40,
            size in 10u32..20,
        ) {
            let mut w = World::new(cfg(termites, woods, size), seed).unwrap();
            let mut live: Vec<PileId> = w.piles().map(|p| p.id).collect();
            for _ in 0..300 {
                w.step();
                let m = w.metrics();
                proptest::prop_assert_eq!(m.woods_in_piles + m.carried, woods);
                let now: Vec<PileId> = w.piles().map(|p| p.id).collect();
                proptest::prop_assert!(now.iter().all(|id| live.contains(id)));
                live = now;
            }
        }
    }
}
