//! Per-run metrics and their aggregation across replications.

use crate::runner::RunStats;

use super::scenario::ProtocolKind;

#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub protocol: ProtocolKind,
    pub scenario: String,
    pub n_nodes: usize,
    pub run: u32,
    pub seed: u64,
    pub generated: u64,
    pub delivered: u64,
    /// `None` when nothing was generated.
    pub success_rate_pct: Option<f64>,
    pub energy_j: f64,
    /// `None` when no energy was consumed.
    pub efficiency_kbits_per_j: Option<f64>,
    /// `None` when nothing was delivered.
    pub latency_s: Option<f64>,
}

pub fn success_rate(generated: u64, delivered: u64) -> Option<f64> {
    (generated > 0).then(|| 100.0 * delivered as f64 / generated as f64)
}

/// Delivered payload in Kbit per joule consumed network-wide.
pub fn efficiency(delivered: u64, payload_bits: u32, energy_j: f64) -> Option<f64> {
    (energy_j > 0.0).then(|| delivered as f64 * payload_bits as f64 / 1000.0 / energy_j)
}

/// Identifies one replication within an experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct RunLabel {
    pub protocol: ProtocolKind,
    pub scenario: String,
    pub n_nodes: usize,
    pub run: u32,
    pub seed: u64,
}

impl RunResult {
    pub fn from_stats(label: RunLabel, stats: &RunStats, energy_j: f64, payload_bits: u32) -> Self {
        let delivered = stats.delivered();
        Self {
            protocol: label.protocol,
            scenario: label.scenario,
            n_nodes: label.n_nodes,
            run: label.run,
            seed: label.seed,
            generated: stats.generated,
            delivered,
            success_rate_pct: success_rate(stats.generated, delivered),
            energy_j,
            efficiency_kbits_per_j: efficiency(delivered, payload_bits, energy_j),
            latency_s: stats.mean_latency(),
        }
    }
}

/// Mean, sample standard deviation and range of the defined values of one metric.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub count: usize,
    pub mean: f64,
    pub sd: f64,
    pub min: f64,
    pub max: f64,
}

impl Summary {
    pub fn of(values: impl IntoIterator<Item = f64>) -> Option<Self> {
        let v: Vec<f64> = values.into_iter().collect();
        if v.is_empty() {
            return None;
        }
        let n = v.len() as f64;
        let mean = v.iter().sum::<f64>() / n;
        let sd = if v.len() > 1 {
            (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        Some(Self {
            count: v.len(),
            mean,
            sd,
            min: v.iter().copied().fold(f64::INFINITY, f64::min),
            max: v.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Aggregate {
    pub runs: usize,
    pub generated: Option<Summary>,
    pub delivered: Option<Summary>,
    pub success_rate_pct: Option<Summary>,
    pub energy_j: Option<Summary>,
    pub efficiency_kbits_per_j: Option<Summary>,
    pub latency_s: Option<Summary>,
}

impl Aggregate {
    pub fn of(runs: &[RunResult]) -> Self {
        Self {
            runs: runs.len(),
            generated: Summary::of(runs.iter().map(|r| r.generated as f64)),
            delivered: Summary::of(runs.iter().map(|r| r.delivered as f64)),
            success_rate_pct: Summary::of(runs.iter().filter_map(|r| r.success_rate_pct)),
            energy_j: Summary::of(runs.iter().map(|r| r.energy_j)),
            efficiency_kbits_per_j: Summary::of(
                runs.iter().filter_map(|r| r.efficiency_kbits_per_j),
            ),
            latency_s: Summary::of(runs.iter().filter_map(|r| r.latency_s)),
        }
    }

    /// `(metric name, summary)` pairs in CSV column order.
    pub fn metrics(&self) -> [(&'static str, Option<Summary>); 6] {
        [
            ("generated", self.generated),
            ("delivered", self.delivered),
            ("success_rate_pct", self.success_rate_pct),
            ("energy_j", self.energy_j),
            ("efficiency_kbits_per_j", self.efficiency_kbits_per_j),
            ("latency_s", self.latency_s),
        ]
    }
}
