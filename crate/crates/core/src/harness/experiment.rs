//! Replicated runs of a scenario and density sweeps over node counts.

use thiserror::Error;

use crate::baselines::{AodvLite, FloodedForward, SensorDriven};
use crate::net::Trace;
use crate::protocol::Protocol;
use crate::runner::{SimError, Simulation};
use crate::termite::TermiteHill;
use crate::trace_event;

use super::metrics::{Aggregate, RunLabel, RunResult};
use super::scenario::{ProtocolKind, Scenario, ScenarioError};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error("run {run} (seed {seed}) failed: {source}")]
    Run {
        run: u32,
        seed: u64,
        #[source]
        source: SimError,
    },
    #[error("protocol configuration: {0}")]
    Protocol(String),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Experiment {
    pub protocol: ProtocolKind,
    pub scenario: String,
    pub n_nodes: usize,
    pub runs: Vec<RunResult>,
    pub aggregate: Aggregate,
}

/// Builds, runs to completion and returns one simulation of `protocol` under
/// the scenario's network and traffic settings.
pub fn simulate<P: Protocol>(
    scn: &Scenario,
    seed: u64,
    protocol: P,
    trace: Trace,
) -> Result<Simulation<P>, SimError> {
    let mut sim = Simulation::new(scn.sim.clone(), protocol, seed)?;
    sim.set_trace(trace);
    sim.run();
    sim.dump_tables();
    Ok(sim)
}

fn finish<P: Protocol>(
    scn: &Scenario,
    label: RunLabel,
    mut sim: Simulation<P>,
) -> (RunResult, Trace) {
    let energy = sim.network().total_energy_consumed().joules();
    let result = RunResult::from_stats(label, sim.stats(), energy, scn.payload_bits);
    (result, sim.take_trace())
}

/// Runs replication `run` (seed `base_seed + run`), appending to `trace`.
pub fn run_single(
    scn: &Scenario,
    run: u32,
    mut trace: Trace,
) -> Result<(RunResult, Trace), HarnessError> {
    let seed = scn.base_seed.wrapping_add(run as u64);
    let n = scn.sim.nodes;
    let label = RunLabel {
        protocol: scn.protocol,
        scenario: scn.name.clone(),
        n_nodes: n,
        run,
        seed,
    };
    trace_event!(
        trace,
        0.0,
        "run",
        None,
        "protocol={} index={run} seed={seed} nodes={n}",
        scn.protocol
    );
    let wrap = |source| HarnessError::Run { run, seed, source };
    let proto_err = HarnessError::Protocol;
    Ok(match scn.protocol {
        ProtocolKind::TermiteHill => {
            let p = TermiteHill::new(scn.termite.clone(), n).map_err(proto_err)?;
            finish(scn, label, simulate(scn, seed, p, trace).map_err(wrap)?)
        }
        ProtocolKind::Ff => {
            let p = FloodedForward::new(scn.ff.clone(), n).map_err(proto_err)?;
            finish(scn, label, simulate(scn, seed, p, trace).map_err(wrap)?)
        }
        ProtocolKind::Sc => {
            let p = SensorDriven::new(scn.sc.clone(), n).map_err(proto_err)?;
            finish(scn, label, simulate(scn, seed, p, trace).map_err(wrap)?)
        }
        ProtocolKind::Aodv => {
            let p = AodvLite::new(scn.aodv.clone(), n).map_err(proto_err)?;
            finish(scn, label, simulate(scn, seed, p, trace).map_err(wrap)?)
        }
    })
}

/// Runs every replication of `scn`. All runs share one trace sink.
pub fn run_experiment_traced(
    scn: &Scenario,
    mut trace: Trace,
) -> Result<(Experiment, Trace), HarnessError> {
    scn.validate()?;
    let mut runs = Vec::with_capacity(scn.replications as usize);
    for k in 0..scn.replications {
        let (r, t) = run_single(scn, k, trace)?;
        trace = t;
        runs.push(r);
    }
    let aggregate = Aggregate::of(&runs);
    Ok((
        Experiment {
            protocol: scn.protocol,
            scenario: scn.name.clone(),
            n_nodes: scn.sim.nodes,
            runs,
            aggregate,
        },
        trace,
    ))
}

pub fn run_experiment(scn: &Scenario) -> Result<Experiment, HarnessError> {
    run_experiment_traced(scn, Trace::disabled()).map(|(e, _)| e)
}

/// One experiment per (protocol, node count). Seeds are shared across protocols,
/// so each protocol sees the same placements and traffic.
pub fn density_sweep(
    scn: &Scenario,
    node_counts: &[usize],
    protocols: &[ProtocolKind],
) -> Result<Vec<Experiment>, HarnessError> {
    if node_counts.is_empty() || protocols.is_empty() {
        return Err(ScenarioError::Invalid(
            "sweep needs at least one node count and protocol".into(),
        )
        .into());
    }
    let mut out = Vec::new();
    for &p in protocols {
        for &n in node_counts {
            let mut s = scn.clone();
            s.protocol = p;
            s.sim.nodes = n;
            out.push(run_experiment(&s)?);
        }
    }
    Ok(out)
}
