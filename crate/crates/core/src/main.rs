use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::info;

use termite_hill::harness::{
    density_sweep, fmt_g6, results_csv, run_experiment_traced, summary_csv, HarnessError,
    ProtocolKind, Scenario, ScenarioError,
};
use termite_hill::net::Trace;
use termite_hill::world::{averaged_series, WorldConfig, WorldError};

#[derive(Parser)]
#[command(
    name = "termite-hill",
    version,
    about = "Pheromone-based WSN routing simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run all replications of one scenario.
    Run {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        protocol: Option<ProtocolKind>,
        #[arg(long)]
        nodes: Option<usize>,
        /// Write the event trace of every replication to this file.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Run a scenario for several node counts and protocols.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',', required = true)]
        nodes: Vec<usize>,
        /// Defaults to the scenario's protocol.
        #[arg(long, value_delimiter = ',')]
        protocols: Vec<ProtocolKind>,
    },
    /// Simulate the termite wood-gathering world and print its time series.
    World {
        #[arg(long, default_value_t = 200)]
        termites: u32,
        #[arg(long, default_value_t = 100)]
        woods: u32,
        #[arg(long, default_value_t = 200)]
        size: u32,
        #[arg(long, default_value_t = 7000)]
        steps: u64,
        #[arg(long, default_value_t = 5)]
        seeds: u64,
        #[arg(long, default_value_t = 1)]
        base_seed: u64,
        #[arg(long, default_value_t = 100)]
        sample_every: u64,
        /// Output file; standard output when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Parse and check a scenario without running it.
    Validate { scenario: String },
}

#[derive(Args)]
struct Common {
    /// Scenario file, or the name of a built-in profile (table1-static, table1-dynamic).
    scenario: String,
    #[arg(long, default_value = "results")]
    out: PathBuf,
    /// Base seed; replication k uses seed + k.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    replications: Option<u32>,
}

enum Failure {
    Config(String),
    Runtime(String),
}

impl From<HarnessError> for Failure {
    fn from(e: HarnessError) -> Self {
        match e {
            HarnessError::Scenario(_) | HarnessError::Protocol(_) => Failure::Config(e.to_string()),
            HarnessError::Run { .. } | HarnessError::Io(_) => Failure::Runtime(e.to_string()),
        }
    }
}

impl From<ScenarioError> for Failure {
    fn from(e: ScenarioError) -> Self {
        Failure::Config(e.to_string())
    }
}

impl From<WorldError> for Failure {
    fn from(e: WorldError) -> Self {
        Failure::Config(e.to_string())
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

fn load(common: &Common) -> Result<Scenario, Failure> {
    let mut s = Scenario::load(&common.scenario)?;
    if let Some(seed) = common.seed {
        s.base_seed = seed;
    }
    if let Some(r) = common.replications {
        s.replications = r;
    }
    Ok(s)
}

fn write_file(path: &Path, contents: &str) -> Result<(), Failure> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, contents)?;
    info!("wrote {}", path.display());
    Ok(())
}

fn execute(cmd: Command) -> Result<(), Failure> {
    match cmd {
        Command::Validate { scenario } => {
            let s = Scenario::load(&scenario)?;
            println!(
                "{}: ok (protocol {}, {} nodes, {} replications)",
                s.name, s.protocol, s.sim.nodes, s.replications
            );
        }
        Command::Run {
            common,
            protocol,
            nodes,
            trace,
        } => {
            let mut s = load(&common)?;
            if let Some(p) = protocol {
                s.protocol = p;
            }
            if let Some(n) = nodes {
                s.sim.nodes = n;
            }
            s.validate()?;
            let sink = match &trace {
                Some(path) => {
                    if let Some(dir) = path.parent() {
                        fs::create_dir_all(dir)?;
                    }
                    Trace::to_writer(BufWriter::new(File::create(path)?))
                }
                None => Trace::disabled(),
            };
            let (exp, mut sink) = run_experiment_traced(&s, sink)?;
            sink.finish()?;
            let stem = format!("{}-{}-n{}", s.name, s.protocol, s.sim.nodes);
            write_file(
                &common.out.join(format!("{stem}.csv")),
                &results_csv(std::slice::from_ref(&exp)),
            )?;
            write_file(
                &common.out.join(format!("{stem}-summary.csv")),
                &summary_csv(std::slice::from_ref(&exp)),
            )?;
            let a = &exp.aggregate;
            let show = |m: Option<termite_hill::harness::Summary>| {
                m.map_or("NA".to_string(), |m| fmt_g6(m.mean))
            };
            println!(
                "{} {} n={} runs={} success_pct={} energy_j={} efficiency_kbits_per_j={}",
                s.name,
                s.protocol,
                s.sim.nodes,
                a.runs,
                show(a.success_rate_pct),
                show(a.energy_j),
                show(a.efficiency_kbits_per_j)
            );
        }
        Command::Sweep {
            common,
            nodes,
            protocols,
        } => {
            let s = load(&common)?;
            let protocols = if protocols.is_empty() {
                vec![s.protocol]
            } else {
                protocols
            };
            let exps = density_sweep(&s, &nodes, &protocols)?;
            write_file(
                &common.out.join(format!("{}-sweep.csv", s.name)),
                &results_csv(&exps),
            )?;
            write_file(
                &common.out.join(format!("{}-sweep-summary.csv", s.name)),
                &summary_csv(&exps),
            )?;
            for e in &exps {
                let m = e
                    .aggregate
                    .success_rate_pct
                    .map_or("NA".into(), |m| fmt_g6(m.mean));
                println!("{} n={} success_pct={m}", e.protocol, e.n_nodes);
            }
        }
        Command::World {
            termites,
            woods,
            size,
            steps,
            seeds,
            base_seed,
            sample_every,
            out,
        } => {
            let cfg = WorldConfig {
                width: size,
                height: size,
                termites,
                woods,
            };
            if seeds == 0 {
                return Err(Failure::Config("--seeds must be >= 1".into()));
            }
            let seed_list: Vec<u64> = (0..seeds).map(|k| base_seed + k).collect();
            let series = averaged_series(cfg, &seed_list, steps, sample_every)?;
            let mut csv = String::from("time,live_piles,woods_in_piles,carried\n");
            for r in series {
                csv.push_str(&format!(
                    "{},{},{},{}\n",
                    r.time,
                    fmt_g6(r.live_piles),
                    fmt_g6(r.woods_in_piles),
                    fmt_g6(r.carried)
                ));
            }
            match out {
                Some(path) => write_file(&path, &csv)?,
                None => io::stdout().write_all(csv.as_bytes())?,
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(m)) => {
            eprintln!("configuration error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(m)) => {
            eprintln!("runtime failure: {m}");
            ExitCode::from(2)
        }
    }
}
