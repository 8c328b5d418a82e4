use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use rsnc::harness::{generate_scenario, run_algorithm, run_experiment, ExperimentConfig, GenConfig, PRESETS};
use rsnc::io::{load_scenario, log_to_json, save_log, save_scenario};
use rsnc::model::{Algorithm, Request};
use rsnc::oracle::OracleLimits;
use rsnc::{RsncError, RsncRun};

#[derive(Parser)]
#[command(name = "rsnc", version, about = "Rate- and deadline-aware coded broadcast scheduling")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random scenario from a generator config.
    Gen {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Run one scheduler on a scenario and write its transmission log.
    Run {
        #[arg(long)]
        algo: Algorithm,
        #[arg(long)]
        scenario: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Vertex limit for the exhaustive oracle.
        #[arg(long, default_value_t = OracleLimits::default().max_vertices)]
        oracle_max_vertices: usize,
    },
    /// Run a parameter sweep and write aggregated results as CSV.
    Sweep {
        /// Preset name or path to an experiment JSON file.
        #[arg(long)]
        experiment: String,
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Fill the runtime column (makes output nondeterministic).
        #[arg(long)]
        timing: bool,
    },
    /// Print the round-by-round decisions of the rate-aware scheduler.
    Trace {
        #[arg(long)]
        scenario: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        // output piped into e.g. `head`
        Err(RsncError::Io(e)) if e.kind() == io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                RsncError::OracleLimit { .. } => ExitCode::from(3),
                _ => ExitCode::from(2),
            }
        }
    }
}

fn execute(command: Command) -> rsnc::Result<()> {
    match command {
        Command::Gen { config, seed, output } => {
            let mut cfg: GenConfig = serde_json::from_str(&fs::read_to_string(config)?)?;
            if let Some(seed) = seed {
                cfg.seed = seed;
            }
            save_scenario(output, &generate_scenario(&cfg)?)
        }
        Command::Run { algo, scenario, output, oracle_max_vertices } => {
            let s = load_scenario(scenario)?;
            let limits = OracleLimits { max_vertices: oracle_max_vertices, ..OracleLimits::default() };
            let log = run_algorithm(algo, &s, limits)?;
            match output {
                Some(path) => save_log(path, &log),
                None => {
                    println!("{}", log_to_json(&log)?);
                    Ok(())
                }
            }
        }
        Command::Sweep { experiment, samples, seed, output, timing } => {
            let mut cfg = load_experiment(&experiment)?;
            if let Some(n) = samples {
                cfg.samples = n;
            }
            if let Some(seed) = seed {
                cfg.seed = seed;
            }
            let table = run_experiment(&cfg, timing)?;
            for s in &table.skipped {
                eprintln!("note: {} {} sample(s) skipped at {} (oracle limit)", s.count, s.algorithm, s.grid_point);
            }
            match output {
                Some(path) => table.write_csv(BufWriter::new(File::create(path)?)),
                None => table.write_csv(io::stdout().lock()),
            }
        }
        Command::Trace { scenario } => trace(&load_scenario(scenario)?),
    }
}

fn load_experiment(name: &str) -> rsnc::Result<ExperimentConfig> {
    if let Some(cfg) = ExperimentConfig::preset(name) {
        return Ok(cfg);
    }
    if Path::new(name).is_file() {
        return Ok(serde_json::from_str(&fs::read_to_string(name)?)?);
    }
    Err(RsncError::InvalidConfig(format!("{name:?} is neither a preset ({}) nor a file", PRESETS.join(", "))))
}

fn show(set: impl IntoIterator<Item = Request>) -> String {
    let items: Vec<String> = set.into_iter().map(|r| r.to_string()).collect();
    format!("{{{}}}", items.join(" "))
}

fn trace(scenario: &rsnc::Scenario) -> rsnc::Result<()> {
    let mut out = io::stdout().lock();
    let mut run = RsncRun::new(scenario)?;
    let mut round = 1;
    let mut clock = 0.0;
    while let Some(decision) = run.step()? {
        writeln!(out, "round {round} (t = {clock})")?;
        for (k, rung) in decision.rungs.iter().enumerate() {
            let mark = if k == decision.chosen_rate_index { "*" } else { " " };
            writeln!(
                out,
                " {mark} k={k} Tr={} clique={} rate={} U={} loss={} f={} l={}",
                rung.threshold,
                show(rung.clique.members.iter().copied()),
                rung.rate,
                rung.u,
                rung.loss,
                show(rung.f.iter().copied()),
                show(rung.l.iter().copied()),
            )?;
        }
        let tx = &decision.transmission;
        let packets: Vec<String> = tx.coded_set.iter().map(|p| p.to_string()).collect();
        writeln!(out, "   send {} at {} for {} s", packets.join("+"), tx.rate, tx.delay)?;
        clock += tx.delay;
        round += 1;
    }
    let log = run.finish();
    writeln!(out, "transmissions: {}, misses: {}/{}", log.transmissions.len(), log.misses(), log.outcomes.len())?;
    Ok(())
}
