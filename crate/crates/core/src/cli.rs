//! Command-line interface.
//!
//! Exit status: 0 on success, 1 on usage, configuration or I/O errors, 2
//! when a replayed trace does not reproduce its recorded run.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::Serialize;

use crate::config::{EnergyProtocolConfig, ExperimentConfig, InitialEnergy, PhaseMode};
use crate::energy::LossModel;
use crate::error::{Error, Result};
use crate::experiment::{run_experiment, run_sweep, SweepConfig};
use crate::formation::FormationProtocol;
use crate::metrics::ConvergenceReport;
use crate::scheduler::{derive_run_seed, InteractionTrace, Scheduler, SchedulerRng};
use crate::sim::{form_network, replay_trace, simulate, RunSettings, StopReason};
use crate::snapshot::NetworkSnapshot;

#[derive(Debug, Parser)]
#[command(name = "tree-energy", version, about = "Tree formation and energy redistribution in populations of wireless devices")]
struct Cli {
    /// Master seed; overrides the config's `master_seed`.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// JSON config file (a sweep document for `sweep`).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// twophase or concurrent.
    #[arg(long, global = true)]
    mode: Option<PhaseMode>,
    /// Suppress progress output.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Form a tree and stabilize depth/height estimates; emits a snapshot.
    Form {
        #[arg(long)]
        n: Option<usize>,
        /// arbitrary, binary or kary:K.
        #[arg(long)]
        protocol: Option<FormationProtocol>,
        /// uniform or random.
        #[arg(long)]
        initial_energy: Option<String>,
        #[arg(long)]
        total_energy: Option<f64>,
    },
    /// Run a redistribution protocol on a snapshot.
    Redistribute {
        #[arg(long)]
        snapshot: PathBuf,
        /// ideal, lambda:L, rand[:LO:HI], kappa:K or depth:K.
        #[arg(long)]
        energy_protocol: Option<EnergyProtocolConfig>,
        /// Use the N(0.2, 0.05) loss model.
        #[arg(long)]
        lossy: bool,
    },
    /// Run every repetition of a config and write the artifacts.
    Experiment,
    /// Re-execute a trace and verify it reproduces the recorded run.
    Replay {
        #[arg(long)]
        trace: PathBuf,
    },
    /// Run a grid of experiments from a sweep document.
    Sweep,
}

struct Failure {
    code: i32,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = if matches!(e, Error::ReplayMismatch(_)) { 2 } else { 1 };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

/// Runs the CLI with `args` (including the program name) and returns the
/// exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match dispatch(&cli) {
        Ok(()) => 0,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}

fn load_config(cli: &Cli) -> Result<ExperimentConfig> {
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.master_seed = seed;
    }
    if let Some(mode) = cli.mode {
        cfg.phase_mode = mode;
    }
    Ok(cfg)
}

fn emit(cli: &Cli, file: &str, contents: &str) -> Result<()> {
    match &cli.out {
        Some(dir) => {
            fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
            let path = dir.join(file);
            fs::write(&path, contents).map_err(|e| Error::io(&path, e))
        }
        None => {
            let _ = std::io::stdout().write_all(contents.as_bytes());
            Ok(())
        }
    }
}

fn note(cli: &Cli, msg: &str) {
    if !cli.quiet {
        eprintln!("{msg}");
    }
}

#[derive(Serialize)]
struct RedistributeReport {
    report: ConvergenceReport,
    stop: StopReason,
    steps: u64,
    ed_percent: f64,
    loss_percent: f64,
    digest: String,
}

fn dispatch(cli: &Cli) -> std::result::Result<(), Failure> {
    match &cli.command {
        Command::Form {
            n,
            protocol,
            initial_energy,
            total_energy,
        } => {
            let mut cfg = load_config(cli)?;
            if let Some(n) = n {
                cfg.n = *n;
            }
            if let Some(p) = protocol {
                cfg.protocol = *p;
            }
            if let Some(mode) = initial_energy {
                cfg.initial_energy = match mode.as_str() {
                    "uniform" => InitialEnergy::Uniform,
                    "random" => InitialEnergy::Random,
                    other => return Err(Error::Config(format!("unknown initial energy {other:?}")).into()),
                };
            }
            if total_energy.is_some() {
                cfg.total_energy = *total_energy;
            }
            cfg.validate()?;
            let seed = derive_run_seed(cfg.master_seed, 0);
            let (pop, formed, ready) = form_network(&cfg, seed)?;
            note(cli, &format!("tree complete after {formed} steps, estimates correct after {ready}"));
            emit(cli, "snapshot.txt", &NetworkSnapshot::from_population(&pop).to_text())?;
            Ok(())
        }
        Command::Redistribute {
            snapshot,
            energy_protocol,
            lossy,
        } => {
            let mut cfg = load_config(cli)?;
            if let Some(p) = energy_protocol {
                cfg.energy_protocol = *p;
            }
            if *lossy {
                cfg.loss = LossModel::STANDARD_LOSSY;
            }
            // Redistribution never adds edges, so the arity bound is not needed.
            let snap = NetworkSnapshot::read(snapshot, None)?;
            cfg.n = snap.rows.len();
            cfg.validate()?;
            let pop = snap.to_population()?;
            let mut settings = RunSettings::from_config(&cfg);
            settings.record_trace = false;
            settings.sample_every = 0;
            let mut source = Scheduler::random(SchedulerRng::new(derive_run_seed(cfg.master_seed, 0)));
            let out = simulate(pop, &settings, &mut source, &mut |_| {})?;
            let report = RedistributeReport {
                report: out.report,
                stop: out.stop,
                steps: out.total_steps,
                ed_percent: out.row.ed_percent,
                loss_percent: out.row.loss_percent,
                digest: out.digest(),
            };
            note(cli, &serde_json::to_string_pretty(&report).expect("report serializes"));
            emit(cli, "snapshot.txt", &NetworkSnapshot::from_population(&out.population).to_text())?;
            if let Some(dir) = &cli.out {
                write_file(&dir.join("report.json"), &serde_json::to_string_pretty(&report).expect("report serializes"))?;
            }
            Ok(())
        }
        Command::Experiment => {
            let cfg = load_config(cli)?;
            let summary = run_experiment(&cfg, cli.out.as_deref())?;
            let a = &summary.aggregate;
            note(
                cli,
                &format!(
                    "{} runs, converged {:.0}%, tau {:.1} ± {:.1}, ED {:.2}% ± {:.2}, loss {:.2}%",
                    a.runs,
                    100.0 * a.converged_fraction,
                    a.tau.mean,
                    a.tau.stddev,
                    a.ed_percent.mean,
                    a.ed_percent.stddev,
                    a.loss_percent.mean
                ),
            );
            if cli.out.is_none() {
                println!("{}", summary.to_json());
            }
            Ok(())
        }
        Command::Replay { trace } => {
            let text = fs::read_to_string(trace).map_err(|e| Error::io(trace, e))?;
            let parsed = InteractionTrace::parse(&text)?;
            let report = replay_trace(&parsed)?;
            note(cli, &format!("replayed {} steps", report.steps));
            println!("{}", report.digest);
            Ok(())
        }
        Command::Sweep => {
            let path = cli
                .config
                .as_deref()
                .ok_or_else(|| Error::Config("sweep needs --config <sweep.json>".into()))?;
            let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            let mut sweep = SweepConfig::from_json(&text)?;
            if let Some(seed) = cli.seed {
                sweep.base.master_seed = seed;
            }
            if let Some(mode) = cli.mode {
                sweep.base.phase_mode = mode;
            }
            let results = run_sweep(&sweep, cli.out.as_deref())?;
            if cli.out.is_none() {
                print!("{}", crate::experiment::sweep_to_csv(&results));
            } else {
                note(cli, &format!("{} grid points done", results.len()));
            }
            Ok(())
        }
    }
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}
