//! `hsel`: generate instances, run seeded selector trials, summarize results.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use hsel_core::dist::save_instance;
use hsel_core::harness::{instance_file, run_trials, summarize, Algorithm, ExperimentConfig, Family, OptMode, TrialReport};
use hsel_core::preprocess::DiameterBackend;

#[derive(Parser)]
#[command(name = "hsel", version, about = "Hypothesis selection experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyKind {
    Planted,
    HardExpected,
    Paired,
}

#[derive(Subcommand)]
enum Command {
    /// Write one instance (hypotheses and truth) as JSON.
    Gen {
        #[arg(long, value_enum)]
        family: FamilyKind,
        #[arg(long, default_value_t = 10)]
        n: usize,
        /// Domain size (planted).
        #[arg(long, default_value_t = 100)]
        d: usize,
        /// Distance from the truth to its center (planted).
        #[arg(long, default_value_t = 0.1)]
        target_opt: f64,
        /// Intervals per group (hard-expected).
        #[arg(long, default_value_t = 3)]
        k: usize,
        /// Interval length (hard-expected).
        #[arg(long, default_value_t = 5)]
        ell: usize,
        /// Domain size (paired).
        #[arg(long, default_value_t = 10)]
        k_dom: usize,
        /// Perturbation size (paired).
        #[arg(long, default_value_t = 0.2)]
        family_eps: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run trials from a JSON config; flags override config fields.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Comma-separated algorithm names.
        #[arg(long, value_delimiter = ',')]
        algo: Option<Vec<Algorithm>>,
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// `auto` or a number.
        #[arg(long)]
        opt: Option<OptMode>,
        /// `exact` or `approx:ALPHA`.
        #[arg(long)]
        diam: Option<DiameterBackend>,
        /// Record per-call wall time (makes the CSV nondeterministic).
        #[arg(long)]
        timing: bool,
        /// CSV destination; stdout when neither this nor the config sets one.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Summarize a trial CSV as JSON.
    Report {
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

enum Failure {
    Config(String),
    Runtime(String),
}

fn config_err(e: impl std::fmt::Display) -> Failure {
    Failure::Config(e.to_string())
}

fn runtime_err(e: impl std::fmt::Display) -> Failure {
    Failure::Runtime(e.to_string())
}

fn sink(path: Option<&PathBuf>) -> Result<Box<dyn Write>, Failure> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(runtime_err)?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn execute(command: Command) -> Result<(), Failure> {
    match command {
        Command::Gen {
            family,
            n,
            d,
            target_opt,
            k,
            ell,
            k_dom,
            family_eps,
            seed,
            out,
        } => {
            let family = match family {
                FamilyKind::Planted => Family::Planted { n, d, target_opt },
                FamilyKind::HardExpected => Family::HardExpected { n, k, ell },
                FamilyKind::Paired => Family::Paired { n, k_dom, family_eps },
            };
            let file = instance_file(&family, seed).map_err(config_err)?;
            save_instance(&out, &file).map_err(runtime_err)
        }
        Command::Run {
            config,
            algo,
            eps,
            delta,
            trials,
            seed,
            opt,
            diam,
            timing,
            out,
        } => {
            let mut cfg = ExperimentConfig::load(&config).map_err(config_err)?;
            if let Some(a) = algo {
                cfg.algorithms = a;
            }
            cfg.eps = eps.unwrap_or(cfg.eps);
            cfg.delta = delta.unwrap_or(cfg.delta);
            cfg.trials = trials.unwrap_or(cfg.trials);
            cfg.master_seed = seed.unwrap_or(cfg.master_seed);
            cfg.opt = opt.unwrap_or(cfg.opt);
            cfg.diam = diam.unwrap_or(cfg.diam);
            cfg.timing |= timing;
            if out.is_some() {
                cfg.output = out;
            }
            cfg.validate().map_err(config_err)?;
            let report = run_trials(&cfg).map_err(runtime_err)?;
            let mut w = sink(cfg.output.as_ref())?;
            report.write_csv(&mut w).map_err(runtime_err)?;
            w.flush().map_err(runtime_err)
        }
        Command::Report { input, out } => {
            let report = TrialReport::read_csv(File::open(&input).map_err(runtime_err)?).map_err(runtime_err)?;
            let summary = summarize(&report).map_err(runtime_err)?;
            let mut w = sink(out.as_ref())?;
            serde_json::to_writer_pretty(&mut w, &summary).map_err(runtime_err)?;
            writeln!(w).and_then(|_| w.flush()).map_err(runtime_err)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            eprintln!("hsel: config error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("hsel: {msg}");
            ExitCode::from(3)
        }
    }
}
