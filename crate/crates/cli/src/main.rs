//! `asclt`: reproducible experiments on weighted log-averages of
//! normalized partial sums.
//!
//! With no arguments this runs the headline convergence experiment
//! (standard normal increments, harmonic weights, arctan integrand,
//! twenty seeds to N = 10^6) and exits 0 when the median error trace
//! decreases through every checkpoint.

mod config;
mod ops;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use config::{ExperimentConfig, Format};

#[derive(Parser)]
#[command(name = "asclt", version, about = "Log-average experiments over normalized partial sums")]
struct Cli {
    #[command(subcommand)]
    command: Option<Command>,

    /// JSON config file; flags override its fields.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Increment law (standard-normal, rademacher, uniform, exponential).
    #[arg(long, global = true)]
    model: Option<String>,

    /// Weight scheme (harmonic, power:THETA, power-log:GAMMA, custom:...).
    #[arg(long, global = true)]
    weights: Option<String>,

    /// Integrand (identity, abs, arctan, constant:C, clamped-linear:LO,HI,
    /// soft-indicator:X0,DELTA).
    #[arg(long, global = true)]
    function: Option<String>,

    /// Longest path simulated or scanned.
    #[arg(long, global = true, value_name = "N")]
    n_max: Option<usize>,

    /// Comma-separated replica seeds; absent means derive from ASCLT_SEED.
    #[arg(long, global = true, value_name = "S1,S2,...")]
    seeds: Option<String>,

    /// Monte Carlo replicas per estimate.
    #[arg(long, global = true)]
    reps: Option<usize>,

    #[arg(long, global = true)]
    alpha: Option<f64>,

    #[arg(long, global = true)]
    beta: Option<f64>,

    #[arg(long, global = true)]
    rho: Option<f64>,

    /// Exponent split in the moment condition (defaults to rho/2).
    #[arg(long, global = true)]
    r: Option<f64>,

    #[arg(long, global = true)]
    mu: Option<u32>,

    #[arg(long, global = true)]
    p: Option<u32>,

    #[arg(long, global = true)]
    eta: Option<f64>,

    /// Artifact path; stdout when absent.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,

    /// Artifact format.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,

    /// Worker threads (0 = machine default). Results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Run the weight-sequence condition checks (C2, C3, growth trace).
    CheckWeights,
    /// Simulate paths and record the log-average at each checkpoint.
    Simulate,
    /// Monte Carlo verification of one moment bound.
    Verify {
        #[arg(value_enum)]
        lemma: LemmaName,
    },
    /// Run the configured operation over a parameter grid.
    Sweep,
    /// Integrate the configured function against the limit law.
    Integral,
}

#[derive(Clone, Copy, ValueEnum)]
enum LemmaName {
    Lemma2,
    Lemma3,
    Lemma4,
    Lemma5,
}

fn build_config(cli: &Cli) -> Result<ExperimentConfig, String> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
            ExperimentConfig::from_json(&text)?
        }
        None => ExperimentConfig::default(),
    };

    if let Some(cmd) = &cli.command {
        cfg.operation = match cmd {
            Command::CheckWeights => "check-weights".into(),
            Command::Simulate => "simulate".into(),
            Command::Verify { lemma } => match lemma {
                LemmaName::Lemma2 => "verify:lemma2".into(),
                LemmaName::Lemma3 => "verify:lemma3".into(),
                LemmaName::Lemma4 => "verify:lemma4".into(),
                LemmaName::Lemma5 => "verify:lemma5".into(),
            },
            Command::Sweep => "sweep".into(),
            Command::Integral => "integral".into(),
        };
    }

    if let Some(v) = &cli.model {
        cfg.model = v.clone();
    }
    if let Some(v) = &cli.weights {
        cfg.weights = v.clone();
    }
    if let Some(v) = &cli.function {
        cfg.function = v.clone();
    }
    if let Some(v) = cli.n_max {
        cfg.n_max = v;
    }
    if let Some(v) = cli.reps {
        cfg.reps = v;
    }
    if let Some(v) = cli.alpha {
        cfg.alpha = v;
    }
    if let Some(v) = cli.beta {
        cfg.beta = v;
    }
    if let Some(v) = cli.rho {
        cfg.rho = v;
        // r tracks its default rho/2 unless set explicitly somewhere.
        if cli.r.is_none() && cli.config.is_none() {
            cfg.r = v / 2.0;
        }
    }
    if let Some(v) = cli.r {
        cfg.r = v;
    }
    if let Some(v) = cli.mu {
        cfg.mu = v;
    }
    if let Some(v) = cli.p {
        cfg.p = v;
    }
    if let Some(v) = cli.eta {
        cfg.eta = v;
    }
    if let Some(v) = &cli.out {
        cfg.out = Some(v.clone());
    }
    if let Some(v) = cli.format {
        cfg.format = v;
    }
    if let Some(v) = cli.threads {
        cfg.threads = v;
    }

    if let Some(spec) = &cli.seeds {
        let seeds: Result<Vec<u64>, _> = spec.split(',').map(|s| s.trim().parse()).collect();
        cfg.seeds = seeds.map_err(|_| format!("malformed --seeds list `{spec}`"))?;
    } else if cfg.seeds.is_empty() {
        if let Ok(env_seed) = std::env::var("ASCLT_SEED") {
            cfg.master_seed = env_seed
                .parse()
                .map_err(|_| format!("ASCLT_SEED must be an unsigned integer, got `{env_seed}`"))?;
        }
    }

    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match build_config(&cli) {
        Ok(cfg) => ExitCode::from(ops::run_config(&cfg) as u8),
        Err(msg) => {
            eprintln!("config error: {msg}");
            ExitCode::from(ops::EXIT_USAGE as u8)
        }
    }
}
