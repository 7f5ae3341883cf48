//! `conelab`: numerical checks for Sobolev spaces on double cones.
//!
//! Exit status: 0 when every check passes, 1 when a check fails or a
//! computation breaks down, 2 for usage and configuration errors.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use conelab::config::{load_config, RunConfig};
use conelab::ConeError;

#[derive(Parser, Debug)]
#[command(name = "conelab", version, about = "Numerical laboratory for Sobolev spaces on double cones")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// JSON run configuration; every key is optional.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory, overriding the configuration.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Test fields: `standard`, `radial`, `fullspace` or a comma list such as `jump,logcounter(0.5)`.
    #[arg(long, global = true)]
    suite: Option<String>,
    /// Record wall-clock time in summary.json (breaks byte-identical reruns).
    #[arg(long, global = true)]
    timing: bool,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Lebesgue and Sobolev norms of the suite.
    Norm {
        #[arg(long)]
        input: Option<PathBuf>,
        /// Exponents, `inf` allowed; defaults to the configured sweep.
        #[arg(long, value_delimiter = ',')]
        p: Vec<String>,
    },
    /// Hardy quotients ‖f/r‖_p / ‖∂_r f‖_p for p < n.
    Hardy {
        #[arg(long, default_value_t = 2)]
        n: usize,
        #[arg(long, default_value_t = 1.0)]
        p: f64,
    },
    /// Radial mean and anti-radial remainder.
    Split {
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Calderón–Zygmund decompositions on the upper half-cone.
    Cz {
        #[arg(long)]
        input: Option<PathBuf>,
        /// Levels as fractions of sup M; defaults to the configured sweep.
        #[arg(long, value_delimiter = ',')]
        alpha: Vec<f64>,
    },
    /// K-functional: rearrangement estimate against the decomposition bound.
    Kfunc {
        #[arg(long, value_delimiter = ',')]
        t: Vec<f64>,
    },
    /// Extension to the whole space with operator-norm ratios.
    Extend {
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long, value_delimiter = ',')]
        p: Vec<String>,
    },
    /// Restriction of whole-plane fields to the cone.
    Restrict {
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Explicit extension from the quadrant cone.
    Pierre {
        #[arg(long, value_delimiter = ',')]
        p: Vec<String>,
    },
    /// Approximation by functions vanishing near the vertex.
    Density {
        #[arg(long, default_value = "radial_exp")]
        field: String,
        #[arg(long, default_value_t = 1.0)]
        p: f64,
        /// Corrector exponent; plain cutoff when absent.
        #[arg(long)]
        k: Option<f64>,
    },
    /// Partial integrals of sign(x_n)|ln r|^{-β} near the vertex.
    Counterexample {
        #[arg(long, default_value_t = 0.25)]
        beta: f64,
    },
    /// Every verification check.
    VerifyAll {
        /// Run only these check ids.
        #[arg(long, value_delimiter = ',')]
        only: Vec<String>,
    },
}

/// Error type of the command layer, carrying the exit status.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Compute(String),
}

impl From<ConeError> for Failure {
    fn from(e: ConeError) -> Self {
        match e {
            ConeError::Config(_) | ConeError::Parse { .. } | ConeError::UnknownField(_) => {
                Failure::Usage(e.to_string())
            }
            other => Failure::Compute(other.to_string()),
        }
    }
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(text) = std::env::var("CONELAB_THREADS") else {
        return Ok(());
    };
    let n: usize = text
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| Failure::Usage(format!("CONELAB_THREADS = `{text}` is not a positive integer")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::Compute(e.to_string()))
}

fn load(common: &Common) -> Result<RunConfig, Failure> {
    let mut cfg = match &common.config {
        Some(path) => load_config(path)?,
        None => RunConfig::default(),
    };
    if let Some(out) = &common.out {
        cfg.output = out.clone();
    }
    if let Some(suite) = &common.suite {
        cfg.suite = conelab::calculus::families::parse_suite(suite)?;
    }
    Ok(cfg)
}

fn run(cli: Cli) -> Result<bool, Failure> {
    configure_threads()?;
    let cfg = load(&cli.common)?;
    commands::dispatch(&cli.command, &cfg, cli.common.timing)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            eprintln!("conelab: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Compute(msg)) => {
            eprintln!("conelab: {msg}");
            ExitCode::from(1)
        }
    }
}
