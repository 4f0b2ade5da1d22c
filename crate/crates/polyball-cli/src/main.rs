//! `polyball`: verification suites, dilation runs and transform evaluation.

mod commands;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Parser, Debug)]
#[command(name = "polyball", version, about = "Free pluriharmonic functions on noncommutative polyballs")]
struct Cli {
    #[command(flatten)]
    config: RunConfig,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the identity suite and write a JSON report.
    Verify,
    /// Dilate a multi-Toeplitz kernel read from JSON.
    Dilate {
        /// Kernel file: {side, n, e_dim, max_len, generator}.
        kernel: PathBuf,
    },
    /// Evaluate a transform at a polyball point.
    Transform {
        #[arg(value_enum)]
        kind: TransformKind,
        /// Inputs file: {point, mu | family, operator}.
        inputs: PathBuf,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TransformKind {
    Berezin,
    Poisson,
    Herglotz,
    Fantappie,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct RunConfig {
    /// Generators per factor, comma separated.
    #[arg(long, global = true, value_delimiter = ',', default_value = "2,1")]
    pub n: Vec<usize>,
    /// Truncation degree per factor.
    #[arg(long, global = true, value_delimiter = ',', default_value = "3,3")]
    pub degrees: Vec<usize>,
    /// Kernel word length L.
    #[arg(long = "max-len", global = true, default_value_t = 3)]
    pub max_len: usize,
    #[arg(long, global = true, default_value_t = 1e-8)]
    pub tol: f64,
    #[arg(long = "rank-tol", global = true, default_value_t = 1e-10)]
    pub rank_tol: f64,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[arg(long = "r-grid", global = true, value_delimiter = ',', default_value = "0.1,0.3,0.5,0.7,0.9")]
    pub r_grid: Vec<f64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    #[serde(skip)]
    pub jobs: Option<usize>,
    /// Report path; stdout when absent.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
}

impl RunConfig {
    fn validate(&self) -> Result<(), Failure> {
        let bad = |m: String| Err(Failure::Config(m));
        if self.n.is_empty() || self.n.contains(&0) {
            return bad(format!("--n must list positive generator counts, got {:?}", self.n));
        }
        if self.degrees.len() != self.n.len() {
            return bad(format!(
                "--degrees has {} entries but --n has {}",
                self.degrees.len(),
                self.n.len()
            ));
        }
        if self.degrees.contains(&0) {
            return bad(format!("degenerate truncation: degrees {:?} must be >= 1", self.degrees));
        }
        if self.max_len == 0 {
            return bad("--max-len must be >= 1".into());
        }
        if self.tol.is_nan() || self.tol <= 0.0 || self.rank_tol.is_nan() || self.rank_tol <= 0.0 {
            return bad("--tol and --rank-tol must be positive".into());
        }
        if self.r_grid.is_empty() || self.r_grid.iter().any(|r| !(0.0..1.0).contains(r)) {
            return bad(format!("--r-grid values must lie in [0, 1), got {:?}", self.r_grid));
        }
        if self.jobs == Some(0) {
            return bad("--jobs must be >= 1".into());
        }
        Ok(())
    }
}

/// Failure classes with their exit codes.
#[derive(Debug)]
pub enum Failure {
    Internal(String),
    Config(String),
    NotPsd(String),
    Domain(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Internal(_) => 1,
            Failure::Config(_) => 2,
            Failure::NotPsd(_) => 3,
            Failure::Domain(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Internal(m) | Failure::Config(m) | Failure::NotPsd(m) | Failure::Domain(m) => m,
        }
    }
}

impl From<polyball::Error> for Failure {
    fn from(e: polyball::Error) -> Self {
        use polyball::Error as E;
        match e {
            E::NotPsd { min_eig } => {
                Failure::NotPsd(format!("kernel is not positive semidefinite: min eigenvalue {min_eig:e}"))
            }
            E::NotInPolyball(_)
            | E::CommutationViolation(_)
            | E::Divergence(_)
            | E::SingularResolvent { .. } => {
                Failure::Domain(e.to_string())
            }
            E::Json(_)
            | E::ShapeMismatch(_)
            | E::InvalidArgument(_)
            | E::NotInLambda { .. }
            | E::MissingGenerator { .. }
            | E::NonHermitian { .. }
            | E::WordOutOfRange { .. }
            | E::IndexOutOfRange(_) => Failure::Config(e.to_string()),
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    cli.config.validate()?;
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(j) = cli.config.jobs {
        pool = pool.num_threads(j);
    }
    let pool = pool.build().map_err(|e| Failure::Internal(e.to_string()))?;
    pool.install(|| match &cli.command {
        Command::Verify => verify::cmd_verify(&cli.config),
        Command::Dilate { kernel } => commands::cmd_dilate(kernel, &cli.config),
        Command::Transform { kind, inputs } => commands::cmd_transform(*kind, inputs, &cli.config),
    })
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("POLYBALL_LOG", "warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("polyball: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
