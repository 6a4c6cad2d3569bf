//! Configuration-driven front end: parses run configurations, dispatches
//! to the solver, duality and experiment modules, and writes manifests,
//! CSV tables and SVG figures.
//!
//! Exit codes: 0 success, 1 failed self-test criteria, 2 invalid input,
//! 3 solver failure, 4 I/O failure. Errors are reported on stderr as one
//! JSON object.

pub mod commands;
pub mod config;

use std::ffi::OsString;
use std::fmt;
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use fraclab_core::Error;
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(name = "fraclab", version, about = "Numerical laboratory for unilateral brittle fracture")]
pub struct Cli {
    /// Worker threads for parallel sections (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Seed for randomized perturbations and self-test configurations.
    #[arg(long, global = true, default_value_t = fraclab_core::acceptance::DEFAULT_SEED)]
    pub seed: u64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Minimize the bulk energy on a cracked domain.
    Solve {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Build and verify the conjugate of a stored solution.
    Conjugate {
        /// Output directory of an earlier `solve`.
        #[arg(long)]
        solution: PathBuf,
        /// Defaults to `<solution>/conjugate`.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Perturb the stored values by uniform nodal noise of this size
        /// before certifying.
        #[arg(long, default_value_t = 0.0)]
        noise: f64,
    },
    /// Discrete (1, r)-capacity of a set inside a container.
    Capacity {
        /// `point:x,y`, `segment:x0,y0,x1,y1` or `disk:cx,cy,radius`.
        #[arg(long)]
        set: String,
        #[arg(long)]
        r: f64,
        #[arg(long)]
        n: usize,
        /// `disk:cx,cy,radius` or `rect:x0,y0,x1,y1`.
        #[arg(long, default_value = "disk:0,0,1")]
        container: String,
        /// Sides of polygonal disks.
        #[arg(long, default_value_t = 512)]
        sides: usize,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Gradient convergence along a crack sequence.
    Stability {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Greedy quasi-static unilateral evolution.
    Evolve {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Run the acceptance suite.
    Selftest {
        /// Comma-separated criterion numbers (default: all).
        #[arg(long, value_delimiter = ',')]
        only: Vec<u8>,
        /// Also write `selftest.json` here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorKind {
    Schema,
    Solver,
    Io,
}

#[derive(Debug, Serialize)]
pub struct CliError {
    pub kind: ErrorKind,
    pub message: String,
}

impl CliError {
    pub fn schema(e: impl fmt::Display) -> Self {
        Self { kind: ErrorKind::Schema, message: e.to_string() }
    }

    pub fn io(e: impl fmt::Display) -> Self {
        Self { kind: ErrorKind::Io, message: e.to_string() }
    }

    pub fn exit_code(&self) -> i32 {
        match self.kind {
            ErrorKind::Schema => 2,
            ErrorKind::Solver => 3,
            ErrorKind::Io => 4,
        }
    }

    pub fn report(&self) -> String {
        serde_json::json!({ "error": { "kind": self.kind, "message": self.message, "exit_code": self.exit_code() } })
            .to_string()
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}: {}", self.kind, self.message)
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let kind = match e {
            Error::NonConvergence { .. }
            | Error::LinearAlgebra(_)
            | Error::ResolutionTooCoarse(_)
            | Error::NotSimplyConnected
            | Error::Unconverged(_) => ErrorKind::Solver,
            _ => ErrorKind::Schema,
        };
        Self { kind, message: e.to_string() }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::io(e)
    }
}

/// Runs a parsed command; returns the process exit code on success
/// (nonzero only for failing self-test criteria).
pub fn run(cli: Cli) -> Result<i32, CliError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::schema("--threads must be positive"));
        }
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(CliError::io)?;
    let threads = pool.current_num_threads();
    let ctx = commands::Context { seed: cli.seed, threads };
    pool.install(|| commands::dispatch(&cli.command, &ctx))
}

/// Parses `args` and runs; prints errors as JSON on stderr.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("{}", e.report());
            e.exit_code()
        }
    }
}
