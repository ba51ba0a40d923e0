//! Command-line front end: argument parsing, configuration loading and report output.
//!
//! Exit codes: 0 when every check passes, 1 when a mathematical check fails (negative
//! weight, identity gap, vanishing solution), 2 for usage and configuration errors.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use factorineq::par::Execution;

mod commands;
pub mod config;
pub mod report;

#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    /// Bad flags, unreadable or invalid configuration.
    Usage(String),
    /// A computation could not be carried out (e.g. the ODE solver failed).
    Math(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Math(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "error: {m}"),
            CliError::Math(m) => write!(f, "failed: {m}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ExecArg {
    Sequential,
    Parallel,
}

impl From<ExecArg> for Execution {
    fn from(e: ExecArg) -> Self {
        match e {
            ExecArg::Sequential => Execution::Sequential,
            ExecArg::Parallel => Execution::Parallel,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CoeffFormat {
    Table,
    Csv,
    Json,
}

#[derive(Debug, Parser)]
#[command(name = "factorineq", version, about = "Derive, verify and construct integral inequalities from operator factorizations")]
pub struct Cli {
    /// Print the JSON report on stdout instead of the text summary.
    #[arg(long, global = true)]
    pub json: bool,
    /// Run data-parallel loops on the thread pool or sequentially.
    #[arg(long, global = true, value_enum, default_value = "parallel")]
    pub exec: ExecArg,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the triangle of t_{n,k} coefficients.
    Coeffs {
        #[arg(long, default_value_t = 10)]
        max_n: u32,
        #[arg(long, value_enum, default_value = "table")]
        format: CoeffFormat,
    },
    /// Tabulate the weights of a configured system and scan them for sign.
    Derive {
        #[arg(long)]
        config: PathBuf,
        /// Number of sample points (defaults to scan.points from the config).
        #[arg(long)]
        grid: Option<usize>,
        /// CSV file for (x, a_n^2, c_{n,0}, ...); stdout gets the summary.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Verify the integral identity on a seeded corpus of test functions.
    Verify {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        corpus: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build a_0 = -a_1 u'/u (a_1 = sqrt(p)) from a positive solution of -(p u')' = g u.
    Construct {
        #[arg(long = "p", allow_hyphen_values = true)]
        p: String,
        #[arg(long = "g", allow_hyphen_values = true)]
        g: String,
        /// Interval `a,b`.
        #[arg(long, allow_hyphen_values = true)]
        domain: String,
        /// Start with u ~ (x - a)^sigma.
        #[arg(long, allow_hyphen_values = true, conflicts_with = "ic")]
        sigma: Option<String>,
        /// Start with u(a+) = u0 and flux p u'(a+) = v0.
        #[arg(long, allow_hyphen_values = true)]
        ic: Option<String>,
        #[arg(long = "param")]
        params: Vec<String>,
        #[arg(long, default_value_t = 200)]
        grid: usize,
        /// Tolerance for the round trip back to g.
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Positivity check for -(r y')' = c r P y on (0, R), or its critical constant.
    HiCheck {
        #[arg(long = "P", allow_hyphen_values = true)]
        big_p: String,
        #[arg(long = "R")]
        r: String,
        #[arg(long, allow_hyphen_values = true, required_unless_present = "critical", conflicts_with = "critical")]
        c: Option<String>,
        #[arg(long)]
        critical: bool,
        #[arg(long = "param")]
        params: Vec<String>,
    },
    /// Zeros of J_nu and of G(z) = (1-gamma) J_nu + (2+mu-gamma) z J_nu'.
    Zeros {
        /// `nu,k`: the k-th positive zero of J_nu.
        #[arg(long, allow_hyphen_values = true, required_unless_present = "g")]
        bessel: Option<String>,
        /// `gamma,mu,nu`: the first positive zero of G.
        #[arg(long = "g", allow_hyphen_values = true)]
        g: Option<String>,
    },
    /// Browse and verify the built-in catalog of inequalities.
    Catalog {
        #[command(subcommand)]
        action: CatalogCmd,
    },
}

#[derive(Debug, Subcommand)]
pub enum CatalogCmd {
    /// List entry ids.
    List,
    /// Show parameters, coefficients and expected weights of an entry.
    Show {
        id: String,
        #[arg(long = "param")]
        params: Vec<String>,
    },
    /// Scan, compare with closed forms and verify on a corpus. `all` checks every entry at
    /// its defaults.
    Verify {
        id: String,
        #[arg(long = "param")]
        params: Vec<String>,
        #[arg(long)]
        corpus: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Parse `argv` (including the program name) and run, writing to the given streams.
pub fn run_with<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = out.write_all(text.as_bytes());
                    0
                }
                _ => {
                    let _ = err.write_all(text.as_bytes());
                    2
                }
            };
        }
    };
    match commands::dispatch(&cli, out) {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            let _ = writeln!(err, "{e}");
            e.exit_code()
        }
    }
}

/// Run with the process streams.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(argv, &mut stdout.lock(), &mut stderr.lock())
}
