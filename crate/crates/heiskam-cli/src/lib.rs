//! Command-line front end: argument parsing, input validation, artifact
//! writing and exit codes.

pub mod commands;
pub mod json;
pub mod suite;
pub mod tokens;

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_NO_CONVERGENCE: i32 = 3;
pub const EXIT_INADMISSIBLE: i32 = 4;
pub const EXIT_INTERNAL: i32 = 5;

/// Environment variable capping the worker threads.
pub const THREADS_ENV: &str = "HEISKAM_THREADS";

/// An error carrying its exit code.
#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn input(message: String) -> Self {
        Self {
            code: EXIT_INPUT,
            message,
        }
    }

    pub fn internal(message: String) -> Self {
        Self {
            code: EXIT_INTERNAL,
            message,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

pub type CliResult<T> = Result<T, CliError>;

/// Read a non-empty input file.
pub fn read_input(path: &Path) -> CliResult<String> {
    let s = std::fs::read_to_string(path)
        .map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
    if s.trim().is_empty() {
        return Err(CliError::input(format!("{}: empty input", path.display())));
    }
    Ok(s)
}

pub fn write_output(path: &Path, contents: &str) -> CliResult<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)
            .map_err(|e| CliError::input(format!("{}: {e}", dir.display())))?;
    }
    std::fs::write(path, contents).map_err(|e| CliError::input(format!("{}: {e}", path.display())))
}

#[derive(Debug, Parser)]
#[command(
    name = "heiskam",
    version,
    about = "Cohomological equations and KAM conjugation for ℤ² actions on Heisenberg nilmanifolds"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SchrodingerOp {
    Transfer,
    Split,
    Ltau,
    Leta,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Certify a frequency pair and tabulate its small divisors.
    DiophantineCheck {
        /// Comma-separated τ⃗, e.g. `sqrt2,sqrt3`.
        #[arg(long, allow_hyphen_values = true)]
        tau: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        eta: Option<String>,
        #[arg(long)]
        gamma: Option<String>,
        /// Certification box `|m|_∞ ≤ bound`.
        #[arg(long, default_value_t = tokens::CLI_SEARCH_BOUND)]
        bound: usize,
        /// Cutoff of the divisor tables.
        #[arg(long, default_value_t = 16)]
        cutoff: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve or split `L_τ P = f`, `L_η P = g` on the torus.
    SolveTorus {
        #[arg(long = "in", num_args = 2, value_names = ["F", "G"], required = true)]
        inputs: Vec<PathBuf>,
        #[arg(long)]
        pair: Option<PathBuf>,
        /// Sobolev indices of the tame-ratio report.
        #[arg(long, default_value = "0,1,2,3")]
        s: String,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Solve in a Schrödinger representation on a grid dump.
    SolveSchrodinger {
        #[arg(long, value_enum)]
        op: SchrodingerOp,
        /// Grid dump stems (`<stem>.json` + `<stem>.bin`): one for ltau/leta, two otherwise.
        #[arg(long = "in", num_args = 1..=2, required = true)]
        inputs: Vec<PathBuf>,
        /// Pair spec file defining the rotation frame.
        #[arg(long)]
        frame: Option<PathBuf>,
        /// Output stem of the solution dump.
        #[arg(long)]
        out: PathBuf,
    },
    /// Dimensions of the constant cocycles and of the first cohomology.
    Cohomology {
        #[arg(long, default_value_t = 2)]
        n: usize,
    },
    /// Run the conjugation scheme and write its trace.
    KamRun {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// Seed of the manufactured family (overridden by the config file).
        #[arg(long)]
        seed: Option<u64>,
        /// Initial size of the manufactured family (overridden by the config file).
        #[arg(long)]
        eps0: Option<f64>,
    },
    /// Randomized consistency suite with a deterministic CSV report.
    VerifySuite {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "verify_suite.csv")]
        out: PathBuf,
    },
}

fn configure_threads() {
    if let Some(n) = std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
    {
        // A second call in the same process keeps the first pool.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global();
    }
}

/// Parse `args` (program name first), run, and return the exit code.
pub fn dispatch<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
        }
    };
    configure_threads();
    match commands::run(cli.command) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {}", e.message);
            e.code
        }
    }
}
