//! `ddr-plates`: exactness certification, single solves and convergence studies.
//!
//! Exit codes: 0 success, 1 verification failure, 2 configuration error, 3 numerical
//! failure.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{Command, Overrides, RunConfig};

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Verification(String),
    Numerical(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Verification(_) => 1,
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Config(m) | CliError::Verification(m) | CliError::Numerical(m) => m,
        }
    }
}

#[derive(Parser)]
#[command(name = "ddr-plates", version, about = "Plates complex certification and Kirchhoff-Love solver")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Certify the local complex on every cell.
    Verify(Common),
    /// Solve the manufactured problem on one mesh.
    Solve(Common),
    /// Convergence study over a mesh family ordered by decreasing h.
    Convergence(Common),
}

#[derive(Args)]
struct Common {
    /// Flat `key = value` configuration file; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Mesh source: `builtin`, a generator (`tri:8`, `cart:4`, `kershaw:8:0.5`) or a
    /// polymesh file. Repeat or separate with commas.
    #[arg(long, value_delimiter = ',')]
    mesh: Vec<String>,
    /// Degree ℓ ≥ 2 of the stress space.
    #[arg(long, short = 'l')]
    degree: Option<usize>,
    /// Degree k = ℓ + 1 of the vector space.
    #[arg(long)]
    k: Option<usize>,
    /// Bending modulus.
    #[arg(long = "D")]
    d: Option<f64>,
    /// Poisson ratio in [0, 1).
    #[arg(long)]
    nu: Option<f64>,
    /// `trig` or `zero`.
    #[arg(long)]
    solution: Option<String>,
    /// Output file (certificate report or CSV).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Random samples per identity.
    #[arg(long)]
    samples: Option<usize>,
    /// Certificate tolerance.
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long, alias = "identity_tol")]
    identity_tol: Option<f64>,
    /// Allowed shortfall of the fitted slope below ℓ + 1.
    #[arg(long, alias = "rate_tolerance")]
    rate_tolerance: Option<f64>,
    /// Solve independent meshes concurrently.
    #[arg(long)]
    parallel: bool,
    /// Record solve times in the CSV (otherwise zeros, for reproducible output).
    #[arg(long)]
    timing: bool,
    /// Certify every cell before solving.
    #[arg(long, alias = "check_exactness")]
    check_exactness: bool,
    /// Test hook: corrupt the local uCsym matrix before certification.
    #[arg(long, alias = "inject_fault", hide = true)]
    inject_fault: bool,
}

/// Returns the summary and whether it goes to stdout (stdout is free unless a report or
/// CSV was streamed there).
fn run(command: Command, c: Common) -> Result<(String, bool), CliError> {
    let file = match &c.config {
        Some(p) => config::read_config_file(p)?,
        None => Default::default(),
    };
    let o = Overrides {
        meshes: c.mesh,
        degree: c.degree,
        k: c.k,
        d: c.d,
        nu: c.nu,
        solution: c.solution,
        out: c.out,
        seed: c.seed,
        samples: c.samples,
        tol: c.tol,
        identity_tol: c.identity_tol,
        rate_tolerance: c.rate_tolerance,
        parallel: c.parallel,
        timing: c.timing,
        check_exactness: c.check_exactness,
        inject_fault: c.inject_fault,
    };
    let cfg = RunConfig::build(command, &file, o)?;
    let stdout_free = command == Command::Solve || cfg.out.is_some();
    let summary = match command {
        Command::Verify => commands::run_verification(&cfg),
        Command::Solve => commands::run_solve(&cfg),
        Command::Convergence => commands::run_convergence_study(&cfg),
    }?;
    Ok((summary, stdout_free))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    let (command, common) = match cli.command {
        Sub::Verify(c) => (Command::Verify, c),
        Sub::Solve(c) => (Command::Solve, c),
        Sub::Convergence(c) => (Command::Convergence, c),
    };
    match run(command, common) {
        Ok((summary, true)) => {
            println!("{summary}");
            ExitCode::SUCCESS
        }
        Ok((summary, false)) => {
            eprintln!("{summary}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", e.message());
            ExitCode::from(e.code())
        }
    }
}
