//! `coeffzero`: eigenvalues of 1D Schrödinger operators from the zeros of
//! power-series coefficients.

mod commands;
mod config;
mod error;
mod report;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use coeffzero::parallel::Executor;

use crate::config::{Command, Format, ParityChoice, PotentialChoice, RunConfig};
use crate::error::{CliError, EXIT_USAGE};

#[derive(Debug, Parser)]
#[command(name = "coeffzero", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Action,

    #[command(flatten)]
    options: Options,
}

#[derive(Debug, Subcommand)]
enum Action {
    /// Converged energies of each level across --orders.
    Solve,
    /// Raw coefficient zeros at every order.
    Scan,
    /// Per-order roots of every level with their digit agreement.
    Track,
    /// Sampled wavefunction of --level at the largest order.
    Wavefunction,
    /// Zeros of the Hill determinant in a Gaussian basis.
    Hill,
    /// Zeros of the momentum-space missing-moment determinant.
    Moments,
    /// Recompute a published benchmark table (1 to 4).
    ReproduceTable { table: u8 },
    /// Export the data behind figure 1 (E0 versus g) or 2 (wavefunctions).
    ExportFigure { figure: u8 },
    /// Re-run the configuration recorded in a previous output file.
    Rerun { file: PathBuf },
}

#[derive(Debug, Args)]
struct Options {
    #[arg(long, global = true, value_enum, default_value = "quartic")]
    potential: PotentialChoice,
    /// Potential definition file; overrides --potential.
    #[arg(long, global = true)]
    potential_file: Option<PathBuf>,
    /// Coupling of the anharmonic, rational or singular term.
    #[arg(long, global = true, default_value = "1", allow_hyphen_values = true)]
    g: String,
    /// Depth parameter of the double well x^4 - Z2 x^2.
    #[arg(
        long = "Z2",
        global = true,
        default_value = "0",
        allow_hyphen_values = true
    )]
    z2: String,
    #[arg(long, global = true, default_value = "0.1")]
    lambda: String,
    /// Highest power kept in the series of exp(x^2) - 1.
    #[arg(long, global = true, default_value_t = 160)]
    truncation: u32,
    #[arg(long, global = true)]
    alpha: Option<String>,
    /// Gaussian width of the reference function (default 1/2).
    #[arg(long, global = true)]
    beta: Option<String>,
    #[arg(long, global = true, default_value_t = 2)]
    sigma: u32,
    #[arg(long, global = true, value_enum, default_value = "even")]
    parity: ParityChoice,
    /// Working precision in decimal digits.
    #[arg(long, global = true)]
    digits: Option<u32>,
    /// Expansion orders, e.g. 10,40,160.
    #[arg(long, global = true, value_delimiter = ',', default_value = "20,40")]
    orders: Vec<usize>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    emin: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    emax: Option<String>,
    #[arg(long, global = true, default_value_t = 64)]
    grid: usize,
    /// Digits a level must stabilize to count as converged.
    #[arg(long, global = true, default_value_t = 10)]
    target: u32,
    /// Level index for `wavefunction`.
    #[arg(long, global = true, default_value_t = 0)]
    level: usize,
    /// Half-width of the sampling grid.
    #[arg(long, global = true, default_value = "4")]
    xmax: String,
    /// Number of sample points (wavefunctions) or couplings (figure 1).
    #[arg(long, global = true, default_value_t = 81)]
    points: usize,
    #[arg(long, global = true, value_enum, default_value = "text")]
    format: Format,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
}

impl Options {
    fn into_config(self, command: Command, table: Option<u8>, figure: Option<u8>) -> RunConfig {
        RunConfig {
            command,
            table,
            figure,
            potential: self.potential,
            potential_file: self.potential_file,
            g: self.g,
            z2: self.z2,
            lambda: self.lambda,
            truncation: self.truncation,
            alpha: self.alpha,
            beta: self.beta,
            sigma: self.sigma,
            parity: self.parity,
            digits: self.digits,
            orders: self.orders,
            emin: self.emin,
            emax: self.emax,
            grid: self.grid,
            target: self.target,
            level: self.level,
            xmax: self.xmax,
            points: self.points,
            format: self.format,
            jobs: self.jobs,
        }
    }
}

fn resolve(cli: Cli) -> Result<RunConfig, CliError> {
    let (command, table, figure) = match cli.command {
        Action::Solve => (Command::Solve, None, None),
        Action::Scan => (Command::Scan, None, None),
        Action::Track => (Command::Track, None, None),
        Action::Wavefunction => (Command::Wavefunction, None, None),
        Action::Hill => (Command::Hill, None, None),
        Action::Moments => (Command::Moments, None, None),
        Action::ReproduceTable { table } => (Command::ReproduceTable, Some(table), None),
        Action::ExportFigure { figure } => (Command::ExportFigure, None, Some(figure)),
        Action::Rerun { file } => {
            let text = std::fs::read_to_string(&file)
                .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", file.display())))?;
            return report::config_from_output(&text).ok_or_else(|| {
                CliError::Usage(format!("{} has no coeffzero v1 header", file.display()))
            });
        }
    };
    Ok(cli.options.into_config(command, table, figure))
}

fn execute(cli: Cli) -> Result<ExitCode, CliError> {
    let config = resolve(cli)?;
    let exec = match config.jobs {
        Some(0) => return Err(CliError::Usage("--jobs must be at least 1".into())),
        Some(n) => Executor::new(n)?,
        None => Executor::available(),
    };
    let report = commands::run(&config, &exec)?;
    let mut stdout = std::io::stdout().lock();
    // A closed pipe is not an error worth reporting.
    let _ = stdout.write_all(report.render(&config).as_bytes());
    Ok(ExitCode::from(report.status.exit_code()))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
