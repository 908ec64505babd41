use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use sharpdecay::commands::{self, Artifacts, CliError, CliResult};
use sharpdecay::config::Problem;

/// Sharp decay rates, Green's functions and sharp eigenpairs for periodic
/// lattice Schrödinger operators.
#[derive(Debug, Parser)]
#[command(name = "sharpdecay", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// Problem file (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Nodes per axis: band grid for `bands`/`rate`, quadrature cap for `green`/`example`.
    #[arg(long)]
    grid: Option<usize>,
    /// Write the CSV table here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Band structure CSV and interval summary.
    Bands(Common),
    /// Rate bracket at one energy, or a sweep CSV.
    Rate {
        #[command(flatten)]
        common: Common,
        /// RE or RE,IM.
        #[arg(
            long,
            conflicts_with = "lambda_sweep",
            required_unless_present = "lambda_sweep"
        )]
        lambda: Option<String>,
        /// START:STOP:COUNT, log-spaced.
        #[arg(long)]
        lambda_sweep: Option<String>,
    },
    /// Table of G0(m, 0; lambda) over a box.
    Green {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        lambda: String,
        /// Half-width L of the box of sites m.
        #[arg(long = "box", default_value_t = 4)]
        half: usize,
        /// Quadrature convergence tolerance.
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
    },
    /// Construct and check the single-site sharp example.
    Example {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        lambda: String,
        #[arg(long = "box", default_value_t = 20)]
        half: usize,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
    },
    /// Finite-volume eigenvector probe (supporting evidence only).
    Probe {
        #[command(flatten)]
        common: Common,
        /// A,B; defaults to the lowest spectral band.
        #[arg(long)]
        interval: Option<String>,
        /// Box half-widths L.
        #[arg(long, default_value = "20,40,80")]
        sizes: String,
    },
    /// Run the invariant suite; exit status 5 if any check fails.
    Verify {
        /// Optional problem file whose own checks are added to the suite.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Run only checks whose name starts with this prefix.
        #[arg(long)]
        only: Option<String>,
    },
}

fn write_file(path: &Path, bytes: &[u8]) -> CliResult<()> {
    std::fs::write(path, bytes)
        .map_err(|e| CliError::Usage(format!("cannot write {}: {e}", path.display())))
}

/// Table to `--out` (report on stdout) or table on stdout (report on stderr).
fn emit(a: Artifacts, out: Option<&Path>) -> CliResult<()> {
    match (a.table, out) {
        (Some(t), Some(path)) => {
            write_file(path, &t)?;
            print!("{}", a.report);
        }
        (Some(t), None) => {
            std::io::stdout()
                .write_all(&t)
                .map_err(|e| CliError::Usage(e.to_string()))?;
            eprint!("{}", a.report);
        }
        (None, Some(path)) => {
            write_file(path, a.report.as_bytes())?;
            print!("{}", a.report);
        }
        (None, None) => print!("{}", a.report),
    }
    Ok(())
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Bands(c) => {
            let p = Problem::load(&c.config)?;
            emit(commands::bands(&p, c.grid)?, c.out.as_deref())
        }
        Command::Rate {
            common: c,
            lambda,
            lambda_sweep,
        } => {
            let p = Problem::load(&c.config)?;
            let a = match (lambda, lambda_sweep) {
                (Some(l), _) => commands::rate(&p, commands::parse_lambda(&l)?, c.grid, c.seed)?,
                (None, Some(s)) => {
                    commands::sweep(&p, &commands::parse_sweep(&s)?, c.grid, c.seed)?
                }
                (None, None) => {
                    return Err(CliError::Usage("give --lambda or --lambda-sweep".into()))
                }
            };
            emit(a, c.out.as_deref())
        }
        Command::Green {
            common: c,
            lambda,
            half,
            tol,
        } => {
            let p = Problem::load(&c.config)?;
            emit(
                commands::green(&p, commands::parse_lambda(&lambda)?, half, tol, c.grid)?,
                c.out.as_deref(),
            )
        }
        Command::Example {
            common: c,
            lambda,
            half,
            tol,
        } => {
            let p = Problem::load(&c.config)?;
            let a = commands::example(
                &p,
                commands::parse_lambda(&lambda)?,
                half,
                tol,
                c.grid,
                c.seed,
            )?;
            emit(a, c.out.as_deref())
        }
        Command::Probe {
            common: c,
            interval,
            sizes,
        } => {
            let p = Problem::load(&c.config)?;
            let interval = interval
                .as_deref()
                .map(commands::parse_interval)
                .transpose()?;
            emit(
                commands::probe(&p, interval, &commands::parse_sizes(&sizes)?)?,
                c.out.as_deref(),
            )
        }
        Command::Verify {
            config,
            out,
            seed,
            only,
        } => {
            let p = config.as_deref().map(Problem::load).transpose()?;
            let (a, status) = commands::verify(p.as_ref(), seed, only.as_deref());
            emit(a, out.as_deref())?;
            status
        }
    }
}

fn init_threads() -> CliResult<()> {
    let Ok(v) = std::env::var("LATTICE_THREADS") else {
        return Ok(());
    };
    let n: usize = v.parse().ok().filter(|&n| n >= 1).ok_or_else(|| {
        CliError::Usage(format!(
            "LATTICE_THREADS must be a positive integer, got `{v}`"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Usage(e.to_string()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match init_threads().and_then(|()| run(cli)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
