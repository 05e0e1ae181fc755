use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use relax_hydro::config::load_config;
use relax_hydro::scenario::{run_command, Command};
use relax_hydro::Error;

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Cmd {
    /// One damped Euler run.
    Euler,
    /// One run of the limit aggregation-diffusion equation.
    Limit,
    /// ε-sweep against the limit with a convergence fit.
    Sweep,
    /// Randomized property suites.
    Verify,
    /// Subsolution gauge study on the initial data.
    Subsolution,
}

impl From<Cmd> for Command {
    fn from(c: Cmd) -> Self {
        match c {
            Cmd::Euler => Command::Euler,
            Cmd::Limit => Command::Limit,
            Cmd::Sweep => Command::Sweep,
            Cmd::Verify => Command::Verify,
            Cmd::Subsolution => Command::Subsolution,
        }
    }
}

/// Damped nonlocal Euler flows and their relaxation limit.
///
/// Exit status: 0 when every check passes, 1 when a check fails, 2 for
/// configuration or usage errors, 3 when a solver aborts or I/O fails.
#[derive(Debug, Parser)]
#[command(name = "relax-hydro", version)]
struct Cli {
    #[arg(value_enum)]
    command: Cmd,
    /// Run configuration (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `output.directory`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed for the randomized checks; overrides `seed`.
    #[arg(long)]
    seed: Option<u64>,
}

fn configure_threads() -> Result<(), String> {
    let Ok(value) = std::env::var("RELAX_HYDRO_THREADS") else {
        return Ok(());
    };
    let n: usize = value
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| format!("RELAX_HYDRO_THREADS must be a positive integer, got {value:?}"))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(msg) = configure_threads() {
        eprintln!("error: {msg}");
        return ExitCode::from(2);
    }
    let mut cfg = match load_config(&cli.config) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {}: {e}", cli.config.display());
            return ExitCode::from(match e {
                Error::Io { .. } => 3,
                _ => 2,
            });
        }
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    for a in &cfg.advisories {
        eprintln!("warning: {}", a.message);
    }
    let out = cli.out.unwrap_or_else(|| cfg.output.directory.clone());
    match run_command(cli.command.into(), &cfg, &out) {
        Ok(report) => {
            print!("{}", report.render());
            if report.passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            if matches!(e, Error::Aborted { .. }) {
                eprintln!("diagnostic dump written to {}", out.display());
            }
            ExitCode::from(match e {
                Error::Usage(_) | Error::Validation(_) | Error::Parse { .. } | Error::Domain(_) => 2,
                _ => 3,
            })
        }
    }
}
