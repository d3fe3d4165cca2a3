use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use sphdg::{convergence_sweep, parse_config, run, simulate, Error, RunConfig};

#[derive(Parser)]
#[command(
    name = "sphdg",
    version,
    about = "Spherically symmetric Euler-Poisson DG solver"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a configuration to its end time.
    Run {
        config: PathBuf,
        /// Output directory; overrides `output.dir`.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads (0 = automatic).
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Convergence sweep over a list of meshes.
    Sweep {
        config: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        meshes: Vec<usize>,
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Run and print the energy ledger as CSV.
    Ledger {
        config: PathBuf,
        #[arg(long)]
        threads: Option<usize>,
    },
}

fn load(path: &Path, threads: Option<usize>) -> Result<RunConfig, Error> {
    let text = fs::read_to_string(path).map_err(|e| Error::Config {
        line: 0,
        msg: format!("cannot read {}: {e}", path.display()),
    })?;
    let mut cfg = parse_config(&text)?;
    if let Some(t) = threads {
        cfg.threads = t;
    }
    Ok(cfg)
}

fn warn(cfg: &RunConfig) {
    for w in cfg.warnings() {
        eprintln!("warning: {w}");
    }
}

fn execute(cmd: Command) -> Result<(), Error> {
    match cmd {
        Command::Run {
            config,
            out,
            threads,
        } => {
            let mut cfg = load(&config, threads)?;
            if out.is_some() {
                cfg.output_dir = out;
            }
            warn(&cfg);
            let report = run(&cfg)?;
            print!("{}", report.summary());
        }
        Command::Sweep {
            config,
            meshes,
            threads,
        } => {
            let cfg = load(&config, threads)?;
            warn(&cfg);
            let table = convergence_sweep(&cfg, &meshes)?;
            eprintln!("reference: {}", table.reference);
            print!("{}", table.to_csv());
        }
        Command::Ledger { config, threads } => {
            let cfg = load(&config, threads)?;
            warn(&cfg);
            print!("{}", simulate(&cfg)?.report.ledger.to_csv());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::Config { .. } => 2,
                Error::SolverAbort { .. } => 3,
                _ => 1,
            })
        }
    }
}
