use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use nhrel_cli::surface::{sample_constraint_surface, surface_csv, SurfaceRegime};
use nhrel_cli::sweep::{configs_in, sweep};
use nhrel_cli::{execute, load_config, ExitKind};

/// Special-relativistic particle dynamics with a nonholonomic constraint.
#[derive(Debug, Parser)]
#[command(name = "nhrel", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Integrate one configuration and write `<name>.csv` and `<name>.json`.
    Simulate {
        config: PathBuf,
        /// Run the finite-difference and independent-integration oracles.
        #[arg(long)]
        verify: bool,
        /// Output directory; overrides `[output] dir`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print samples of the velocity-space constraint surface as CSV.
    Surface {
        #[arg(long, value_enum)]
        regime: SurfaceRegime,
        #[arg(long, default_value_t = 1.0)]
        m0: f64,
        /// Points per axis.
        #[arg(long, default_value_t = 41)]
        grid: usize,
        #[arg(long, default_value_t = 1.0)]
        c: f64,
        /// Half-width of the sampled square.
        #[arg(long, default_value_t = 3.0)]
        extent: f64,
        /// Write to a file instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run every `*.ini` in a directory in parallel.
    Sweep {
        dir: PathBuf,
        #[arg(long)]
        verify: bool,
    },
}

fn exit(kind: ExitKind) -> ExitCode {
    ExitCode::from(kind.code() as u8)
}

fn simulate(config: PathBuf, verify: bool, out: Option<PathBuf>) -> ExitCode {
    let mut cfg = match load_config(&config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return exit(ExitKind::Config);
        }
    };
    cfg.verify = verify;
    if let Some(dir) = out {
        cfg.output.dir = dir;
    }
    let dir = cfg.output.dir.clone();
    match execute(&cfg, &dir) {
        Ok(report) => {
            if let Some(e) = &report.error {
                eprintln!("error: {} ({})", e.message, e.kind);
            }
            if let Some(v) = report.verification.as_ref().filter(|v| !v.passed) {
                for f in &v.failures {
                    eprintln!("verification failed: {f}");
                }
            }
            println!("{}", report.csv.display());
            println!("{}", report.json.display());
            exit(report.exit)
        }
        Err(e) => {
            eprintln!("error: cannot write output to {}: {e}", dir.display());
            exit(ExitKind::Io)
        }
    }
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Simulate { config, verify, out } => simulate(config, verify, out),
        Command::Surface {
            regime,
            m0,
            grid,
            c,
            extent,
            out,
        } => {
            if !(m0 > 0.0 && c > 0.0 && extent > 0.0) || grid == 0 {
                eprintln!("error: m0, c and extent must be positive and grid at least 1");
                return exit(ExitKind::Config);
            }
            let csv = surface_csv(&sample_constraint_surface(regime, m0, c, grid, extent));
            match out {
                Some(path) => {
                    if let Err(e) = std::fs::write(&path, csv) {
                        eprintln!("error: {}: {e}", path.display());
                        return exit(ExitKind::Io);
                    }
                }
                None => print!("{csv}"),
            }
            exit(ExitKind::Ok)
        }
        Command::Sweep { dir, verify } => {
            let paths = match configs_in(&dir) {
                Ok(p) => p,
                Err(e) => {
                    eprintln!("error: {}: {e}", dir.display());
                    return exit(ExitKind::Io);
                }
            };
            if paths.is_empty() {
                eprintln!("error: no .ini files in {}", dir.display());
                return exit(ExitKind::Config);
            }
            let results = sweep(&paths, verify);
            for r in &results {
                println!("{} {:?}: {}", r.config.display(), r.exit, r.message);
            }
            exit(results.iter().map(|r| r.exit).max().unwrap_or(ExitKind::Ok))
        }
    }
}
