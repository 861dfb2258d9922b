use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use mints_harness::config::Family;
use mints_harness::{aggregate_dirs, exit, parse_config_for, run_experiment, ConfigError};

#[derive(Parser)]
#[command(name = "mints", version, about = "Seeded posterior-sampling experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Finite-armed Gaussian-likelihood bandit.
    Mab(RunArgs),
    /// Finite-armed bandit with Lipschitz-smooth means.
    #[command(name = "mab_lipschitz")]
    MabLipschitz(RunArgs),
    /// Posted-price selling over a price grid.
    Pricing(RunArgs),
    /// Lipschitz bandit on the unit cube.
    #[command(name = "lipschitz_continuum")]
    LipschitzContinuum(RunArgs),
    /// Center-of-gravity method on a rectangle.
    Cog(RunArgs),
    /// Ellipsoid method.
    Ellipsoid(RunArgs),
    /// Parse and validate a configuration file.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Mean ± 2·stderr tables over run directories.
    Aggregate {
        #[arg(required = true)]
        dirs: Vec<PathBuf>,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// Overrides `seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides `replications`.
    #[arg(long)]
    reps: Option<u64>,
    /// Replications run concurrently; does not change the output.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Overrides `output_dir`.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn read(path: &PathBuf) -> Result<String, ConfigError> {
    std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.clone(),
        source,
    })
}

fn config_failure(path: &Path, e: ConfigError) -> ExitCode {
    eprintln!("{}: {e}", path.display());
    ExitCode::from(exit::CONFIG as u8)
}

fn run(family: Family, args: RunArgs) -> ExitCode {
    let mut cfg = match read(&args.config).and_then(|text| parse_config_for(&text, Some(family))) {
        Ok(c) => c,
        Err(e) => return config_failure(&args.config, e),
    };
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if let Some(r) = args.reps {
        if r == 0 {
            return config_failure(
                &args.config,
                ConfigError::Invalid {
                    path: "replications".into(),
                    message: "--reps must be at least 1".into(),
                },
            );
        }
        cfg.replications = r;
    }
    if let Some(o) = args.out {
        cfg.output_dir = o;
    }
    match run_experiment(&cfg, args.jobs) {
        Ok(s) => {
            eprintln!(
                "{} {} reps={} T={} mean R(T)={:.6} ± {:.6} in {:.2?} -> {}",
                s.family,
                s.policy,
                s.final_regret.len(),
                s.rounds,
                s.mean_trace.last().copied().unwrap_or(0.0),
                s.stderr_trace.last().copied().unwrap_or(0.0),
                s.wall_clock,
                cfg.output_dir.display()
            );
            ExitCode::from(exit::OK as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit::RUNTIME as u8)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let dirs = match cli.command {
        Command::Mab(a) => return run(Family::Mab, a),
        Command::MabLipschitz(a) => return run(Family::MabLipschitz, a),
        Command::Pricing(a) => return run(Family::Pricing, a),
        Command::LipschitzContinuum(a) => return run(Family::LipschitzContinuum, a),
        Command::Cog(a) => return run(Family::Cog, a),
        Command::Ellipsoid(a) => return run(Family::Ellipsoid, a),
        Command::Validate { config } => {
            return match read(&config).and_then(|t| parse_config_for(&t, None)) {
                Ok(c) => {
                    let mut text = format!("ok: {} config_hash={}\n", c.family, c.config_hash());
                    for (k, v) in c.resolved() {
                        text.push_str(&format!("{k} = {v}\n"));
                    }
                    // A closed pipe (`| head`) is not a validation failure.
                    let _ = std::io::stdout().write_all(text.as_bytes());
                    ExitCode::from(exit::OK as u8)
                }
                Err(e) => config_failure(&config, e),
            };
        }
        Command::Aggregate { dirs } => dirs,
    };
    match aggregate_dirs(&dirs) {
        Ok(rows) => {
            let mut w = csv::Writer::from_writer(std::io::stdout());
            for r in rows {
                if let Err(e) = w.serialize(r) {
                    eprintln!("error: {e}");
                    return ExitCode::from(exit::RUNTIME as u8);
                }
            }
            if let Err(e) = w.flush() {
                eprintln!("error: {e}");
                return ExitCode::from(exit::RUNTIME as u8);
            }
            ExitCode::from(exit::OK as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit::RUNTIME as u8)
        }
    }
}
