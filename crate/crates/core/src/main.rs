use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use bandqubo::config::{Experiment, RunConfig};
use bandqubo::experiments::{self, RunError};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Command {
    Solve,
    Sweep,
    Frontier,
    Cloud,
    Validate,
}

/// Banded portfolio optimization as a QUBO.
#[derive(Debug, Parser)]
#[command(version, about)]
struct Cli {
    command: Command,
    /// TOML run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Overrides the seed in the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory; overrides `out` in the config.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn run(cli: Cli) -> Result<(), RunError> {
    let mut cfg = RunConfig::load(&cli.config)?;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    let requested = match cli.command {
        Command::Solve => Experiment::Solve,
        Command::Sweep => Experiment::Sweep,
        Command::Frontier => Experiment::Frontier,
        Command::Cloud => Experiment::Cloud,
        Command::Validate => Experiment::Validate,
    };
    if cfg.experiment.is_some_and(|e| e != requested) {
        log::warn!("config names experiment {:?}; running {:?}", cfg.experiment.unwrap(), requested);
    }
    if let Command::Validate = cli.command {
        let report = experiments::cmd_validate(&cfg);
        print!("{}", report.render());
        return match report.errors().next() {
            Some(first) => Err(RunError::Usage(format!(
                "validation failed ({} error(s), first: {})",
                report.errors().count(),
                first.code
            ))),
            None => Ok(()),
        };
    }
    let out = experiments::output_dir(&cfg, cli.out);
    match cli.command {
        Command::Solve => {
            let o = experiments::cmd_solve(&cfg, &out)?;
            println!(
                "return {:.6}  volatility {:.6}  budget residual {:.3e}",
                o.portfolio.expected_return, o.portfolio.volatility, o.portfolio.budget_residual
            );
        }
        Command::Sweep => {
            let o = experiments::cmd_sweep(&cfg, &out)?;
            println!(
                "curve minimum at volatility {:.6} (target {})",
                o.minimum.0, o.sigma_target
            );
        }
        Command::Frontier => {
            let o = experiments::cmd_frontier(&cfg, &out)?;
            for (t, s) in &o.optima {
                println!(
                    "target {t}: return {:.6}  volatility {:.6}",
                    s.portfolio.expected_return, s.portfolio.volatility
                );
            }
        }
        Command::Cloud => {
            let (cloud, _) = experiments::cmd_cloud(&cfg, &out)?;
            println!("{} cloud portfolios", cloud.len());
        }
        Command::Validate => unreachable!(),
    }
    println!("wrote {}", out.display());
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
