//! Thin CLI over the experiment harness: `run` executes a configured
//! experiment, `validate` checks a config without running anything.
//!
//! Exit codes: 0 when every assertion passed, 1 on assertion failure or a
//! failed run, 2 on config errors.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use elasto_relent::config::ExperimentConfig;
use elasto_relent::experiments::run_experiment;
use elasto_relent::mollifier::bump_second_moment;

#[derive(Parser)]
#[command(name = "elasto-relent", version, about = "Local vs non-local viscosity-capillarity elastodynamics lab")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a JSON config.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the config's output directory.
        #[arg(long)]
        output_dir: Option<PathBuf>,
        /// Worker threads for eps sweeps (defaults to all cores).
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Validate a JSON config and report the admissible parameter ranges.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn dispatch(cli: Cli) -> elasto_relent::Result<ExitCode> {
    match cli.command {
        Command::Run {
            config,
            output_dir,
            threads,
        } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            if let Some(dir) = output_dir {
                cfg.output_dir = dir;
            }
            if let Some(n) = threads {
                // ignore the error if a pool already exists (repeat runs in
                // one process)
                let _ = rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build_global();
            }
            cfg.validate()?;
            let summary = run_experiment(&cfg)?;
            println!(
                "{}: {}",
                summary.experiment,
                if summary.passed { "PASS" } else { "FAIL" }
            );
            print!("{}", summary.render_checks());
            println!("outputs written to {:?}", cfg.output_dir);
            Ok(if summary.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
        Command::Validate { config } => {
            let cfg = ExperimentConfig::load(&config)?;
            let phi = cfg.validate()?;
            println!("config OK: experiment {}", cfg.experiment.name());
            println!(
                "  kernel: bump, gamma = {} (admissible range (0, {:.6e}]), support half-width b = {:.6}",
                cfg.gamma,
                bump_second_moment() / 2.0,
                phi.scale_b()
            );
            println!(
                "  grid n = {}, eps floor 8/n = {:.6e}",
                cfg.n,
                8.0 / cfg.n as f64
            );
            Ok(ExitCode::SUCCESS)
        }
    }
}
