use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use twophase_cli::config::{split_list, RunConfig, Target};
use twophase_cli::describe::{describe, CHECKS};
use twophase_cli::runner;
use twophase_core::scenarios;

#[derive(Parser)]
#[command(name = "twophase", version, about = "Solve two-phase free-boundary scenarios and check their estimates")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a catalogue scenario or a configuration file.
    Run {
        /// Scenario name or path to a configuration file.
        target: String,
        /// Output directory [default: results/<scenario>].
        #[arg(long)]
        out: Option<PathBuf>,
        /// Nodes along the longest spatial axis.
        #[arg(long)]
        grid: Option<usize>,
        /// Time step.
        #[arg(long)]
        dt: Option<f64>,
        /// Comma-separated subset of checks to run.
        #[arg(long)]
        checks: Option<String>,
        /// Tolerance override for checks with a tolerance.
        #[arg(long)]
        tol: Option<f64>,
        /// Seed for perturbation scenarios.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// List the scenario catalogue.
    List,
    /// Print the inequality evaluated by a check.
    Describe { check: String },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::List => {
            for (name, about) in scenarios::list() {
                println!("{name:<26} {about}");
            }
            ExitCode::SUCCESS
        }
        Command::Describe { check } => match describe(&check) {
            Some(text) => {
                println!("{check}: {text}");
                ExitCode::SUCCESS
            }
            None => {
                let known: Vec<&str> = CHECKS.iter().map(|c| c.0).collect();
                eprintln!("error: unknown check `{check}`; known: {}", known.join(", "));
                ExitCode::from(2)
            }
        },
        Command::Run {
            target,
            out,
            grid,
            dt,
            checks,
            tol,
            seed,
        } => {
            let is_file = Path::new(&target).is_file();
            let mut cfg = RunConfig::new(
                if is_file {
                    Target::File(PathBuf::from(&target))
                } else {
                    Target::Scenario(target.clone())
                },
                out.unwrap_or_default(),
            );
            cfg.grid = grid;
            cfg.dt = dt;
            cfg.checks = checks.as_deref().map(split_list);
            cfg.tol = tol;
            cfg.seed = seed;
            let resolved = runner::prepare(&cfg).map(|(scenario, mut cfg)| {
                if cfg.out.as_os_str().is_empty() {
                    cfg.out = Path::new("results").join(&scenario.name);
                }
                (scenario, cfg)
            });
            let result = resolved.and_then(|(scenario, cfg)| {
                let outcome = runner::execute(&scenario, cfg.tol)?;
                runner::write_artifacts(&cfg.out, &outcome.artifacts)?;
                Ok((outcome, cfg.out))
            });
            match result {
                Ok((outcome, dir)) => {
                    print!("{}", outcome.summary());
                    println!("artifacts written to {}", dir.display());
                    if outcome.passed() {
                        ExitCode::SUCCESS
                    } else {
                        ExitCode::from(1)
                    }
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(e.exit_code())
                }
            }
        }
    }
}
