use aniso_harness::{Config, EXPERIMENTS};
use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::time::Instant;

/// Desk-scale experiments for anisotropic nonlocal operators.
#[derive(Parser)]
#[command(name = "aniso", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment from a TOML config file.
    Run {
        /// Path to the configuration file.
        #[arg(long)]
        config: PathBuf,
        /// Overrides the seed from the config.
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory for report.json, CSVs and figures.
        #[arg(long, default_value = "aniso-out")]
        out: PathBuf,
        /// Overrides the worker count from the config (0 = all cores).
        #[arg(long)]
        threads: Option<usize>,
    },
    /// List the available experiments.
    List,
}

fn main() {
    let cli = Cli::parse();
    match cli.command {
        Command::List => {
            for name in EXPERIMENTS {
                println!("{name}");
            }
        }
        Command::Run {
            config,
            seed,
            out,
            threads,
        } => {
            let text = match std::fs::read_to_string(&config) {
                Ok(t) => t,
                Err(e) => {
                    eprintln!("cannot read {}: {e}", config.display());
                    std::process::exit(101);
                }
            };
            let mut cfg = match Config::from_toml(&text) {
                Ok(c) => c,
                Err(e) => {
                    eprintln!("{e}");
                    std::process::exit(101);
                }
            };
            // CLI flags take precedence over config fields.
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if let Some(t) = threads {
                cfg.threads = t;
            }
            let started = Instant::now();
            let outcome = match aniso_harness::run(&cfg) {
                Ok(o) => o,
                Err(e) => {
                    eprintln!("{e}");
                    std::process::exit(101);
                }
            };
            if let Err(e) = std::fs::create_dir_all(&out) {
                eprintln!("cannot create {}: {e}", out.display());
                std::process::exit(101);
            }
            let report_path = out.join("report.json");
            std::fs::write(&report_path, outcome.report.to_json()).expect("write report");
            for (name, body) in outcome.csv_files.iter().chain(&outcome.svg_files) {
                std::fs::write(out.join(name), body).expect("write output file");
            }
            for check in &outcome.report.checks {
                println!(
                    "[{}] {}",
                    if check.passed { "pass" } else { "FAIL" },
                    check.name
                );
            }
            // Timing is printed, never serialized: reports stay bit-identical.
            println!(
                "{}: {} checks, {} in {:.2?} -> {}",
                cfg.experiment,
                outcome.report.checks.len(),
                if outcome.report.passed { "all passed" } else { "FAILURES" },
                started.elapsed(),
                report_path.display()
            );
            if let Some(first) = outcome.report.first_failure() {
                std::process::exit(first.min(100) as i32);
            }
        }
    }
}
