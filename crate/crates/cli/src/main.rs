//! Batch verification front end.
//!
//! Exit codes: 0 all checks passed (or were skipped), 1 a check failed or
//! was inconclusive, 2 config error, 3 source error.

use pmcv_cli::{config, report as _, runner};

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "pmcv", version, about = "Numerical verification of immersed submanifold geometry in sphere-line products")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run verification checks from a config file.
    Verify {
        /// Path to the TOML verification config.
        #[arg(long)]
        config: PathBuf,
        /// Per-axis grid counts, e.g. 32x32.
        #[arg(long)]
        grid: Option<String>,
        /// Finite-difference step: a number or 'auto'.
        #[arg(long)]
        step: Option<String>,
        /// Comma-separated subset of checks to run.
        #[arg(long)]
        checks: Option<String>,
        /// Include per-point records in the machine report.
        #[arg(long)]
        points: bool,
        /// Worker threads for grid evaluation.
        #[arg(long)]
        workers: Option<usize>,
        /// Write the machine report here (overrides the config).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Catalog of reference immersions.
    Catalog {
        #[command(subcommand)]
        action: CatalogAction,
    },
}

#[derive(Subcommand)]
enum CatalogAction {
    /// List id templates and the canonical entries.
    List,
    /// Show one entry: chart, parameters, expected values, DSL source.
    Show { id: String },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Verify {
            config,
            grid,
            step,
            checks,
            points,
            workers,
            out,
        } => {
            let overrides = match build_overrides(grid, step, checks, points, workers, out) {
                Ok(o) => o,
                Err(e) => {
                    eprintln!("config error: {e:#}");
                    return ExitCode::from(2);
                }
            };
            let cfg = match config::load(&config, &overrides) {
                Ok(c) => c,
                Err(e) => {
                    eprintln!("config error: {e:#}");
                    return ExitCode::from(2);
                }
            };
            // source problems are distinguished from config problems
            if let Err(e) = runner::resolve_source(&cfg) {
                eprintln!("source error: {e:#}");
                return ExitCode::from(3);
            }
            let start = Instant::now();
            let report = match runner::run_verification(&cfg) {
                Ok(r) => r,
                Err(e) => {
                    eprintln!("source error: {e:#}");
                    return ExitCode::from(3);
                }
            };
            print!("{}", report.to_table());
            println!("wall time: {:.3}s", start.elapsed().as_secs_f64());
            if let Some(path) = &cfg.out {
                if let Err(e) = report.write_machine(path) {
                    eprintln!("report error: {e:#}");
                    return ExitCode::from(2);
                }
                println!("report written to {}", path.display());
            }
            if report.all_ok() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Command::Catalog { action } => match action {
            CatalogAction::List => {
                println!("id templates:");
                for (template, what) in pmcv_core::catalog::id_templates() {
                    println!("  {template:42} {what}");
                }
                println!("\ncanonical entries:");
                match pmcv_core::catalog::canonical_entries() {
                    Ok(entries) => {
                        for e in entries {
                            println!("  {:38} {}", e.id, e.description);
                        }
                        ExitCode::SUCCESS
                    }
                    Err(e) => {
                        eprintln!("source error: {e}");
                        ExitCode::from(3)
                    }
                }
            }
            CatalogAction::Show { id } => match pmcv_core::catalog::parse_id(&id) {
                Ok(entry) => {
                    println!("id:          {}", entry.id);
                    println!("description: {}", entry.description);
                    let spec = &entry.immersion;
                    println!(
                        "ambient:     S^{}(c={}) x R, embedded in R^{}",
                        spec.ambient().n(),
                        spec.ambient().c(),
                        spec.ambient().dim()
                    );
                    println!("chart dim:   {}", spec.chart_dim());
                    let domain: Vec<String> = spec
                        .domain()
                        .iter()
                        .map(|(lo, hi)| format!("[{lo:.6},{hi:.6}]"))
                        .collect();
                    println!("domain:      {}", domain.join(" x "));
                    println!("parameters:");
                    for (k, v) in spec.params() {
                        println!("  {k} = {v}");
                    }
                    if !entry.expected_scalars.is_empty() {
                        println!("expected:");
                        for (k, v) in &entry.expected_scalars {
                            println!("  {k} = {v}");
                        }
                    }
                    if let Some(v) = entry.expected_verdict {
                        println!("verdict:     {}", v.as_str());
                    }
                    println!("source:\n{}", indent(&spec.exprs().to_source()));
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("source error: {e}");
                    ExitCode::from(3)
                }
            },
        },
    }
}

fn build_overrides(
    grid: Option<String>,
    step: Option<String>,
    checks: Option<String>,
    points: bool,
    workers: Option<usize>,
    out: Option<PathBuf>,
) -> anyhow::Result<config::Overrides> {
    Ok(config::Overrides {
        grid: grid.as_deref().map(config::parse_grid_arg).transpose()?,
        step: step.as_deref().map(config::parse_step_arg).transpose()?,
        checks: checks.as_deref().map(config::parse_checks_arg).transpose()?,
        points,
        workers,
        out,
    })
}

fn indent(text: &str) -> String {
    text.lines()
        .map(|l| format!("  {l}"))
        .collect::<Vec<_>>()
        .join("\n")
}
