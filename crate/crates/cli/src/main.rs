//! Command-line front end. Exit codes: 0 success/PASS, 1 usage or I/O
//! error, 2 numerical blowup, 3 a reproduction command whose verdict is
//! FAIL.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use polarmix_cli::commands;
use polarmix_cli::config;
use polarmix_cli::error::CliError;

#[derive(Parser)]
#[command(name = "polarmix", version, about = "Decentralized polarized-momentum simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one configuration over its seeds and write trace/summary CSVs.
    Run {
        /// Path to a flat `key = value` config file (defaults apply if omitted).
        #[arg(long)]
        config: Option<PathBuf>,
        /// Override one config key, e.g. `--set alpha0=0.5`. Repeatable.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Run a cartesian grid of configurations and write one summary row each.
    Sweep {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
        /// Sweep axis, e.g. `--vary alpha0=0.25,0.5,1`. Repeatable.
        #[arg(long = "vary", value_name = "KEY=V1,V2,...", required = true)]
        vary: Vec<String>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Reproduce the tracking counterexample: the untracked variant stalls
    /// at a non-stationary point, the tracked one escapes.
    NoTracking {
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Reproduce the averaging-order comparison: per-node polarization gets
    /// no benefit from more nodes, averaged polarization does.
    Speedup {
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Numerical disagreement-contraction report for all three backbones.
    BackboneReport {
        #[arg(long, default_value = "ring")]
        topology: String,
        #[arg(long, default_value_t = 8)]
        n: usize,
        /// Weight rule: `lazy` (uses --rho) or `metropolis`.
        #[arg(long, default_value = "lazy")]
        scheme: String,
        #[arg(long, default_value_t = 0.25)]
        rho: f64,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
}

fn read_config(path: &Option<PathBuf>, set: &[String]) -> Result<config::Config, CliError> {
    let text = match path {
        Some(p) => fs::read_to_string(p).map_err(|source| CliError::Io {
            path: p.clone(),
            source,
        })?,
        None => String::new(),
    };
    config::parse_with_overrides(&text, set)
}

fn verdict(label: &str, ok: bool, detail: &str) {
    let word = if ok { "PASS" } else { "FAIL" };
    println!("{word} {label}: {detail}");
}

fn dispatch(command: Command) -> Result<bool, CliError> {
    match command {
        Command::Run { config, set, out } => {
            let cfg = read_config(&config, &set)?;
            let artifacts = commands::cmd_run(&cfg, &out)?;
            for path in &artifacts.trace_paths {
                println!("wrote {}", path.display());
            }
            println!("wrote {}", artifacts.summary_path.display());
            println!("wrote {}", artifacts.config_path.display());
            for (seed, s) in &artifacts.summaries {
                println!(
                    "seed {seed}: final_grad_nuc={} run_avg={} max_consensus={}",
                    s.final_grad_nuc, s.final_run_avg_grad_nuc, s.max_consensus_fro
                );
            }
            Ok(true)
        }
        Command::Sweep {
            config,
            set,
            vary,
            out,
        } => {
            let text = match &config {
                Some(p) => fs::read_to_string(p).map_err(|source| CliError::Io {
                    path: p.clone(),
                    source,
                })?,
                None => String::new(),
            };
            let artifacts = commands::cmd_sweep(&text, &set, &vary, &out)?;
            println!("wrote {} ({} rows)", artifacts.path.display(), artifacts.rows);
            Ok(true)
        }
        Command::NoTracking { out } => {
            let report = commands::cmd_no_tracking(&out)?;
            verdict(
                "untracked run pinned to the saddle",
                report.pinned_ok(),
                &match report.first_violation {
                    None => format!(
                        "grad_nuc = {} for all k (max gap {:.3e}), mean-iterate drift {:.3e}",
                        report.saddle_value, report.max_saddle_gap, report.max_mean_drift
                    ),
                    Some(k) => format!(
                        "first violation at iteration {k} (max gap {:.3e}, drift {:.3e})",
                        report.max_saddle_gap, report.max_mean_drift
                    ),
                },
            );
            verdict(
                "tracked run escapes",
                report.escaped_ok(),
                &format!(
                    "final run-average stationarity {:.6} vs threshold {}",
                    report.tracked_final_run_avg, report.escape_threshold
                ),
            );
            println!("wrote {}", report.untracked_path.display());
            println!("wrote {}", report.tracked_path.display());
            Ok(report.passed())
        }
        Command::Speedup { out } => {
            let report = commands::cmd_speedup(&out)?;
            verdict(
                "per-node variant matches the scalar recursion",
                report.max_closed_form_dev <= 1e-12,
                &format!("max deviation {:.3e}", report.max_closed_form_dev),
            );
            verdict(
                "per-node variant identical for every node count",
                report.max_cross_n_dev <= 1e-12,
                &format!(
                    "max deviation {:.3e}, {} iterations to threshold",
                    report.max_cross_n_dev, report.dsgd_iters
                ),
            );
            let failures = report.failures();
            verdict(
                "averaged variant speeds up with N",
                failures.iter().all(|f| !f.contains("averaged")),
                &format!("medians {:?}", report.centralized_medians),
            );
            for f in &failures {
                println!("  {f}");
            }
            println!("wrote {}", report.csv_path.display());
            println!("wrote {}", report.summary_path.display());
            println!("wrote {}", report.svg_path.display());
            Ok(report.passed())
        }
        Command::BackboneReport {
            topology,
            n,
            scheme,
            rho,
            out,
        } => {
            let kind = config::parse_topology("--topology", &topology)?;
            let scheme = match config::parse_scheme("--scheme", &scheme)? {
                config::MixingSchemeKind::Lazy => {
                    polarmix::topology::MixingScheme::Lazy { rho }
                }
                config::MixingSchemeKind::Metropolis => {
                    polarmix::topology::MixingScheme::Metropolis
                }
            };
            let report = commands::cmd_backbone_report(kind, n, scheme, &out)?;
            for row in &report.rows {
                println!(
                    "{}: lambda={} lambda^2={} gamma_hat={} (at mode w={}){}",
                    row.name,
                    row.lambda,
                    row.lambda * row.lambda,
                    row.gamma_hat,
                    row.gamma_at_w,
                    if row.gamma_hat < 1.0 { "" } else { "  UNSTABLE" }
                );
            }
            println!("wrote {}", report.summary_path.display());
            println!("wrote {}", report.modes_path.display());
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version requests are successes; other parse errors
            // are usage errors (exit 1; clap's own default of 2 is reserved
            // for blowups here).
            use clap::error::ErrorKind;
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::from(0),
                _ => ExitCode::from(1),
            };
        }
    };
    match dispatch(cli.command) {
        Ok(true) => ExitCode::from(0),
        Ok(false) => ExitCode::from(3),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
