//! Harness commands behind the CLI subcommands.
//!
//! Each command does the work and returns a structured report; printing and
//! process exit belong to `main`. Seeds run in parallel, file contents are
//! deterministic, and the two canned reproduction commands carry their
//! pinned instances and pass thresholds as named constants.

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use polarmix::backbone::{build_backbone, deviation_spectrum, BackboneKind, DeviationSpectrum};
use polarmix::engine::{run, Engine, InitIterate, MsgnBackend, Schedule, Trace, Variant};
use polarmix::matrix::Matrix;
use polarmix::metrics::{self, mean_and_pstd, summarize, Summary, TraceRecord};
use polarmix::problems::{build_matrix_logistic, build_transverse_quadratic};
use polarmix::stack;
use polarmix::topology::{build_mixing, Graph, GraphKind, MixingScheme};

use crate::config::{backbone_name, variant_name, Config};
use crate::error::{usage, CliError};
use crate::svg::{self, Chart, Series, PALETTE};

/// Column layout of every trace CSV this harness writes.
pub const TRACE_HEADER: &str =
    "k,f_bar,grad_nuc,run_avg_grad_nuc,consensus_fro,tracking_dev_fro,avg_track_err_fro,mean_polar_op";

pub fn records_csv(records: &[TraceRecord<f64>]) -> String {
    let mut out = String::from(TRACE_HEADER);
    out.push('\n');
    for r in records {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            r.k,
            r.f_bar,
            r.grad_nuc,
            r.run_avg_grad_nuc,
            r.consensus_fro,
            r.tracking_dev_fro,
            r.avg_track_err_fro,
            r.mean_polar_op
        ));
    }
    out
}

pub fn trace_csv(trace: &Trace<f64>) -> String {
    records_csv(&trace.records)
}

fn write_file(path: &Path, content: &str) -> Result<(), CliError> {
    fs::write(path, content).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|source| CliError::Io {
        path: dir.to_path_buf(),
        source,
    })
}

/// Runs one configuration over all its seeds in parallel, preserving seed
/// order in the result.
pub fn run_config(cfg: &Config) -> Result<Vec<(u64, Trace<f64>)>, CliError> {
    let built = cfg.build()?;
    let init = cfg.init(&built.problem);
    cfg.seeds
        .par_iter()
        .map(|&seed| {
            let engine = Engine::new(
                &built.problem,
                cfg.variant,
                built.backbone.as_ref(),
                built.mixing.as_ref(),
                built.schedule,
                built.backend,
                seed,
            )?;
            let trace = run(&engine, &init, cfg.iterations)?;
            Ok((seed, trace))
        })
        .collect()
}

#[derive(Debug)]
pub struct RunArtifacts {
    pub trace_paths: Vec<PathBuf>,
    pub summary_path: PathBuf,
    pub config_path: PathBuf,
    pub summaries: Vec<(u64, Summary<f64>)>,
}

/// `run` subcommand: one trace CSV per seed, a cross-seed summary CSV, and
/// the canonical config echo. Blowups are reported after all files are
/// written so the partial trace is still on disk for inspection.
pub fn cmd_run(cfg: &Config, out_dir: &Path) -> Result<RunArtifacts, CliError> {
    ensure_dir(out_dir)?;
    let traces = run_config(cfg)?;

    let mut trace_paths = Vec::with_capacity(traces.len());
    let mut summaries = Vec::with_capacity(traces.len());
    for (seed, trace) in &traces {
        let path = out_dir.join(format!("trace_seed{seed}.csv"));
        write_file(&path, &trace_csv(trace))?;
        trace_paths.push(path);
        summaries.push((*seed, summarize(trace)?));
    }

    type SummaryField = fn(&Summary<f64>) -> f64;
    let mut summary = String::from("field,mean,pstd\n");
    let fields: [(&str, SummaryField); 4] = [
        ("final_grad_nuc", |s| s.final_grad_nuc),
        ("best_grad_nuc", |s| s.best_grad_nuc),
        ("final_run_avg_grad_nuc", |s| s.final_run_avg_grad_nuc),
        ("max_consensus_fro", |s| s.max_consensus_fro),
    ];
    for (name, get) in fields {
        let values: Vec<f64> = summaries.iter().map(|(_, s)| get(s)).collect();
        let (mean, pstd) = mean_and_pstd(&values)?;
        summary.push_str(&format!("{name},{mean},{pstd}\n"));
    }
    let summary_path = out_dir.join("summary.csv");
    write_file(&summary_path, &summary)?;

    let config_path = out_dir.join("config.txt");
    write_file(&config_path, &cfg.emit())?;

    if let Some((seed, trace)) = traces.iter().find(|(_, t)| t.blowup.is_some()) {
        return Err(CliError::Blowup {
            seed: *seed,
            iteration: trace.blowup.unwrap(),
        });
    }
    Ok(RunArtifacts {
        trace_paths,
        summary_path,
        config_path,
        summaries,
    })
}

#[derive(Debug)]
pub struct SweepArtifacts {
    pub path: PathBuf,
    pub rows: usize,
}

/// `sweep` subcommand: cartesian product over `--vary key=v1,v2,...` axes
/// applied on top of the base config, one summary row per grid point.
/// Blowups are counted per row, not fatal: a sweep exists to map out where
/// configurations stop working.
pub fn cmd_sweep(
    base_text: &str,
    sets: &[String],
    vary: &[String],
    out_dir: &Path,
) -> Result<SweepArtifacts, CliError> {
    if vary.is_empty() {
        return Err(usage("sweep needs at least one --vary key=v1,v2,..."));
    }
    let mut axes: Vec<(String, Vec<String>)> = Vec::new();
    for spec in vary {
        let Some((key, values)) = spec.split_once('=') else {
            return Err(usage(format!("--vary {spec}: expected `key=v1,v2,...`")));
        };
        let key = key.trim().to_string();
        let values: Vec<String> = values
            .split(',')
            .map(|v| v.trim().to_string())
            .filter(|v| !v.is_empty())
            .collect();
        if key.is_empty() || values.is_empty() {
            return Err(usage(format!("--vary {spec}: expected `key=v1,v2,...`")));
        }
        if axes.iter().any(|(k, _)| *k == key) {
            return Err(usage(format!("--vary {key} given twice")));
        }
        axes.push((key, values));
    }

    // Cartesian product in declaration order: the first axis varies slowest.
    let mut combos: Vec<Vec<usize>> = vec![Vec::new()];
    for (_, values) in &axes {
        let mut next = Vec::with_capacity(combos.len() * values.len());
        for combo in &combos {
            for i in 0..values.len() {
                let mut c = combo.clone();
                c.push(i);
                next.push(c);
            }
        }
        combos = next;
    }

    let mut csv = String::new();
    for (key, _) in &axes {
        csv.push_str(key);
        csv.push(',');
    }
    csv.push_str(
        "final_grad_nuc_mean,final_grad_nuc_pstd,final_run_avg_mean,final_run_avg_pstd,max_consensus_mean,max_consensus_pstd,blowups\n",
    );

    for combo in &combos {
        let mut overrides = sets.to_vec();
        for (axis, &value_idx) in axes.iter().zip(combo) {
            overrides.push(format!("{}={}", axis.0, axis.1[value_idx]));
        }
        let cfg = crate::config::parse_with_overrides(base_text, &overrides)?;
        let traces = run_config(&cfg)?;
        let blowups = traces.iter().filter(|(_, t)| t.blowup.is_some()).count();
        let summaries: Vec<Summary<f64>> = traces
            .iter()
            .map(|(_, t)| summarize(t))
            .collect::<polarmix::Result<_>>()?;
        let col = |get: fn(&Summary<f64>) -> f64| -> polarmix::Result<(f64, f64)> {
            let values: Vec<f64> = summaries.iter().map(get).collect();
            mean_and_pstd(&values)
        };
        let (fg_m, fg_s) = col(|s| s.final_grad_nuc)?;
        let (ra_m, ra_s) = col(|s| s.final_run_avg_grad_nuc)?;
        let (mc_m, mc_s) = col(|s| s.max_consensus_fro)?;
        for (axis, &value_idx) in axes.iter().zip(combo) {
            csv.push_str(&axis.1[value_idx]);
            csv.push(',');
        }
        csv.push_str(&format!(
            "{fg_m},{fg_s},{ra_m},{ra_s},{mc_m},{mc_s},{blowups}\n"
        ));
    }

    ensure_dir(out_dir)?;
    let path = out_dir.join("sweep.csv");
    write_file(&path, &csv)?;
    Ok(SweepArtifacts {
        path,
        rows: combos.len(),
    })
}

// Pinned instance for the tracking counterexample: two nodes pulling a
// rank-one logistic term in opposite directions with unequal weights, on
// the two-node line with lazy weight 0.4 and the exact-diffusion backbone.
const NT_A: f64 = 2.0;
const NT_B: f64 = 1.0;
const NT_ITERS: u64 = 2000;
const NT_RHO: f64 = 0.4;
/// Step and averaging prefactors of the horizon schedule
/// (`alpha = a0 K^{-3/4}`, `1 - beta = b0 K^{-1/2}`). The schedule form is
/// part of the construction; the prefactors are harness choices.
const NT_ALPHA0: f64 = 1.0;
const NT_B0: f64 = 1.0;
const NT_SEED: u64 = 0;
/// The untracked run must sit at the saddle to this precision, every step.
const NT_SADDLE_TOL: f64 = 1e-12;
/// The tracked run must push running-average stationarity below this
/// fraction of the saddle value.
const NT_ESCAPE_FRAC: f64 = 0.1;

#[derive(Debug)]
pub struct NoTrackingReport {
    /// `(a - b) / 4`, the stationarity value the untracked variant is
    /// stuck at.
    pub saddle_value: f64,
    /// Largest `|grad_nuc - saddle_value|` over the untracked trace.
    pub max_saddle_gap: f64,
    /// Largest Frobenius norm of the untracked mean iterate.
    pub max_mean_drift: f64,
    /// First iteration at which the untracked run left the saddle, if any.
    pub first_violation: Option<u64>,
    /// Final running-average stationarity of the tracked run.
    pub tracked_final_run_avg: f64,
    pub escape_threshold: f64,
    pub untracked_path: PathBuf,
    pub tracked_path: PathBuf,
}

impl NoTrackingReport {
    pub fn pinned_ok(&self) -> bool {
        self.max_saddle_gap <= NT_SADDLE_TOL && self.max_mean_drift <= NT_SADDLE_TOL
    }

    pub fn escaped_ok(&self) -> bool {
        self.tracked_final_run_avg <= self.escape_threshold
    }

    pub fn passed(&self) -> bool {
        self.pinned_ok() && self.escaped_ok()
    }
}

/// `no-tracking` subcommand: on the pinned instance, dropping the tracking
/// mix pins the run to a non-stationary point (gradient never moves, mean
/// iterate never moves), while the tracked update escapes and drives the
/// running average an order of magnitude down.
pub fn cmd_no_tracking(out_dir: &Path) -> Result<NoTrackingReport, CliError> {
    ensure_dir(out_dir)?;

    let problem = build_matrix_logistic(NT_A, NT_B, &[1.0, 0.0], &[1.0, 0.0])?;
    let graph = Graph::standard(GraphKind::Line, 2)?;
    let mixing = build_mixing(&graph, MixingScheme::Lazy { rho: NT_RHO })?;
    let backbone = build_backbone(BackboneKind::ExactDiffusion, &mixing)?;
    let schedule = Schedule::horizon(NT_ALPHA0, NT_B0, NT_ITERS)?;
    let init = InitIterate::Consensus(Matrix::zeros(2, 2));
    let saddle_value = (NT_A - NT_B) / 4.0;

    // Untracked run, stepped by hand so the mean-iterate drift is measured
    // on the live state rather than reconstructed from rounded trace rows.
    let engine = Engine::new(
        &problem,
        Variant::NoTracking,
        Some(&backbone),
        Some(&mixing),
        schedule,
        MsgnBackend::Exact,
        NT_SEED,
    )?;
    let mut state = engine.init_state(&init)?;
    let mut records = Vec::with_capacity(NT_ITERS as usize + 1);
    let mut grad_sum = 0.0;
    records.push(metrics::snapshot(&state, &problem, None, &mut grad_sum)?);
    let mut max_mean_drift = stack::block_mean(&state.x)?.frobenius_norm();
    for _ in 0..NT_ITERS {
        let s_bar = engine.step(&mut state)?;
        records.push(metrics::snapshot(&state, &problem, Some(&s_bar), &mut grad_sum)?);
        let drift = stack::block_mean(&state.x)?.frobenius_norm();
        max_mean_drift = max_mean_drift.max(drift);
    }
    let mut max_saddle_gap = 0.0_f64;
    let mut first_violation = None;
    for r in &records {
        let gap = (r.grad_nuc - saddle_value).abs();
        max_saddle_gap = max_saddle_gap.max(gap);
        if gap > NT_SADDLE_TOL && first_violation.is_none() {
            first_violation = Some(r.k);
        }
    }
    let untracked_path = out_dir.join("untracked.csv");
    write_file(&untracked_path, &records_csv(&records))?;

    // Tracked run: identical settings, tracking restored.
    let engine = Engine::new(
        &problem,
        Variant::SudaMuon,
        Some(&backbone),
        Some(&mixing),
        schedule,
        MsgnBackend::Exact,
        NT_SEED,
    )?;
    let trace = run(&engine, &init, NT_ITERS)?;
    if let Some(iteration) = trace.blowup {
        return Err(CliError::Blowup {
            seed: NT_SEED,
            iteration,
        });
    }
    let tracked_final_run_avg = trace
        .records
        .last()
        .expect("nonempty trace")
        .run_avg_grad_nuc;
    let tracked_path = out_dir.join("tracked.csv");
    write_file(&tracked_path, &trace_csv(&trace))?;

    Ok(NoTrackingReport {
        saddle_value,
        max_saddle_gap,
        max_mean_drift,
        first_violation,
        tracked_final_run_avg,
        escape_threshold: NT_ESCAPE_FRAC * saddle_value,
        untracked_path,
        tracked_path,
    })
}

// Pinned instance for the averaging-order comparison: noise transverse to
// the signal, so polarize-then-average keeps full-size noise while
// average-then-polarize shrinks it by sqrt(N).
const SP_SIGMA: f64 = 50.0;
/// Step size. Must stay in (0, sigma), and small enough relative to the
/// threshold below: the averaged variant's noise term is sigma times a
/// mean of N signs, which is exactly zero with probability ~1/sqrt(N), and
/// such a step moves |x1| to |alpha - |x1||. With alpha <= 2 eps that
/// landing point is already inside the threshold whenever |x1| < alpha;
/// with a larger alpha it resets |x1| to order alpha instead, and for
/// moderate N (8 here) the chain cycles above the threshold for far longer
/// than any desk-scale horizon.
const SP_ALPHA: f64 = 0.2;
const SP_X0: f64 = 50.0;
const SP_EPS: f64 = 0.1;
const SP_N_LIST: [usize; 4] = [1, 8, 64, 256];
const SP_SEEDS: u64 = 21;
/// Iteration cap; runs that have not reached the threshold by then are
/// reported as cap and counted as failures.
const SP_CAP: u64 = 2500;
/// Tolerance for the per-step closed-form match of the per-node variant.
const SP_CLOSED_FORM_TOL: f64 = 1e-12;
/// The averaged variant at N=256 must beat N=1 by at least this factor.
const SP_RATIO: f64 = 0.5;

#[derive(Debug)]
pub struct SpeedupReport {
    /// Largest deviation of the per-node variant from its closed-form
    /// one-dimensional recursion, relative to `1 + |prediction|`.
    pub max_closed_form_dev: f64,
    /// Largest cross-node-count deviation of the per-node trajectories.
    pub max_cross_n_dev: f64,
    /// Largest deviation between averaged and per-node trajectories at N=1.
    pub n1_match_dev: f64,
    /// Iterations to threshold for the per-node variant (any N, any seed).
    pub dsgd_iters: u64,
    /// `(n, median iterations to threshold)` for the averaged variant.
    pub centralized_medians: Vec<(usize, u64)>,
    /// Runs that never reached the threshold within the cap.
    pub not_reached: usize,
    pub csv_path: PathBuf,
    pub summary_path: PathBuf,
    pub svg_path: PathBuf,
}

impl SpeedupReport {
    /// Violated clauses, by name; empty means PASS.
    pub fn failures(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.max_closed_form_dev > SP_CLOSED_FORM_TOL {
            out.push(format!(
                "per-node trajectory deviates from the closed-form recursion by {:.3e} (tolerance {SP_CLOSED_FORM_TOL:.0e})",
                self.max_closed_form_dev
            ));
        }
        if self.max_cross_n_dev > SP_CLOSED_FORM_TOL {
            out.push(format!(
                "per-node trajectories differ across node counts by {:.3e}",
                self.max_cross_n_dev
            ));
        }
        if self.n1_match_dev > SP_CLOSED_FORM_TOL {
            out.push(format!(
                "averaged and per-node variants disagree at N=1 by {:.3e}",
                self.n1_match_dev
            ));
        }
        let medians = &self.centralized_medians;
        if medians.windows(2).any(|w| w[1].1 > w[0].1) {
            out.push(format!(
                "averaged-variant medians are not non-increasing in N: {medians:?}"
            ));
        }
        if let (Some(first), Some(last)) = (medians.first(), medians.last()) {
            let bound = SP_RATIO * first.1 as f64;
            if (last.1 as f64) >= bound {
                out.push(format!(
                    "averaged variant at N={} took {} iterations, not below {SP_RATIO} x {} = {bound}",
                    last.0, last.1, first.1
                ));
            }
        }
        if self.not_reached > 0 {
            out.push(format!(
                "{} runs never reached |x1| <= {SP_EPS} within {SP_CAP} iterations",
                self.not_reached
            ));
        }
        out
    }

    pub fn passed(&self) -> bool {
        self.failures().is_empty()
    }
}

/// One speedup-instance run: first-coordinate trajectory (starting at the
/// initial value) and the first iteration at which `|x1|` reached the
/// threshold (`SP_CAP` if never).
fn speedup_trajectory(
    variant: Variant,
    n: usize,
    seed: u64,
) -> Result<(Vec<f64>, u64), CliError> {
    let problem = build_transverse_quadratic(n, SP_SIGMA)?;
    let schedule = Schedule::constant(SP_ALPHA, 0.0)?;
    let engine = Engine::new(&problem, variant, None, None, schedule, MsgnBackend::Exact, seed)?;
    let init = InitIterate::Consensus(Matrix::column(&[SP_X0, 0.0]));
    let mut state = engine.init_state(&init)?;
    let mut xs = vec![state.x[0].get(0, 0)];
    let mut hit = None;
    for k in 1..=SP_CAP {
        engine.step(&mut state)?;
        let x1 = state.x[0].get(0, 0);
        xs.push(x1);
        if x1.abs() <= SP_EPS {
            hit = Some(k);
            break;
        }
    }
    Ok((xs, hit.unwrap_or(SP_CAP)))
}

/// `speedup` subcommand: per-node polarization wastes the noise averaging
/// (trajectories identical for every node count and pinned to a scalar
/// recursion), while polarizing the averaged gradient gets faster with N.
pub fn cmd_speedup(out_dir: &Path) -> Result<SpeedupReport, CliError> {
    ensure_dir(out_dir)?;

    let mut csv = String::from("variant,n,seed,iters_to_eps\n");
    let mut not_reached = 0usize;

    // Per-node variant over all node counts and seeds.
    type Job = (usize, u64);
    let jobs: Vec<Job> = SP_N_LIST
        .iter()
        .flat_map(|&n| (0..SP_SEEDS).map(move |s| (n, s)))
        .collect();
    let dsgd: Vec<(Job, (Vec<f64>, u64))> = jobs
        .par_iter()
        .map(|&job| {
            let out = speedup_trajectory(Variant::DsgdMuon, job.0, job.1)?;
            Ok(((job), out))
        })
        .collect::<Result<_, CliError>>()?;

    let reference = &dsgd[0].1 .0;
    let mut max_closed_form_dev = 0.0_f64;
    let mut max_cross_n_dev = 0.0_f64;
    let mut dsgd_iters = 0;
    for ((n, seed), (xs, iters)) in &dsgd {
        if *iters >= SP_CAP && xs.last().is_none_or(|x| x.abs() > SP_EPS) {
            not_reached += 1;
        }
        dsgd_iters = *iters;
        for pair in xs.windows(2) {
            let predicted = pair[0] * (1.0 - SP_ALPHA / (pair[0] * pair[0] + SP_SIGMA * SP_SIGMA).sqrt());
            let dev = (pair[1] - predicted).abs() / (1.0 + predicted.abs());
            max_closed_form_dev = max_closed_form_dev.max(dev);
        }
        if xs.len() != reference.len() {
            max_cross_n_dev = f64::INFINITY;
        } else {
            for (a, b) in xs.iter().zip(reference) {
                max_cross_n_dev = max_cross_n_dev.max((a - b).abs());
            }
        }
        csv.push_str(&format!(
            "{},{n},{seed},{iters}\n",
            variant_name(Variant::DsgdMuon)
        ));
    }

    // Averaged variant over the same grid.
    let centralized: Vec<(Job, (Vec<f64>, u64))> = jobs
        .par_iter()
        .map(|&job| {
            let out = speedup_trajectory(Variant::CentralizedMuon, job.0, job.1)?;
            Ok((job, out))
        })
        .collect::<Result<_, CliError>>()?;

    let mut n1_match_dev = 0.0_f64;
    let mut medians = Vec::new();
    let mut svg_series: Vec<Series> = vec![Series {
        label: format!("{} (any N)", variant_name(Variant::DsgdMuon)),
        color: "#333333",
        dashed: false,
        points: reference
            .iter()
            .enumerate()
            .map(|(k, x)| (k as f64, x.abs()))
            .collect(),
    }];
    for (ni, &n) in SP_N_LIST.iter().enumerate() {
        let mut iters: Vec<u64> = Vec::with_capacity(SP_SEEDS as usize);
        for ((jn, seed), (xs, it)) in &centralized {
            if *jn != n {
                continue;
            }
            if *it >= SP_CAP && xs.last().is_none_or(|x| x.abs() > SP_EPS) {
                not_reached += 1;
            }
            iters.push(*it);
            csv.push_str(&format!(
                "{},{n},{seed},{it}\n",
                variant_name(Variant::CentralizedMuon)
            ));
            if n == 1 {
                // One node: averaging over one gradient, then polarizing,
                // is the same operation as polarizing each gradient.
                for (a, b) in xs.iter().zip(reference) {
                    n1_match_dev = n1_match_dev.max((a - b).abs());
                }
                if xs.len() != reference.len() {
                    n1_match_dev = f64::INFINITY;
                }
            }
            if *seed == 0 {
                svg_series.push(Series {
                    label: format!("{} N={n}", variant_name(Variant::CentralizedMuon)),
                    color: PALETTE[ni % PALETTE.len()],
                    dashed: true,
                    points: xs
                        .iter()
                        .enumerate()
                        .map(|(k, x)| (k as f64, x.abs().max(SP_EPS * 1e-2)))
                        .collect(),
                });
            }
        }
        iters.sort_unstable();
        medians.push((n, iters[iters.len() / 2]));
    }

    let mut summary = String::from("variant,n,median_iters\n");
    for &n in &SP_N_LIST {
        summary.push_str(&format!(
            "{},{n},{dsgd_iters}\n",
            variant_name(Variant::DsgdMuon)
        ));
    }
    for (n, m) in &medians {
        summary.push_str(&format!(
            "{},{n},{m}\n",
            variant_name(Variant::CentralizedMuon)
        ));
    }

    let chart = Chart {
        title: format!("|x1| vs iteration, sigma={SP_SIGMA}, alpha={SP_ALPHA}"),
        x_label: "iteration".to_string(),
        y_label: "|x1|".to_string(),
        log_x: false,
        log_y: true,
        x_ticks: vec![],
        series: svg_series,
    };

    let csv_path = out_dir.join("speedup.csv");
    write_file(&csv_path, &csv)?;
    let summary_path = out_dir.join("speedup_summary.csv");
    write_file(&summary_path, &summary)?;
    let svg_path = out_dir.join("speedup.svg");
    write_file(&svg_path, &svg::render(&chart))?;

    Ok(SpeedupReport {
        max_closed_form_dev,
        max_cross_n_dev,
        n1_match_dev,
        dsgd_iters,
        centralized_medians: medians,
        not_reached,
        csv_path,
        summary_path,
        svg_path,
    })
}

#[derive(Debug)]
pub struct BackboneRow {
    pub name: &'static str,
    pub lambda: f64,
    pub gamma_hat: f64,
    /// Mixing eigenvalue of the mode achieving `gamma_hat`.
    pub gamma_at_w: f64,
    pub spectrum: DeviationSpectrum<f64>,
}

#[derive(Debug)]
pub struct BackboneReport {
    pub rows: Vec<BackboneRow>,
    pub summary_path: PathBuf,
    pub modes_path: PathBuf,
}

impl BackboneReport {
    pub fn all_stable(&self) -> bool {
        self.rows.iter().all(|r| r.gamma_hat < 1.0)
    }
}

/// `backbone-report` subcommand: numerical disagreement-contraction factor
/// per backbone on one mixing matrix, with the per-mode detail alongside
/// `lambda` and `lambda^2` for comparison against the idealized values.
pub fn cmd_backbone_report(
    topology: GraphKind,
    n: usize,
    scheme: MixingScheme<f64>,
    out_dir: &Path,
) -> Result<BackboneReport, CliError> {
    ensure_dir(out_dir)?;
    let graph = Graph::standard(topology, n)?;
    let mixing = build_mixing(&graph, scheme)?;

    let mut summary = String::from("backbone,lambda,lambda_sq,gamma_hat,gamma_at_w\n");
    let mut modes_csv = String::from("backbone,mode,w,a,c,b_sq,radius\n");
    let mut rows = Vec::new();
    for kind in [
        BackboneKind::ExactDiffusion,
        BackboneKind::Extra,
        BackboneKind::AtcTracking,
    ] {
        let bk = build_backbone(kind, &mixing)?;
        let spectrum = deviation_spectrum(&bk, &mixing)?;
        let lambda = mixing.lambda();
        let gamma_at_w = spectrum
            .modes
            .iter()
            .max_by(|p, q| p.radius.total_cmp(&q.radius))
            .map_or(0.0, |m| m.w);
        let name = backbone_name(kind);
        summary.push_str(&format!(
            "{name},{lambda},{},{},{gamma_at_w}\n",
            lambda * lambda,
            spectrum.gamma_hat
        ));
        for (i, m) in spectrum.modes.iter().enumerate() {
            modes_csv.push_str(&format!(
                "{name},{i},{},{},{},{},{}\n",
                m.w, m.a, m.c, m.b_sq, m.radius
            ));
        }
        rows.push(BackboneRow {
            name,
            lambda,
            gamma_hat: spectrum.gamma_hat,
            gamma_at_w,
            spectrum,
        });
    }

    let summary_path = out_dir.join("backbone_summary.csv");
    write_file(&summary_path, &summary)?;
    let modes_path = out_dir.join("backbone_modes.csv");
    write_file(&modes_path, &modes_csv)?;
    Ok(BackboneReport {
        rows,
        summary_path,
        modes_path,
    })
}
