//! File-level behavior of the harness commands: artifact layout, pinned CSV
//! schemas, rerun determinism, and the blowup error path.

use std::fs;

use polarmix_cli::commands::{
    cmd_backbone_report, cmd_run, cmd_sweep, TRACE_HEADER,
};
use polarmix_cli::config::{parse_with_overrides, Config};
use polarmix_cli::error::CliError;
use polarmix::topology::{GraphKind, MixingScheme};

fn small_config(extra: &[&str]) -> Config {
    let mut sets: Vec<String> = vec![
        "n_nodes=4".into(),
        "K=40".into(),
        "seeds=0,1".into(),
    ];
    sets.extend(extra.iter().map(|s| s.to_string()));
    parse_with_overrides("", &sets).expect("valid test config")
}

#[test]
fn run_writes_trace_summary_and_config_echo() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(&[]);
    let art = cmd_run(&cfg, dir.path()).unwrap();

    assert_eq!(art.trace_paths.len(), 2);
    for (path, seed) in art.trace_paths.iter().zip([0u64, 1]) {
        assert_eq!(
            path.file_name().unwrap().to_str().unwrap(),
            format!("trace_seed{seed}.csv")
        );
        let text = fs::read_to_string(path).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some(TRACE_HEADER));
        // Initial snapshot plus one row per iteration.
        assert_eq!(lines.count(), 41);
        assert!(text.starts_with("k,"));
    }

    let summary = fs::read_to_string(&art.summary_path).unwrap();
    assert!(summary.starts_with("field,mean,pstd\n"));
    assert!(summary.contains("final_grad_nuc,"));
    assert!(summary.contains("max_consensus_fro,"));

    // The config echo is canonical: parsing it back gives the same config.
    let echoed = fs::read_to_string(&art.config_path).unwrap();
    let reparsed = parse_with_overrides(&echoed, &[]).unwrap();
    assert_eq!(reparsed, cfg);
}

#[test]
fn rerun_into_fresh_dir_is_byte_identical() {
    let cfg = small_config(&["msgn_backend=newton-schulz", "ns_iters=3"]);
    let d1 = tempfile::tempdir().unwrap();
    let d2 = tempfile::tempdir().unwrap();
    let a1 = cmd_run(&cfg, d1.path()).unwrap();
    let a2 = cmd_run(&cfg, d2.path()).unwrap();
    for (p1, p2) in a1.trace_paths.iter().zip(&a2.trace_paths) {
        assert_eq!(fs::read(p1).unwrap(), fs::read(p2).unwrap());
    }
    assert_eq!(
        fs::read(&a1.summary_path).unwrap(),
        fs::read(&a2.summary_path).unwrap()
    );
}

#[test]
fn blowup_reports_seed_and_leaves_partial_trace_on_disk() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(&["schedule=constant", "alpha=1e13", "beta=0", "seeds=7"]);
    let err = cmd_run(&cfg, dir.path()).unwrap_err();
    match &err {
        CliError::Blowup { seed, .. } => assert_eq!(*seed, 7),
        other => panic!("expected blowup, got {other:?}"),
    }
    assert_eq!(err.exit_code(), 2);
    // The partial trace was still written for inspection.
    let text = fs::read_to_string(dir.path().join("trace_seed7.csv")).unwrap();
    assert!(text.starts_with(TRACE_HEADER));
    assert!(text.lines().count() >= 2);
}

#[test]
fn sweep_writes_one_row_per_grid_point() {
    let dir = tempfile::tempdir().unwrap();
    let art = cmd_sweep(
        "K = 30\nn_nodes = 4\nseeds = 0,1\n",
        &[],
        &["alpha0=0.5,1".to_string(), "rho=0.2,0.25".to_string()],
        dir.path(),
    )
    .unwrap();
    assert_eq!(art.rows, 4);
    let text = fs::read_to_string(&art.path).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap();
    assert!(header.starts_with("alpha0,rho,"));
    assert!(header.contains("final_grad_nuc_mean"));
    assert!(header.ends_with("blowups"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 4);
    // First axis varies slowest.
    assert!(rows[0].starts_with("0.5,0.2,"));
    assert!(rows[1].starts_with("0.5,0.25,"));
    assert!(rows[2].starts_with("1,0.2,"));
    assert!(rows[3].starts_with("1,0.25,"));
}

#[test]
fn sweep_rejects_malformed_and_duplicate_axes() {
    let dir = tempfile::tempdir().unwrap();
    for vary in [
        vec!["alpha0".to_string()],
        vec!["alpha0=".to_string()],
        vec!["alpha0=1,2".to_string(), "alpha0=3".to_string()],
    ] {
        let err = cmd_sweep("", &[], &vary, dir.path()).unwrap_err();
        assert_eq!(err.exit_code(), 1, "vary {vary:?}");
    }
}

#[test]
fn backbone_report_lists_all_three_backbones_with_modes() {
    let dir = tempfile::tempdir().unwrap();
    let report = cmd_backbone_report(
        GraphKind::Ring,
        4,
        MixingScheme::Lazy { rho: 0.25 },
        dir.path(),
    )
    .unwrap();
    assert_eq!(report.rows.len(), 3);
    assert!(report.all_stable());

    let summary = fs::read_to_string(&report.summary_path).unwrap();
    assert_eq!(summary.lines().count(), 4);
    assert!(summary.starts_with("backbone,lambda,lambda_sq,gamma_hat,gamma_at_w\n"));

    // Ring of 4 has 3 non-unit mixing modes per backbone.
    let modes = fs::read_to_string(&report.modes_path).unwrap();
    assert_eq!(modes.lines().count(), 1 + 3 * 3);
    assert!(modes.starts_with("backbone,mode,w,a,c,b_sq,radius\n"));
}
