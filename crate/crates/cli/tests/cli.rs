use std::process::{Command, Output};

use qcorr::measures::MeasureKind;
use qcorr::qmat::{validate_density_matrix, CMatrix};
use qcorr::states::{bell_state, write_state_json, BellKind};
use qcorr_cli::scan::{read_csv, COLUMNS};

fn qcorr(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qcorr"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn scan_is_byte_identical_across_runs_and_thread_counts() {
    let a = qcorr(&["scan", "--n", "10", "--seed", "77"]);
    let b = qcorr(&["scan", "--n", "10", "--seed", "77"]);
    let c = qcorr(&["--threads", "3", "scan", "--n", "10", "--seed", "77"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.stdout, c.stdout);
    let text = stdout(&a);
    assert!(text.starts_with("# qcorr scan n=10 seed=77"));
    assert_eq!(text.lines().nth(1).unwrap(), COLUMNS.join(","));
}

#[test]
fn scan_csv_round_trips_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("scan.csv");
    let o = qcorr(&["scan", "--n", "6", "--seed", "5", "--rank", "2", "--out", path.to_str().unwrap()]);
    assert!(o.status.success());
    let text = std::fs::read_to_string(&path).unwrap();
    let rows = read_csv(text.as_bytes()).unwrap();
    assert_eq!(rows.len(), 6);
    for (i, r) in rows.iter().enumerate() {
        assert_eq!(r.index, i);
        assert_eq!(r.seed, 5 ^ i as u64);
        assert!(r.violations.is_empty());
        let wpm = r.get(MeasureKind::Wpm).unwrap();
        assert!(r.get(MeasureKind::DiscordAb).unwrap() <= wpm + 1e-4);
        // Rank-2 states: purity at least ½.
        assert!(r.purity >= 0.5 - 1e-12);
    }
    let mut rewritten = Vec::new();
    let config = qcorr_cli::scan::ScanConfig {
        rank: Some(2),
        ..qcorr_cli::scan::ScanConfig::new(6, 5)
    };
    qcorr_cli::scan::write_csv(&mut rewritten, &config, &rows).unwrap();
    assert_eq!(String::from_utf8(rewritten).unwrap(), text);
}

#[test]
fn unselected_measures_are_empty_fields() {
    let o = qcorr(&["scan", "--n", "2", "--measures", "wpm,discord_ab"]);
    let rows = read_csv(o.stdout.as_slice()).unwrap();
    for r in rows {
        for kind in MeasureKind::ALL {
            let selected = matches!(kind, MeasureKind::Wpm | MeasureKind::DiscordAb);
            assert_eq!(r.get(kind).is_some(), selected, "{}", kind.name());
        }
    }
}

#[test]
fn measure_reports_bell_and_mixed_states() {
    let dir = tempfile::tempdir().unwrap();
    let bell = dir.path().join("bell.json");
    std::fs::write(&bell, write_state_json(&bell_state(BellKind::PhiPlus))).unwrap();
    let o = qcorr(&["measure", bell.to_str().unwrap()]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!((v["measures"]["mutual_info"].as_f64().unwrap() - 2.0).abs() < 1e-9);
    for kind in MeasureKind::ALL.iter().skip(1) {
        assert!((v["measures"][kind.name()].as_f64().unwrap() - 1.0).abs() < 1e-6);
    }

    let mixed = dir.path().join("mixed.json");
    let rho = validate_density_matrix(CMatrix::identity(4).scale(0.25), (2, 2)).unwrap();
    std::fs::write(&mixed, write_state_json(&rho)).unwrap();
    let v: serde_json::Value = serde_json::from_str(&stdout(&qcorr(&["measure", mixed.to_str().unwrap()]))).unwrap();
    for kind in MeasureKind::ALL {
        assert!(v["measures"][kind.name()].as_f64().unwrap().abs() < 1e-9);
    }
}

#[test]
fn input_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\"dims\": [2, 2], \"matrix\": ").unwrap();
    let o = qcorr(&["measure", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("state file"));

    let not_psd = dir.path().join("neg.json");
    std::fs::write(
        &not_psd,
        r#"{"dims":[2,1],"matrix":[[[1.5,0],[0,0]],[[0,0],[-0.5,0]]]}"#,
    )
    .unwrap();
    let o = qcorr(&["measure", not_psd.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("negative eigenvalue"));

    assert_eq!(qcorr(&["family", "fig6"]).status.code(), Some(2));
    assert_eq!(qcorr(&["check", "nope"]).status.code(), Some(2));
    assert_eq!(qcorr(&["scan", "--rank", "0"]).status.code(), Some(2));
    assert_eq!(qcorr(&["scan", "--n", "0"]).status.code(), Some(2));
}

#[test]
fn check_suites_pass() {
    for suite in ["povm-ineq", "ensemble-ineq", "fine-graining", "demon"] {
        let o = qcorr(&["check", suite, "--trials", "100", "--seed", "4"]);
        assert!(o.status.success(), "{}", stdout(&o));
        assert!(stdout(&o).starts_with(&format!("PASS {suite}: trials=100 violations=0")));
    }
    let o = qcorr(&["check", "orderings", "--trials", "20"]);
    assert!(o.status.success(), "{}", stdout(&o));
}

#[test]
fn families() {
    let o = qcorr(&["family", "cq-triangle"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("quantity,closed_form,numeric"));
    assert!(text.contains("discord_ab,4.15037499278843"));
    assert!(text.contains("demon_discord,5.40852082972755"));

    let o = qcorr(&["family", "bell"]);
    let row = stdout(&o).lines().nth(2).unwrap().to_string();
    let values: Vec<f64> = row.split(',').skip(1).map(|x| x.parse().unwrap()).collect();
    assert_eq!(values.len(), 10);
    assert!((values[0] - 2.0).abs() < 1e-9);
    assert!(values[1..].iter().all(|v| (v - 1.0).abs() < 1e-6));

    let o = qcorr(&["family", "fig5", "--points", "3"]);
    let lines: Vec<String> = stdout(&o).lines().map(str::to_string).collect();
    assert_eq!(lines[1], "eps,wpm,cos_a,cos_b,degenerate,flat_objective");
    assert_eq!(lines.len(), 5);

    assert_eq!(qcorr(&["family", "fig5", "--measure", "discord_ab"]).status.code(), Some(2));
}
