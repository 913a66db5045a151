use std::fs;
use std::process::{Command, Output};

use serde_json::Value;
use timeorder::cli::{CliError, Table};
use timeorder::Error;

fn timeorder(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_timeorder"))
        .args(args)
        .env_remove("TIMEORDER_WORKERS")
        .output()
        .expect("binary runs")
}

fn table(out: &Output) -> Table {
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    Table::parse_csv(&String::from_utf8(out.stdout.clone()).unwrap()).unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

#[test]
fn sweep_surface_default_grid() {
    let t = table(&timeorder(&["sweep-surface"]));
    assert_eq!(
        t.columns,
        ["epsilon", "phi", "p2_ordered", "p2_nto", "difference"]
    );
    assert_eq!(t.rows.len(), 51 * 126);
    let eps = t.column("epsilon").unwrap();
    let phi = t.column("phi").unwrap();
    assert_eq!((eps[0], phi[0]), (0.0, 0.0));
    assert_eq!((eps[127], phi[127]), (0.02, 0.05));
}

#[test]
fn sweep_surface_json_uses_field_names() {
    let out = timeorder(&[
        "sweep-surface",
        "--eps-step",
        "0.5",
        "--phi-step",
        "1",
        "--format",
        "json",
    ]);
    assert!(out.status.success());
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 3 * 7);
    for key in ["epsilon", "phi", "p2_ordered", "p2_nto", "difference"] {
        assert!(rows[5].get(key).is_some(), "{key}");
    }
}

#[test]
fn evolve_preset_trajectory() {
    let t = table(&timeorder(&[
        "evolve",
        "--preset",
        "2s2p",
        "--record-every",
        "500",
    ]));
    assert_eq!(t.columns, ["t", "p1", "p2"]);
    let p1 = t.column("p1").unwrap();
    let p2 = t.column("p2").unwrap();
    assert_eq!((p1[0], p2[0]), (1.0, 0.0));
    let last = *p2.last().unwrap();
    assert!((last - 0.997811813324423).abs() < 1e-9, "{last}");
    assert!(p1.iter().zip(&p2).all(|(a, b)| (a + b - 1.0).abs() < 1e-8));
    assert!(t.config.iter().any(|(k, v)| k == "preset" && v == "2s2p"));
}

#[test]
fn evolve_preset_without_pulse_stays_put() {
    let t = table(&timeorder(&[
        "evolve",
        "--preset",
        "2s2p-free",
        "--record-every",
        "100",
    ]));
    assert!(t.column("p2").unwrap().iter().all(|p| *p == 0.0));
}

#[test]
fn pert2_commuting_limit_json() {
    let out = timeorder(&[
        "pert2",
        "--delta-e",
        "0",
        "--tf",
        "4",
        "--pulse",
        "kick alpha=0.6 t=1",
        "--pulse",
        "kick alpha=-0.9 t=3",
        "--format",
        "json",
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    let m = v["breakdown"]["commutator_correction"].as_array().unwrap();
    let entries: Vec<f64> = m
        .iter()
        .flat_map(|row| row.as_array().unwrap().iter())
        .flat_map(|z| z.as_array().unwrap().iter().map(|x| x.as_f64().unwrap()))
        .collect();
    assert_eq!(entries.len(), 8);
    assert!(entries.iter().all(|x| *x == 0.0));
    let nto = &v["breakdown"]["second_nto"][0][0][0];
    assert!((nto.as_f64().unwrap() + 0.5 * 0.09).abs() < 1e-15);
}

#[test]
fn pert2_csv_layout() {
    let t = table(&timeorder(&[
        "pert2",
        "--delta-e",
        "1",
        "--tf",
        "4",
        "--pulse",
        "gaussian alpha=0.5 t=2 tau=0.3",
    ]));
    assert_eq!(t.columns, ["term", "row", "col", "re", "im"]);
    assert_eq!(t.rows.len(), 20);
}

#[test]
fn compare_nto_and_scans() {
    let t = table(&timeorder(&["compare-nto", "--preset", "2s2p"]));
    assert_eq!(
        t.columns,
        ["representation", "p2_ordered", "p2_nto", "difference"]
    );
    assert_eq!(t.rows.len(), 2);

    let t = table(&timeorder(&["kick-limit", "--preset", "2s2p"]));
    assert_eq!(
        t.columns,
        [
            "tau",
            "p2_rk4_ordered",
            "p2_nto_interaction",
            "p2_nto_schrodinger"
        ]
    );
    assert_eq!(t.rows.len(), 8);

    let t = table(&timeorder(&[
        "obs-time",
        "--preset",
        "2s2p",
        "--tf-count",
        "21",
    ]));
    assert_eq!(
        t.columns,
        [
            "tf",
            "p2_ordered",
            "p2_nto_schrodinger",
            "p2_nto_interaction"
        ]
    );
    assert_eq!(t.rows.len(), 21);

    let t = table(&timeorder(&[
        "map-classify",
        "--half-split-phase",
        "0.1,100",
        "--strength-phase",
        "0.1,100",
    ]));
    let regimes: Vec<_> = t.rows.iter().map(|r| r[2].clone()).collect();
    let names: Vec<String> = regimes
        .iter()
        .map(|c| match c {
            timeorder::cli::Cell::Text(s) => s.clone(),
            other => panic!("{other:?}"),
        })
        .collect();
    assert_eq!(
        names,
        [
            "kicked-perturbative",
            "kicked-adiabatic",
            "perturbative",
            "adiabatic"
        ]
    );
}

#[test]
fn config_file_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.conf");
    fs::write(
        &cfg,
        "eps_step = 0.5\n\n[sweep-surface]\neps_step = 0.25\nphi_step = 1\n\n[evolve]\nphi_step = 3\n",
    )
    .unwrap();
    let cfg = cfg.to_str().unwrap();
    let t = table(&timeorder(&["sweep-surface", "--config", cfg]));
    assert_eq!(t.rows.len(), 5 * 7);
    let t = table(&timeorder(&[
        "sweep-surface",
        "--config",
        cfg,
        "--eps-step",
        "1",
    ]));
    assert_eq!(t.rows.len(), 2 * 7);
    let t = table(&timeorder(&[
        "sweep-surface",
        "--config",
        cfg,
        "--set",
        "phi_step=2",
    ]));
    assert_eq!(t.rows.len(), 5 * 4);
}

#[test]
fn output_file_matches_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("surface.csv");
    let args = ["sweep-surface", "--eps-step", "0.1"];
    let stdout = timeorder(&args).stdout;
    let out = timeorder(&[&args[..], &["--output", path.to_str().unwrap()]].concat());
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    assert_eq!(fs::read(&path).unwrap(), stdout);
}

#[test]
fn worker_count_from_environment() {
    let base = timeorder(&["sweep-surface"]).stdout;
    let out = Command::new(env!("CARGO_BIN_EXE_timeorder"))
        .arg("sweep-surface")
        .env("TIMEORDER_WORKERS", "3")
        .output()
        .unwrap();
    assert_eq!(out.stdout, base);
    let bad = Command::new(env!("CARGO_BIN_EXE_timeorder"))
        .arg("sweep-surface")
        .env("TIMEORDER_WORKERS", "zero")
        .output()
        .unwrap();
    assert_eq!(code(&bad), 2);
}

#[test]
fn exit_codes() {
    let unknown = timeorder(&["frobnicate"]);
    assert_eq!(code(&unknown), 2);
    assert!(!unknown.stderr.is_empty());

    assert_eq!(
        code(&timeorder(&["evolve", "--delta-e", "abc", "--tf", "1"])),
        2
    );
    assert_eq!(
        code(&timeorder(&[
            "evolve",
            "--preset",
            "2s2p",
            "--delta-e",
            "1"
        ])),
        2
    );
    assert_eq!(code(&timeorder(&["sweep-surface", "--tf", "1"])), 2);

    let bad_width = timeorder(&["evolve", "--preset", "2s2p", "--tau", "-1"]);
    assert_eq!(code(&bad_width), 3);
    let msg = String::from_utf8(bad_width.stderr).unwrap();
    assert_eq!(msg.lines().count(), 1, "{msg}");
    assert_eq!(code(&timeorder(&["sweep-surface", "--eps-max", "2"])), 3);
    assert_eq!(
        code(&timeorder(&[
            "pert2",
            "--delta-e",
            "1",
            "--tf",
            "2",
            "--pulse",
            "kick alpha=1 t=0",
            "--pulse",
            "gaussian alpha=1 t=1 tau=0.1"
        ])),
        3
    );

    let unwritable = timeorder(&["sweep-surface", "--output", "/nonexistent-dir/x/out.csv"]);
    assert_eq!(code(&unwritable), 4);
    assert_eq!(
        code(&timeorder(&[
            "sweep-surface",
            "--config",
            "/nonexistent-dir/run.conf"
        ])),
        4
    );

    assert_eq!(CliError::from(Error::Numeric("x".into())).exit_code(), 5);
}

#[test]
fn help_exits_cleanly() {
    let out = timeorder(&["--help"]);
    assert_eq!(code(&out), 0);
    assert!(String::from_utf8_lossy(&out.stdout).contains("sweep-surface"));
}
