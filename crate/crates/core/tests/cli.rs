//! End-to-end runs of the `svmlab` binary.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use svmlab::scenario::{parse_config, Snapshot};

fn svmlab(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_svmlab"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn run_config(dir: &Path, text: &str) -> (Output, Value) {
    std::fs::write(dir.join("run.cfg"), text).unwrap();
    let out = svmlab(dir, &["run", "run.cfg"]);
    let summary = std::fs::read_to_string(dir.join("out/summary.json"))
        .unwrap_or_else(|_| panic!("no summary: {}", String::from_utf8_lossy(&out.stderr)));
    (out, serde_json::from_str(&summary).unwrap())
}

fn check<'a>(summary: &'a Value, name: &str) -> &'a Value {
    summary["checks"]
        .as_array()
        .unwrap()
        .iter()
        .find(|c| c["name"] == name)
        .unwrap_or_else(|| panic!("no check named {name}"))
}

/// A 65 x 65 run over T = 0.5 with `overrides` applied on top.
fn small(overrides: &[(&str, &str)]) -> String {
    // Mass drift of the C1 bump at this resolution is about 1e-3.
    let mut keys: BTreeMap<&str, &str> = [
        ("nx", "65"),
        ("nv", "65"),
        ("dt", "0.015625"),
        ("T", "0.5"),
        ("mass_tol", "1e-2"),
        ("out_dir", "out"),
    ]
    .into_iter()
    .collect();
    keys.extend(overrides.iter().copied());
    keys.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
}

const POSITIVE: &[(&str, &str)] = &[
    ("x_min", "-3"),
    ("x_max", "11"),
    ("v_min", "0"),
    ("v_max", "6"),
    ("interpolation", "monotone"),
    ("f0_center_v", "2.5"),
    ("f0_width", "1"),
    ("b0_family", "bump"),
    ("b0_amplitude", "0.5"),
    ("b0_width", "1"),
    ("diag_scenario", "true"),
    ("mass_tol", "5e-2"),
];

#[test]
fn zero_data_passes_with_zero_traces() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small(&[("engine", "both"), ("f0_family", "zero"), ("b0_family", "zero"), ("diag_holder", "true")]);
    let (out, summary) = run_config(dir.path(), &cfg);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
    assert_eq!(summary["pass"], true);
    let csv = std::fs::read_to_string(dir.path().join("out/diagnostics.csv")).unwrap();
    let header: Vec<&str> = csv.lines().next().unwrap().split(',').collect();
    let cols = ["support", "mass", "f_sup", "b_sup", "dxb_sup"].map(|c| header.iter().position(|h| *h == c).unwrap());
    for row in csv.lines().skip(1) {
        let cells: Vec<&str> = row.split(',').collect();
        for &c in &cols {
            assert_eq!(cells[c].parse::<f64>().unwrap(), 0.0, "{row}");
        }
    }
}

#[test]
fn both_engines_agree_on_the_bump() {
    let dir = tempfile::tempdir().unwrap();
    let (out, summary) = run_config(dir.path(), &small(&[("engine", "both")]));
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
    let c = check(&summary, "cross_engine");
    assert_eq!(c["pass"], true);
    assert!(c["value"].as_f64().unwrap() > 0.0);
}

#[test]
fn positive_scenario_passes() {
    let dir = tempfile::tempdir().unwrap();
    let mut keys = POSITIVE.to_vec();
    keys.extend([("nx", "129"), ("nv", "129"), ("dt", "0.0078125"), ("T", "2")]);
    let (out, summary) = run_config(dir.path(), &small(&keys));
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
    assert_eq!(check(&summary, "scenario_field_nonnegative")["pass"], true);
    assert_eq!(check(&summary, "scenario_support_nondecreasing")["pass"], true);
}

#[test]
fn every_output_is_listed_once() {
    let dir = tempfile::tempdir().unwrap();
    let mut keys = POSITIVE.to_vec();
    // the Picard padding check needs room for its a-priori support envelope
    keys.extend([
        ("x_min", "-5"),
        ("v_min", "-2"),
        ("v_max", "7"),
        ("engine", "both"),
        ("diag_holder", "true"),
        ("diag_residual", "true"),
        ("majorant_C", "8"),
        ("snapshot_times", "0, 0.25"),
    ]);
    let cfg = small(&keys);
    let (_, summary) = run_config(dir.path(), &cfg);
    let listed: Vec<String> = summary["files"]
        .as_array()
        .unwrap()
        .iter()
        .map(|f| f.as_str().unwrap().to_string())
        .collect();
    let unique: BTreeSet<&String> = listed.iter().collect();
    assert_eq!(unique.len(), listed.len());
    let on_disk: BTreeSet<String> = std::fs::read_dir(dir.path().join("out"))
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .filter(|n| n != "summary.json")
        .collect();
    let listed: BTreeSet<String> = listed.into_iter().filter(|n| n != "summary.json").collect();
    assert_eq!(listed, on_disk);
    for name in [
        "diagnostics.csv",
        "picard_trace.csv",
        "holder.csv",
        "residual.csv",
        "scenario.csv",
        "majorant.csv",
        "continuation.csv",
        "f_000000.bin",
        "B_000016.bin",
    ] {
        assert!(on_disk.contains(name), "missing {name}");
    }
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small(&[("engine", "both"), ("diag_holder", "true"), ("snapshot_times", "0.5")]);
    run_config(dir.path(), &cfg);
    std::fs::rename(dir.path().join("out"), dir.path().join("first")).unwrap();
    run_config(dir.path(), &cfg);
    let mut names: Vec<_> = std::fs::read_dir(dir.path().join("first"))
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .collect();
    names.sort();
    assert!(names.len() >= 5);
    for n in names {
        let a = std::fs::read(dir.path().join("first").join(&n)).unwrap();
        let b = std::fs::read(dir.path().join("out").join(&n)).unwrap();
        assert!(a == b, "{n:?} differs");
    }
}

#[test]
fn failing_check_sets_the_exit_status() {
    let dir = tempfile::tempdir().unwrap();
    let (out, summary) = run_config(dir.path(), &small(&[("mass_tol", "1e-15")]));
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(summary["pass"], false);
    assert_eq!(check(&summary, "mass_conservation")["pass"], false);
}

#[test]
fn bad_config_reports_the_line() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.cfg"), "nx = 65\nnv = sixty\n").unwrap();
    let out = svmlab(dir.path(), &["run", "bad.cfg"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));
}

#[test]
fn majorant_subcommand_matches_the_closed_form() {
    let dir = tempfile::tempdir().unwrap();
    let out = svmlab(dir.path(), &["majorant", "--C", "1", "--cap", "100"]);
    assert!(out.status.success());
    let t: f64 = String::from_utf8_lossy(&out.stdout).trim().parse().unwrap();
    // F = 1 / (1 - t) crosses 100 at t = 0.99.
    assert!((t - 0.99).abs() < 1e-4, "{t}");
    let zero = svmlab(dir.path(), &["majorant", "--C", "0", "--cap", "10"]);
    assert_eq!(String::from_utf8_lossy(&zero.stdout).trim(), "none");
}

#[test]
fn transform_and_diff_roundtrip() {
    let dir = tempfile::tempdir().unwrap();
    run_config(dir.path(), &small(&[("snapshot_times", "0.5")]));
    let d = dir.path();
    let f = "out/f_000032.bin";
    let ok = |args: &[&str]| {
        let o = svmlab(d, args);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        String::from_utf8_lossy(&o.stdout).into_owned()
    };
    ok(&["transform", "--u", "0", "--bounds", "-4,4,-4,4", f, "same.bin"]);
    assert_eq!(ok(&["diff", f, "same.bin"]).trim().parse::<f64>().unwrap(), 0.0);

    let msg = ok(&["transform", "--u", "-0.5", "--bounds", "-4,4,-4,4", f, "half.bin"]);
    assert!(msg.starts_with("x: ["), "{msg}");
    let half = Snapshot::read(&d.join("half.bin")).unwrap();
    assert_eq!(half.time, 0.5);
    assert!(!half.is_field());

    ok(&["transform", "--u", "1", "--bounds", "-4,4", "out/B_000032.bin", "b.bin"]);
    assert!(Snapshot::read(&d.join("b.bin")).unwrap().is_field());
    let mismatch = svmlab(d, &["diff", f, "b.bin"]);
    assert_eq!(mismatch.status.code(), Some(2));
}

#[test]
fn shipped_configs_parse() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut n = 0;
    for e in std::fs::read_dir(dir).unwrap() {
        let p = e.unwrap().path();
        if p.extension().is_some_and(|x| x == "cfg") {
            parse_config(&std::fs::read_to_string(&p).unwrap()).unwrap_or_else(|e| panic!("{}: {e}", p.display()));
            n += 1;
        }
    }
    assert!(n >= 3);
}
