use std::path::Path;
use std::process::{Command, Output};

fn qkur(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qkur")).args(args).output().expect("binary runs")
}

fn run_to(dir: &Path, name: &str, args: &[&str]) -> String {
    let path = dir.join(name);
    let mut full = args.to_vec();
    let p = path.to_str().unwrap();
    full.extend_from_slice(&["--out", p]);
    let out = qkur(&full);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    std::fs::read_to_string(path).unwrap()
}

fn records(text: &str) -> (csv::StringRecord, Vec<csv::StringRecord>) {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header = r.headers().unwrap().clone();
    let rows = r.records().map(|x| x.unwrap()).collect();
    (header, rows)
}

fn column(header: &csv::StringRecord, name: &str) -> usize {
    header.iter().position(|h| h == name).unwrap_or_else(|| panic!("missing column {name}"))
}

#[test]
fn fig1a_defaults_respect_psi_bound() {
    let dir = tempfile::tempdir().unwrap();
    let text = run_to(dir.path(), "fig1a.csv", &["--experiment", "fig1a"]);
    assert!(!text.contains('\r'));
    let (h, rows) = records(&text);
    let expected = "x,J,D,A,psi,chi,ratio,bound_classical,bound_psi,bound_chi,ok_psi,A_cl,A_ad,error";
    assert_eq!(h.iter().collect::<Vec<_>>(), expected.split(',').collect::<Vec<_>>());
    assert_eq!(rows.len(), 50);
    let (ratio, bound, a) = (column(&h, "ratio"), column(&h, "bound_psi"), column(&h, "A"));
    for r in &rows {
        let f = |i: usize| r[i].parse::<f64>().unwrap();
        assert!(f(ratio) * f(a) >= f(bound) * f(a) * (1.0 - 1e-9), "{r:?}");
        assert_eq!(&r[column(&h, "ok_psi")], "true");
        assert_eq!(&r[column(&h, "error")], "");
    }
}

#[test]
fn fig2_ensemble_satisfies_psi_bound() {
    let dir = tempfile::tempdir().unwrap();
    let text = run_to(dir.path(), "fig2.csv", &["--experiment", "fig2", "--seed", "42", "--samples", "1000"]);
    let (h, rows) = records(&text);
    assert_eq!(rows.len(), 1000);
    let (ok, idx) = (column(&h, "ok_psi"), column(&h, "seed_index"));
    for (i, r) in rows.iter().enumerate() {
        assert_eq!(&r[ok], "true");
        assert_eq!(r[idx].parse::<usize>().unwrap(), i);
    }
    column(&h, "psi_sign");
}

#[test]
fn fig1b_and_fig1c_extra_columns() {
    let dir = tempfile::tempdir().unwrap();
    let (h, rows) = records(&run_to(dir.path(), "b.csv", &["--experiment", "fig1b", "--points", "5"]));
    assert_eq!(rows.len(), 5);
    assert_eq!(column(&h, "D_classical"), 11);
    assert_eq!(column(&h, "C"), 12);
    let (h, rows) = records(&run_to(dir.path(), "c.csv", &["--experiment", "fig1c", "--points", "5"]));
    let (unit, quarter) = (column(&h, "chi_bound_unit"), column(&h, "chi_bound_quarter"));
    for r in &rows {
        let u: f64 = r[unit].parse().unwrap();
        let q: f64 = r[quarter].parse().unwrap();
        assert!((q - 0.25 * u).abs() <= 1e-15);
    }
}

#[test]
fn qubit_sweeps_run() {
    let dir = tempfile::tempdir().unwrap();
    for e in ["qubit-jump", "qubit-diffusive"] {
        let text = run_to(dir.path(), "q.csv", &["--experiment", e, "--points", "7", "--nbar", "1", "--detuning", "1"]);
        let (h, rows) = records(&text);
        assert_eq!(rows.len(), 7);
        assert!(rows.iter().all(|r| &r[column(&h, "ok_psi")] == "true"));
    }
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    for args in [&["--experiment", "fig1b"][..], &["--experiment", "fig2", "--samples", "50", "--seed", "7"]] {
        let a = run_to(dir.path(), "a.csv", args);
        let b = run_to(dir.path(), "b.csv", args);
        assert_eq!(a, b);
    }
}

#[test]
fn json_is_an_array_of_rows() {
    let dir = tempfile::tempdir().unwrap();
    let text = run_to(dir.path(), "a.json", &["--experiment", "fig1a", "--points", "3", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    let rows = v.as_array().unwrap();
    assert_eq!(rows.len(), 3);
    assert!(rows[0]["error"].is_null());
    assert!(rows.iter().all(|r| r["ok_psi"] == true));
    let csv_text = run_to(dir.path(), "a.csv", &["--experiment", "fig1a", "--points", "3"]);
    let (h, csv_rows) = records(&csv_text);
    let psi: f64 = csv_rows[1][column(&h, "psi")].parse().unwrap();
    assert_eq!(rows[1]["psi"].as_f64().unwrap(), psi);
}

#[test]
fn invalid_configurations_exit_with_two() {
    for args in [
        &["--experiment", "fig1a", "--points", "1"][..],
        &["--experiment", "fig1a", "--gmin", "5", "--gmax", "1"],
        &["--experiment", "fig2", "--samples", "0"],
        &["--experiment", "nope"],
        &["--experiment", "fig1a", "--out", "/nonexistent-dir/x.csv"],
    ] {
        assert_eq!(qkur(args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn verify_reports_every_criterion() {
    let out = qkur(&["--experiment", "verify"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), qkur::acceptance::CRITERIA.len() + 1);
    let all_passed = lines[..lines.len() - 1].iter().all(|l| l.starts_with("[PASS]"));
    assert_eq!(out.status.code(), Some(if all_passed { 0 } else { 1 }));
}
