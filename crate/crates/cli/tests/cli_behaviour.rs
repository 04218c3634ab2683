use std::path::Path;
use std::process::{Command, Output};

use casimir_lab::forms3::io::{read_records, write_records, FieldRecord};
use casimir_lab::forms3::{Form, Grid, ScalarField};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_casimir-lab"));
    c.env_remove("CASIMIR_LAB_SEED");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn json(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&o.stdout)))
}

#[test]
fn malformed_profile_exits_2_with_offset() {
    let o = run(&["fluid", "gv", "--profile", "sin(", "--grid", "16"]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.contains("--profile"), "{err}");
    assert!(err.contains("offset 3"), "{err}");
    assert!(err.contains("sin(\n"), "{err}");
    assert!(err.contains("   ^"), "{err}");
}

#[test]
fn field_component_errors_point_into_the_whole_argument() {
    let o = run(&["fluid", "helicity", "--field", "sin(2*pi*z), cos(2*pi*q), 0", "--grid", "16"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("offset 22"), "{}", stderr(&o));
    let o = run(&["fluid", "helicity", "--field", "1, 2", "--grid", "16"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn profile_must_depend_on_z_only() {
    let o = run(&["fluid", "gv", "--profile", "sin(2*pi*x)", "--grid", "16"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn rattleback_simulate_writes_monotone_csv_with_bounded_drift() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("traj.csv");
    let o = run(&[
        "rattleback", "simulate", "--h", "-2", "--ic", "0.1,0.2,1.0", "--dt", "1e-3", "--t-final", "100", "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = std::fs::read_to_string(&out).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,p,r,s,H,C"));
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 100_001);
    assert!(rows.windows(2).all(|w| w[1][0] > w[0][0]));
    assert_eq!(rows.last().unwrap()[0], 100.0);
    let (h0, c0) = (rows[0][4], rows[0][5]);
    for r in &rows {
        assert!((r[4] - h0).abs() <= 1e-8 * h0);
        assert!((r[5] - c0).abs() <= 1e-8 * c0.abs());
    }
}

#[test]
fn rattleback_verify_prints_keyed_report() {
    let o = run(&["rattleback", "verify", "--h", "-1.5"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v = json(&o);
    let e = &v["rattleback.singular_rhs"];
    assert_eq!(e["residual"], 0.0);
    assert_eq!(e["tolerance"], 0.0);
    assert_eq!(e["pass"], true);
    assert!(v["rattleback.rk4_casimir_drift"]["residual"].as_f64().unwrap() <= 1e-8);
}

#[test]
fn rattleback_outside_range_warns() {
    let o = run(&["rattleback", "simulate", "--h", "0.5", "--t-final", "1"]);
    assert!(stderr(&o).contains("outside the rattleback range"), "{}", stderr(&o));
}

#[test]
fn fluid_helicity_of_beltrami_field() {
    let o = run(&["fluid", "helicity", "--field", "sin(2*pi*z), cos(2*pi*z), 0", "--grid", "16"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    let h = v["values"]["helicity"].as_f64().unwrap();
    assert!((h - 2.0 * std::f64::consts::PI).abs() <= 1e-10);
    assert_eq!(v["grid"], 16);
    assert_eq!(v["version"], casimir_lab::VERSION);
}

#[test]
fn non_periodic_field_triggers_tail_warning() {
    let o = run(&["fluid", "helicity", "--field", "x, 0, 0", "--grid", "16"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stderr(&o).contains("dealiasing cutoff"), "{}", stderr(&o));
    let o = run(&["fluid", "helicity", "--field", "sin(2*pi*y), 0, 0", "--grid", "16"]);
    assert!(!stderr(&o).contains("dealiasing cutoff"));
}

#[test]
fn field_round_trips_through_container() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("alpha.f3rm");
    let g = Grid::new(16).unwrap();
    let alpha = Form::one(
        ScalarField::from_fn(g, |_, _, z| (2.0 * std::f64::consts::PI * z).sin()),
        ScalarField::from_fn(g, |_, _, z| (2.0 * std::f64::consts::PI * z).cos()),
        ScalarField::zeros(g),
    );
    write_records(std::fs::File::create(&path).unwrap(), &[FieldRecord::Form(alpha.clone())]).unwrap();
    let dumped = dir.path().join("out.f3rm");
    let o = run(&[
        "fluid", "helicity", "--field", path.to_str().unwrap(), "--grid", "16", "--dump-fields",
        dumped.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let back = read_records(std::fs::File::open(&dumped).unwrap()).unwrap();
    assert_eq!(back, vec![FieldRecord::Form(alpha)]);
}

#[test]
fn fluid_evolve_csv_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("e.csv");
    let report = dir.path().join("r.json");
    let o = run(&[
        "fluid", "evolve", "--field", "sin(2*pi*z), cos(2*pi*z), 0", "--grid", "16", "--t-final", "0.05", "--out",
        csv.to_str().unwrap(), "--report", report.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("t,energy,helicity\n"));
    assert_eq!(text.lines().count(), 52);
    let r: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(r["pass"], true);
}

#[test]
fn fluid_gv_table_and_dump() {
    let dir = tempfile::tempdir().unwrap();
    let dump = dir.path().join("chain.f3rm");
    let o = run(&[
        "fluid", "gv", "--preset", "graph", "--profile", "0.3*sin(2*pi*z)", "--scale", "1", "--grid", "16",
        "--dump-fields", dump.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = String::from_utf8(o.stdout).unwrap();
    assert!(out.starts_with("GV = "));
    assert!(out.contains("foliation.chain_eta"));
    let recs = read_records(std::fs::File::open(&dump).unwrap()).unwrap();
    let ranks: Vec<usize> = recs
        .iter()
        .map(|r| match r {
            FieldRecord::Form(f) => f.rank(),
            FieldRecord::Vector(_) => 255,
        })
        .collect();
    assert_eq!(ranks, vec![1, 1, 1, 2]);
}

#[test]
fn scaled_gv_and_helicity_config_pass() {
    let o = run(&["fluid", "gv", "--profile", "0.3*sin(2*pi*z)", "--scale", "1+0.3*sin(2*pi*x)", "--grid", "16"]);
    assert_eq!(o.status.code(), Some(0), "scaling keeps the foliation: {}", stderr(&o));
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    std::fs::write(&cfg, r#"{"kind":"fluid-helicity","field":"sin(2*pi*z), cos(2*pi*z), 0","grid":16}"#).unwrap();
    let o = run(&["run", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    std::fs::write(&cfg, r#"{"kind":"bogus"}"#).unwrap();
    let o = run(&["run", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("kind"));
    std::fs::write(&cfg, r#"{"kind":"verify-all","colour":1,"size":2}"#).unwrap();
    let o = run(&["run", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("colour, size"), "{}", stderr(&o));
    let o = run(&["run", dir.path().join("missing.json").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["rattleback", "simulate", "--t-final", "-1"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn failing_tolerance_override_exits_1_with_names() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    let report = dir.path().join("r.json");
    std::fs::write(
        &cfg,
        format!(
            r#"{{"kind":"rattleback","t_final":10,"tolerances":{{"rattleback.rk4_energy_drift":0.0}},
                "outputs":{{"report":{:?}}}}}"#,
            report.to_str().unwrap()
        ),
    )
    .unwrap();
    let o = run(&["run", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("rattleback.rk4_energy_drift"));
    let r: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    let c = &r["checks"][0];
    assert_eq!(c["check"], "rattleback.rk4_energy_drift");
    assert_eq!(c["tolerance"], 0.0);
    assert_eq!(c["pass"], false);
}

fn rattleback_suite_report(seed_env: Option<&str>, seed_flag: Option<&str>, path: &Path) -> String {
    let mut c = bin();
    c.args(["verify", "--suite", "rattleback", "--report", path.to_str().unwrap()]);
    if let Some(s) = seed_flag {
        c.args(["--seed", s]);
    }
    if let Some(s) = seed_env {
        c.env("CASIMIR_LAB_SEED", s);
    }
    let o = c.output().unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    std::fs::read_to_string(path).unwrap()
}

#[test]
fn reports_are_deterministic_and_record_the_seed() {
    let dir = tempfile::tempdir().unwrap();
    let a = rattleback_suite_report(None, Some("7"), &dir.path().join("a.json"));
    let b = rattleback_suite_report(None, Some("7"), &dir.path().join("b.json"));
    assert_eq!(a, b);
    let v: serde_json::Value = serde_json::from_str(&a).unwrap();
    assert_eq!(v["seed"], 7);
    let c = rattleback_suite_report(Some("99"), Some("7"), &dir.path().join("c.json"));
    let v: serde_json::Value = serde_json::from_str(&c).unwrap();
    assert_eq!(v["seed"], 99);
}

#[test]
fn lie_poisson_suite_on_small_grid_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let mut reports = Vec::new();
    for name in ["a.json", "b.json"] {
        let path = dir.path().join(name);
        let o = bin()
            .env("CASIMIR_LAB_SEED", "5")
            .args(["fluid", "verify", "--suite", "lie-poisson", "--grid", "16", "--report", path.to_str().unwrap()])
            .output()
            .unwrap();
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        assert!(stderr(&o).contains("seed = 5"));
        reports.push(std::fs::read_to_string(&path).unwrap());
    }
    assert_eq!(reports[0], reports[1]);
}
