use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use curveflow::flow::FlowTrace;
use tempfile::TempDir;

fn curveflow(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_curveflow")).current_dir(dir).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

/// Shrinking circle of radius one, traced to `t_end`.
fn simulate_circle(dir: &Path, name: &str, t_end: &str) -> PathBuf {
    let o = curveflow(
        dir,
        &["simulate", "--network", "circle(1,64)", "--t-end", t_end, "--record-every", "20", "--out", name],
    );
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    dir.join(name)
}

#[test]
fn simulate_shrinks_a_circle_and_writes_a_summary() {
    let dir = TempDir::new().unwrap();
    let path = simulate_circle(dir.path(), "c.jsonl", "0.1");
    let trace = FlowTrace::from_jsonl(&fs::read_to_string(&path).unwrap()).unwrap();
    let last = trace.snapshots.last().unwrap();
    assert_eq!(last.t, 0.1);
    let exact = 2.0 * PI * (1.0f64 - 0.2).sqrt();
    assert!((last.ledger.mass - exact).abs() < 5e-3 * exact, "{}", last.ledger.mass);
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("c.summary.json")).unwrap()).unwrap();
    assert_eq!(summary["mass_final"].as_f64().unwrap(), last.ledger.mass);
    assert!(summary["failure"].is_null());
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    let dir = TempDir::new().unwrap();
    let a = fs::read(simulate_circle(dir.path(), "a.jsonl", "0.02")).unwrap();
    let b = fs::read(simulate_circle(dir.path(), "b.jsonl", "0.02")).unwrap();
    assert_eq!(a, b);
    let text = String::from_utf8(a).unwrap();
    assert_eq!(FlowTrace::from_jsonl(&text).unwrap().to_jsonl().unwrap(), text);
}

#[test]
fn missing_forcing_file_is_a_usage_error_without_output() {
    let dir = TempDir::new().unwrap();
    let o =
        curveflow(dir.path(), &["simulate", "--network", "circle(1,32)", "--t-end", "0.01", "--forcing", "nope.json"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("error:"));
    assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 0);
}

#[test]
fn bad_arguments_exit_with_usage_code() {
    let dir = TempDir::new().unwrap();
    assert_eq!(curveflow(dir.path(), &["simulate", "--bogus"]).status.code(), Some(2));
    assert_eq!(curveflow(dir.path(), &["simulate", "--network", "hexagon(1)", "--t-end", "1"]).status.code(), Some(2));
    assert_eq!(curveflow(dir.path(), &["--help"]).status.code(), Some(0));
}

#[test]
fn verify_passes_on_a_clean_trace_and_fails_on_a_tampered_one() {
    let dir = TempDir::new().unwrap();
    simulate_circle(dir.path(), "t.jsonl", "0.05");
    let o = curveflow(dir.path(), &["verify", "--trace", "t.jsonl", "--suite", "budgets", "--out", "r.json"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains(", 0 failed"));
    let reports: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("r.json")).unwrap()).unwrap();
    assert!(reports.as_array().unwrap().iter().all(|r| r["pass"] == true));

    let text = fs::read_to_string(dir.path().join("t.jsonl")).unwrap();
    let mut tampered = false;
    let lines: Vec<String> = text
        .lines()
        .map(|l| {
            let mut v: serde_json::Value = serde_json::from_str(l).unwrap();
            if !tampered && v["record"] == "step" {
                v["dissipation"] = serde_json::json!(1e6);
                tampered = true;
            }
            v.to_string()
        })
        .collect();
    fs::write(dir.path().join("bad.jsonl"), lines.join("\n")).unwrap();
    let o = curveflow(dir.path(), &["verify", "--trace", "bad.jsonl", "--suite", "budgets", "--out", "bad.json"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("FAIL curvature_budget"), "{}", stdout(&o));

    fs::write(dir.path().join("broken.jsonl"), &text[..text.len() / 2]).unwrap();
    assert_eq!(curveflow(dir.path(), &["verify", "--trace", "broken.jsonl"]).status.code(), Some(2));
}

#[test]
fn mollify_distances() {
    let dir = TempDir::new().unwrap();
    fs::write(dir.path().join("zero.json"), r#"{"kind":"zero"}"#).unwrap();
    fs::write(dir.path().join("swirl.json"), r#"{"kind":"gaussian-swirl","amplitude":1.0,"width":0.3}"#).unwrap();
    let distance = |field: &str, m: &str| {
        let o = curveflow(
            dir.path(),
            &["mollify", "--field", field, "--m", m, "--grid-n", "9", "--grid-nt", "2", "--resolution", "6"],
        );
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
        let line = stdout(&o).lines().find(|l| l.starts_with("w12_distance:")).unwrap().to_string();
        line["w12_distance:".len()..].trim().parse::<f64>().unwrap()
    };
    assert_eq!(distance("zero.json", "4"), 0.0);
    let (d8, d16) = (distance("swirl.json", "8"), distance("swirl.json", "16"));
    assert!(d16 < d8, "{d8} then {d16}");
    assert!(dir.path().join("mollified.json").exists());
    let o = curveflow(dir.path(), &["mollify", "--field", "swirl.json", "--m", "0", "--out", "m0.json"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!dir.path().join("m0.json").exists());
}

#[test]
fn plotdata_columns_follow_the_trace() {
    let dir = TempDir::new().unwrap();
    simulate_circle(dir.path(), "p.jsonl", "0.1");
    let o = curveflow(dir.path(), &["plotdata", "--trace", "p.jsonl"]);
    assert_eq!(o.status.code(), Some(0));
    let csv = stdout(&o);
    let mut lines = csv.lines();
    let header = lines.next().unwrap();
    assert_eq!(header, "t,mass,density_ratio,H,U,area_1,area_2");
    for l in lines {
        let cols: Vec<&str> = l.split(',').collect();
        assert_eq!(cols.len(), 7);
        let t: f64 = cols[0].parse().unwrap();
        let mass: f64 = cols[1].parse().unwrap();
        assert!((mass - 2.0 * PI * (1.0 - 2.0 * t).sqrt()).abs() < 5e-3 * 2.0 * PI, "{l}");
        assert_eq!(cols[6], "nan");
    }

    fs::write(dir.path().join("empty.jsonl"), "\n").unwrap();
    let o = curveflow(dir.path(), &["plotdata", "--trace", "empty.jsonl"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "t,mass,density_ratio,H,U\n");
}

#[test]
fn params_prints_the_dyadic_step() {
    let dir = TempDir::new().unwrap();
    let o = curveflow(dir.path(), &["params", "--eps", "0.5"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["c2"], 23);
    assert_eq!(v["p"], 23);
    assert_eq!(v["dt"].as_f64().unwrap(), 2f64.powi(-23));
    assert_eq!(curveflow(dir.path(), &["params", "--eps", "1.5"]).status.code(), Some(2));
}

#[test]
fn config_file_drives_simulate() {
    let dir = TempDir::new().unwrap();
    let cfg = r#"{
        "network": "circle(0.5,32)",
        "t_end": 0.01,
        "flow": { "record_every": 5 },
        "outputs": { "trace": "cfg.jsonl" }
    }"#;
    fs::write(dir.path().join("exp.json"), cfg).unwrap();
    let o = curveflow(dir.path(), &["--config", "exp.json", "-q", "simulate"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(o.stdout.is_empty());
    assert!(dir.path().join("cfg.jsonl").exists());
    fs::write(dir.path().join("typo.json"), r#"{"t_ned": 1.0}"#).unwrap();
    assert_eq!(curveflow(dir.path(), &["--config", "typo.json", "simulate"]).status.code(), Some(2));
}
