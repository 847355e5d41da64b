use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

use cellborrow::scenario::{ScenarioConfig, EXIT_CONFIG, EXIT_OK};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cellborrow"))
        .args(args)
        .output()
        .unwrap()
}

fn write_config(dir: &Path, json: &str) -> String {
    let p = dir.join("config.json");
    fs::write(&p, json).unwrap();
    p.to_str().unwrap().to_string()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// Walks the schema alongside the default config: every key must be
/// documented and every documented default must match.
fn check_schema(schema: &Value, value: &Value, path: &str) {
    if let Some(default) = schema.get("default") {
        assert_eq!(
            default.as_f64().map(Value::from).unwrap_or(default.clone()),
            value.as_f64().map(Value::from).unwrap_or(value.clone()),
            "default of {path}"
        );
    }
    if let (Some(props), Some(obj)) = (schema.get("properties"), value.as_object()) {
        let props = props.as_object().unwrap();
        let mut documented: Vec<_> = props.keys().collect();
        let mut actual: Vec<_> = obj.keys().collect();
        documented.sort();
        actual.sort();
        assert_eq!(documented, actual, "keys of {path}");
        for (k, v) in obj {
            check_schema(&props[k], v, &format!("{path}.{k}"));
        }
    }
}

fn numeric_arrays_as_f64(v: &Value) -> Value {
    match v {
        Value::Number(n) => Value::from(n.as_f64().unwrap()),
        Value::Array(a) => Value::Array(a.iter().map(numeric_arrays_as_f64).collect()),
        Value::Object(o) => Value::Object(
            o.iter()
                .map(|(k, v)| (k.clone(), numeric_arrays_as_f64(v)))
                .collect(),
        ),
        other => other.clone(),
    }
}

#[test]
fn schema_documents_the_default_config() {
    let schema: Value = serde_json::from_str(
        &fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/schema/scenario.schema.json"))
            .unwrap(),
    )
    .unwrap();
    let defaults: Value = serde_json::from_str(&ScenarioConfig::default().to_json()).unwrap();
    check_schema(
        &numeric_arrays_as_f64(&schema),
        &numeric_arrays_as_f64(&defaults),
        "$",
    );
}

#[test]
fn unknown_key_is_reported_with_its_path() {
    let tmp = tempfile::tempdir().unwrap();
    let c = write_config(tmp.path(), r#"{"rf": {"carrier_hz": 1.8e9}}"#);
    let o = run(&["analyze", "--config", &c, "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(EXIT_CONFIG));
    assert!(stderr(&o).contains("rf.carrier_hz"), "{}", stderr(&o));
}

#[test]
fn wrong_type_is_reported_with_its_path() {
    let tmp = tempfile::tempdir().unwrap();
    let c = write_config(tmp.path(), r#"{"cluster": {"n": "many"}}"#);
    let o = run(&["analyze", "--config", &c, "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(EXIT_CONFIG));
    assert!(stderr(&o).contains("cluster.n"), "{}", stderr(&o));
}

#[test]
fn threshold_above_capacity_names_the_invariant() {
    let tmp = tempfile::tempdir().unwrap();
    let c = write_config(tmp.path(), r#"{"cluster": {"n": 50, "n_th": 70}}"#);
    let o = run(&["analyze", "--config", &c, "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(EXIT_CONFIG));
    assert!(stderr(&o).contains("n_th <= n"), "{}", stderr(&o));
}

#[test]
fn missing_config_and_bad_usage_exit_2() {
    let o = run(&["analyze", "--config", "/nonexistent.json", "--out", "/tmp"]);
    assert_eq!(o.status.code(), Some(EXIT_CONFIG));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(EXIT_CONFIG));
    assert_eq!(run(&["analyze"]).status.code(), Some(EXIT_CONFIG));

    let tmp = tempfile::tempdir().unwrap();
    let c = write_config(tmp.path(), "{}");
    let out = tmp.path().to_str().unwrap();
    let o = run(&["figures", "--config", &c, "--which", "8", "--out", out]);
    assert_eq!(o.status.code(), Some(EXIT_CONFIG));
    let o = run(&["rf", "--config", &c, "--strategy", "shout", "--out", out]);
    assert_eq!(o.status.code(), Some(EXIT_CONFIG));
    let o = run(&["rf", "--config", &c, "--strategy", "none", "--sweep", "1:0.1:0.1", "--out", out]);
    assert_eq!(o.status.code(), Some(EXIT_CONFIG));
}

#[test]
fn rf_table_has_fixed_columns() {
    let tmp = tempfile::tempdir().unwrap();
    let c = write_config(tmp.path(), "{}");
    let out = tmp.path().to_str().unwrap();
    let o = run(&["rf", "--config", &c, "--strategy", "adjacent-bifurcation", "--sweep", "0.1:1:0.3", "--out", out]);
    assert_eq!(o.status.code(), Some(EXIT_OK), "{}", stderr(&o));
    let csv = fs::read_to_string(tmp.path().join("rf_adjacent_bifurcation.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("distance_km,sinr_db,capacity_bps_hz,outage"));
    assert_eq!(lines.count(), 4);
    let manifest: Value =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("rf.manifest.json")).unwrap())
            .unwrap();
    assert_eq!(manifest["command"], "rf");
    assert_eq!(manifest["config_sha256"].as_str().unwrap().len(), 64);
}

#[test]
fn validate_passes_on_a_small_grid() {
    let tmp = tempfile::tempdir().unwrap();
    let c = write_config(
        tmp.path(),
        r#"{"traffic": {"load_grid": {"start_fraction": 0.9, "stop_fraction": 1.3, "points": 2}},
            "simulation": {"horizon_arrivals": 200000}}"#,
    );
    let o = run(&["validate", "--config", &c, "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(EXIT_OK), "{}", String::from_utf8_lossy(&o.stdout));
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains("PASS analytic agreement"));
    assert!(stdout.contains("PASS invariants"));
    let rows = fs::read_to_string(tmp.path().join("validation.csv")).unwrap();
    assert_eq!(rows.lines().count(), 1 + 2 * 7);
}

#[test]
fn figures_default_to_the_configured_list_and_directory() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("figs");
    let json = format!(
        r#"{{"outputs": {{"directory": {}, "figures": [10, 14]}}}}"#,
        serde_json::to_string(out.to_str().unwrap()).unwrap()
    );
    let c = write_config(tmp.path(), &json);
    let o = run(&["figures", "--config", &c]);
    assert_eq!(o.status.code(), Some(EXIT_OK), "{}", stderr(&o));
    let mut names: Vec<_> = fs::read_dir(&out)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    assert_eq!(names, ["fig10.csv", "fig14.csv", "figures.manifest.json"]);
}
