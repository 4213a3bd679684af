use std::path::Path;
use std::process::{Command, Output};

fn hermitize(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hermitize")).args(args).output().expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

fn column(csv: &str, name: &str) -> Vec<String> {
    let mut lines = csv.lines();
    let idx = lines.next().unwrap().split(',').position(|c| c == name).expect("column present");
    lines.map(|l| l.split(',').nth(idx).unwrap().to_string()).collect()
}

const TWO_LEVEL: &str = r#"{
  "model": { "name": "two_level_loss", "omega": 1.0, "gamma": 1.0 },
  "grid": { "t0": 0.0, "t1": 5.0, "steps": 5000 },
  "gauge": { "kind": "zero" },
  "metric_seed": "oracle"
}"#;

#[test]
fn oracle_scenario_succeeds_within_tolerance() {
    let dir = tempfile::tempdir().unwrap();
    let config = write(dir.path(), "run.json", TWO_LEVEL);
    let out_path = dir.path().join("diag.csv");
    let o = hermitize(&["run", "--config", &config, "--output", out_path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));

    let csv = std::fs::read_to_string(&out_path).unwrap();
    assert!(csv.starts_with(
        "t,herm_residual_Hflat,min_eig_G,cond_G,metric_consistency,inner_product_re,inner_product_im,oracle_deviation,flat_norm\n"
    ));
    assert_eq!(csv.lines().count(), 5002);
    let worst = column(&csv, "oracle_deviation").iter().map(|v| v.parse::<f64>().unwrap()).fold(0.0, f64::max);
    assert!(worst <= 1e-8, "oracle deviation {worst}");
}

#[test]
fn missing_gamma_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let config = write(dir.path(), "bad.json", &TWO_LEVEL.replace(", \"gamma\": 1.0", ""));
    let o = hermitize(&["run", "--config", &config]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("gamma"), "{}", stderr(&o));
}

#[test]
fn unknown_key_is_a_config_error() {
    let o = hermitize(&["run", "--set", "grid.dt=0.1"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("dt"), "{}", stderr(&o));
}

#[test]
fn indefinite_metric_seed_names_positivity() {
    let o = hermitize(&["run", "--set", r#"metric_seed={"matrix": [[1, 0], [0, -0.5]]}"#]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("positivity"), "{}", stderr(&o));
}

#[test]
fn json_output_echoes_config() {
    let o = hermitize(&["run", "--set", "grid.steps=50", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["config"]["grid"]["steps"], 50);
    assert_eq!(v["records"].as_array().unwrap().len(), 51);
    assert!(v["records"][0]["herm_residual_Hflat"].is_number());
}

#[test]
fn run_output_is_bitwise_stable() {
    let a = hermitize(&["run", "--set", "grid.steps=300", "--set", "gauge.kind=pointwise_sqrt"]);
    let b = hermitize(&["run", "--set", "grid.steps=300", "--set", "gauge.kind=pointwise_sqrt"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn gamma_sweep_reports_regimes_in_order() {
    let o = hermitize(&[
        "sweep",
        "--set",
        "grid.steps=500",
        "--set",
        "metric_seed=identity",
        "--axis",
        "gamma",
        "--values",
        "0,1,1.9,2.0,2.1,4",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = String::from_utf8(o.stdout).unwrap();
    assert_eq!(
        column(&csv, "regime"),
        ["underdamped", "underdamped", "underdamped", "exceptional-point", "overdamped", "overdamped"]
    );
}

#[test]
fn bosonic_sweep_gives_one_row_per_value() {
    let dir = tempfile::tempdir().unwrap();
    let element = dir.path().join("elem.csv");
    let o = Command::new(env!("CARGO_BIN_EXE_hermitize"))
        .env("HERMITIZE_THREADS", "2")
        .args([
            "sweep",
            "--set",
            r#"model={"name": "two_mode_bosonic", "gamma_a": 0.3, "gamma_b": 0.1, "g": 0.5, "n_max": 3}"#,
            "--set",
            "grid.t1=1",
            "--set",
            "grid.steps=200",
            "--set",
            &format!("output={}", serde_json::Value::from(element.to_str().unwrap())),
            "--axis",
            "g",
            "--values",
            "0.2,0.4,0.6,0.8,1.0,1.2",
        ])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = String::from_utf8(o.stdout).unwrap();
    assert_eq!(csv.lines().count(), 7);
    assert_eq!(column(&csv, "status"), vec!["ok"; 6]);
    for i in 0..6 {
        assert!(dir.path().join(format!("elem.{i}.csv")).exists());
    }
}

#[test]
fn empty_sweep_is_a_config_error() {
    let o = hermitize(&["sweep", "--axis", "gamma"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn check_is_deterministic_and_flags_sabotage() {
    let dir = tempfile::tempdir().unwrap();
    let paths: Vec<String> = (0..2).map(|i| dir.path().join(format!("check{i}.csv")).to_string_lossy().into()).collect();
    let runs: Vec<Output> = paths.iter().map(|p| hermitize(&["check", "--output", p])).collect();
    let a = std::fs::read(&paths[0]).unwrap();
    let b = std::fs::read(&paths[1]).unwrap();
    assert_eq!(a, b);
    assert_eq!(runs[0].status.code(), runs[1].status.code());
    let table = String::from_utf8_lossy(&runs[0].stdout).into_owned();
    assert_eq!(table.lines().filter(|l| l.starts_with("[PASS]") || l.starts_with("[FAIL]")).count(), 10);
    assert!(table.lines().any(|l| l.starts_with("[PASS]") && l.contains("integrator-order")));

    let sabotaged = hermitize(&["check", "--scheme", "euler"]);
    assert_eq!(sabotaged.status.code(), Some(2));
    let table = String::from_utf8_lossy(&sabotaged.stdout).into_owned();
    assert!(table.lines().any(|l| l.starts_with("[FAIL]") && l.contains("integrator-order")), "{table}");
}

#[test]
fn check_without_projection_matches_the_default_verdicts() {
    let verdicts = |o: &Output| -> Vec<String> {
        String::from_utf8_lossy(&o.stdout).lines().filter(|l| l.starts_with('[')).map(|l| l[..6].to_string()).collect()
    };
    let plain = hermitize(&["check"]);
    let unprojected = hermitize(&["check", "--no-projection"]);
    assert_eq!(verdicts(&plain), verdicts(&unprojected));
    assert_eq!(plain.status.code(), unprojected.status.code());
}
