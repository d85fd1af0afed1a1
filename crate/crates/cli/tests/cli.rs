use std::process::{Command, Output};

use serde_json::Value;

fn mdlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mdlab"))
        .args(args)
        .output()
        .expect("spawn mdlab")
}

fn stdout(out: &Output) -> String {
    assert!(
        out.status.success(),
        "exit {:?}: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn json(args: &[&str]) -> Value {
    serde_json::from_str(&stdout(&mdlab(args))).unwrap()
}

fn without_wall_time(text: &str) -> String {
    text.lines()
        .filter(|l| !l.trim_start().starts_with("\"wall_time_s\""))
        .collect::<Vec<_>>()
        .join("\n")
}

fn num(v: &Value, path: &str) -> f64 {
    v.pointer(path).and_then(Value::as_f64).unwrap_or_else(|| panic!("{path}"))
}

#[test]
fn chsh_optimal_example() {
    let r = json(&["chsh", "--model", "singlet-onesided", "--settings", "optimal", "--shots", "1000000", "--seed", "7"]);
    let b = num(&r, "/results/monte_carlo/chsh/max_value");
    assert!((b - 2.0 * 2f64.sqrt()).abs() <= 0.01, "B = {b}");
    let bound = num(&r, "/results/monte_carlo/chsh/bound");
    assert!((bound - 2.0 * 2f64.sqrt()).abs() <= 1e-8);
    assert_eq!(r["results"]["monte_carlo"]["chsh"]["satisfied"], Value::Bool(true));
    assert_eq!(r["config"]["seed"], 7);
}

#[test]
fn table_example() {
    let r = json(&["table", "--p", "0.5", "--shots", "10000"]);
    assert_eq!(num(&r, "/results/chsh_b"), 3.0);
    assert_eq!(num(&r, "/results/m"), 1.0);
    assert_eq!(num(&r, "/results/f"), 0.5);
}

#[test]
fn mutualinfo_example() {
    let r = json(&["mutualinfo"]);
    assert!((num(&r, "/results/bits") - 0.27865).abs() <= 1e-4);
}

#[test]
fn same_seed_is_byte_identical() {
    let args = ["simulate", "--shots", "200000", "--seed", "11"];
    let a = stdout(&mdlab(&args));
    let b = stdout(&mdlab(&args));
    assert_eq!(without_wall_time(&a), without_wall_time(&b));
    let c = stdout(&mdlab(&["simulate", "--shots", "200000", "--seed", "12"]));
    assert_ne!(without_wall_time(&a), without_wall_time(&c));
}

#[test]
fn worker_count_does_not_change_results() {
    let run = |w: &str| json(&["chsh", "--shots", "300000", "--seed", "3", "--workers", w]);
    let (one, many) = (run("1"), run("6"));
    assert_eq!(one["results"].to_string(), many["results"].to_string());
    assert_eq!(one["std_errors"].to_string(), many["std_errors"].to_string());
}

#[test]
fn usage_errors_exit_2() {
    for args in [
        vec!["chsh", "--settings", "X=0,0,0"],
        vec!["chsh", "--shots", "0"],
        vec!["table", "--p", "1.5"],
        vec!["sweep", "--p-range", "1:0:0.1"],
        vec!["sweep"],
        vec!["optimize", "--target-b", "4.5"],
        vec!["chsh", "--model", "nope"],
        vec!["frobnicate"],
        vec!["chsh", "--shots", "ten"],
    ] {
        let out = mdlab(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
    }
    let err = String::from_utf8(mdlab(&["chsh", "--settings", "X=0,0,0"]).stderr).unwrap();
    assert!(err.contains("X=0,0,0"), "{err}");
}

#[test]
fn sweep_csv() {
    let text = stdout(&mdlab(&["sweep", "--p-range", "0:1:0.25", "--format", "csv"]));
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("p,chsh_B,M,F,m_star"));
    let bs: Vec<f64> = lines.map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert_eq!(bs, [2.0, 2.5, 3.0, 3.5, 4.0]);

    let text = stdout(&mdlab(&["sweep", "--b-range", "2:4:1", "--format", "csv"]));
    let rows: Vec<Vec<f64>> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|c| c.parse().unwrap()).collect())
        .collect();
    for (row, want) in rows.iter().zip([0.0, 1.0, 2.0]) {
        assert!((row[4] - want).abs() <= 1e-9, "{row:?}");
    }
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.toml");
    std::fs::write(&path, "model = \"toy-table\"\np = 0.25\nshots = 5000\nseed = 9\n").unwrap();
    let p = path.to_str().unwrap();
    let r = json(&["table", "--config", p]);
    assert_eq!(num(&r, "/results/chsh_b"), 2.5);
    assert_eq!(r["config"]["seed"], 9);
    let r = json(&["table", "--config", p, "--p", "1"]);
    assert_eq!(num(&r, "/results/chsh_b"), 4.0);
    assert_eq!(num(&r, "/results/f"), 0.0);

    std::fs::write(&path, "shots = \"many\"\n").unwrap();
    assert_eq!(mdlab(&["table", "--config", p]).status.code(), Some(2));
}

#[test]
fn output_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("out.json");
    let out = mdlab(&["mdep", "--output", path.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let r: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert!((num(&r, "/results/m") - (2.0 * 2f64.sqrt() - 2.0)).abs() <= 1e-8);
}

#[test]
fn entropy_seed_is_echoed() {
    let a = json(&["mdep", "--entropy"]);
    let b = json(&["mdep", "--entropy"]);
    assert!(a["config"]["seed"].is_u64());
    assert_ne!(a["config"]["seed"], b["config"]["seed"]);
}

#[test]
fn optimize_default_and_quad() {
    let r = json(&["optimize"]);
    assert!((num(&r, "/results/m_star") - (2.0 * 2f64.sqrt() - 2.0)).abs() <= 1e-9);
    let r = json(&["optimize", "--quad", "1,1,1,-1"]);
    assert!((num(&r, "/results/m_star") - 2.0).abs() <= 1e-9);
}
