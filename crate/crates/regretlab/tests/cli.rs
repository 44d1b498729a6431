use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn regretlab(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_regretlab"))
        .args(args)
        .current_dir(cwd)
        .env("RUST_LOG", "error")
        .output()
        .expect("binary runs")
}

const SMALL: &str = r#"{
  "name": "small",
  "arms": [
    {"label": "opt", "game": {"kind": "random", "players": 2, "actions": 3},
     "learners": [{"kind": "optimistic", "eta": {"fixed": 0.1}}]},
    {"label": "bm", "game": {"kind": "random", "players": 3, "actions": 3},
     "learners": [{"kind": "bm", "eta": {"fixed": 0.1}}]}
  ],
  "t_grid": [32, 64, 128, 256],
  "seeds": [0, 1],
  "metric": "max_swap_regret"
}"#;

#[test]
fn simulate_then_audit() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("small.json"), SMALL).unwrap();
    let out = regretlab(&["simulate", "--config", "small.json", "--arm", "bm", "--rounds", "200", "--out", "t"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let summary: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let trace = summary["trace"].as_str().unwrap().to_owned();
    assert!(summary["swap_regret"][0].as_f64().unwrap() >= summary["external_regret"][0].as_f64().unwrap() - 1e-12);

    let audit = regretlab(&["audit", &trace], dir.path());
    assert_eq!(audit.status.code(), Some(0), "{}", String::from_utf8_lossy(&audit.stdout));
}

#[test]
fn tampered_trace_fails_audit() {
    let dir = tempfile::tempdir().unwrap();
    let out = regretlab(&["simulate", "--builtin", "thm31", "--rounds", "100", "--out", "t"], dir.path());
    assert!(out.status.success());
    let summary: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let trace = dir.path().join(summary["trace"].as_str().unwrap());
    // Make player 0 alternate between pure strategies: a path far longer
    // than any small step size allows.
    let text = fs::read_to_string(&trace).unwrap();
    let mut lines: Vec<String> = text.lines().map(str::to_owned).collect();
    for line in lines.iter_mut().skip(1) {
        let mut f: Vec<String> = line.split(',').map(str::to_owned).collect();
        let (round, player, action): (usize, usize, usize) =
            (f[0].parse().unwrap(), f[1].parse().unwrap(), f[2].parse().unwrap());
        if player == 0 {
            f[3] = if action == round % 2 { "1".into() } else { "0".into() };
            *line = f.join(",");
        }
    }
    fs::write(&trace, lines.join("\n") + "\n").unwrap();
    let audit = regretlab(&["audit", trace.to_str().unwrap()], dir.path());
    assert_eq!(audit.status.code(), Some(3));
}

#[test]
fn experiment_output_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("small.json"), SMALL).unwrap();
    let run = |jobs: &str, out: &str| {
        let o = regretlab(&["experiment", "--config", "small.json", "--jobs", jobs, "--out", out], dir.path());
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        (
            fs::read(dir.path().join(out).join("small_metrics.csv")).unwrap(),
            fs::read(dir.path().join(out).join("small_summary.json")).unwrap(),
        )
    };
    assert_eq!(run("1", "a"), run("4", "b"));
}

#[test]
fn invalid_inputs_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("bad.json"), "{\n  \"name\": \"x\",\n  oops\n}").unwrap();
    let out = regretlab(&["experiment", "--config", "bad.json"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains(":3"), "{}", String::from_utf8_lossy(&out.stderr));

    assert_eq!(regretlab(&["experiment", "--builtin", "nope"], dir.path()).status.code(), Some(1));
    assert_eq!(regretlab(&["simulate"], dir.path()).status.code(), Some(1));
    assert_eq!(regretlab(&["audit", "missing.csv"], dir.path()).status.code(), Some(1));
    assert_eq!(regretlab(&["probe", "--rounds", "10", "--eta", "-1"], dir.path()).status.code(), Some(1));
}

#[test]
fn oracle_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = regretlab(&["oracle", "--trials", "50"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
}

#[test]
fn probe_can_force_a_game() {
    let dir = tempfile::tempdir().unwrap();
    let out = regretlab(&["probe", "--rounds", "1000", "--eta", "0.01", "--game", "invariant_G2"], dir.path());
    assert_eq!(regretlab(&["probe", "--rounds", "10", "--eta", "1", "--game", "nope"], dir.path()).status.code(), Some(1));
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}
