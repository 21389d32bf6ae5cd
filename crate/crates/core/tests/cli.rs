use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use teamgame::game::{save_team_game, TeamGame};

fn teamgame(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_teamgame")).args(args).output().expect("binary runs")
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn last_csv_gap(path: &Path) -> f64 {
    let text = fs::read_to_string(path).unwrap();
    let header: Vec<&str> = text.lines().next().unwrap().split(',').collect();
    let col = header.iter().position(|&h| h == "ne_gap").unwrap();
    text.lines().last().unwrap().split(',').nth(col).unwrap().parse().unwrap()
}

#[test]
fn presets_are_listed_and_shown() {
    let out = teamgame(&["preset", "list"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for name in ["gmp-figure", "wgan-figure", "avg-iterate", "sweep-2v2", "stability"] {
        assert!(text.contains(name), "{name} missing from the list");
    }
    let out = teamgame(&["preset", "show", "sweep-2v2"]);
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["command"], "sweep");
    assert_eq!(v["config"]["method"]["k"], -1.2);
}

#[test]
fn gmp_figure_run_separates_kpv_from_the_baselines() {
    let dir = tempfile::tempdir().unwrap();
    let out = teamgame(&["run", "--preset", "gmp-figure", "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let summary = json(&dir.path().join("summary.json"));
    for m in summary["methods"].as_array().unwrap() {
        let name = m["method"].as_str().unwrap();
        assert_eq!(m["converged"], name == "kpv", "{name}");
        let csv = dir.path().join(m["csv"].as_str().unwrap());
        assert_eq!(m["final_ne_gap"].as_f64().unwrap(), last_csv_gap(&csv));
    }
}

#[test]
fn repeated_runs_write_identical_trajectories() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for d in [&a, &b] {
        let out = teamgame(&["run", "--preset", "avg-iterate", "--seed", "4", "--out", d.to_str().unwrap()]);
        assert!(out.status.success());
    }
    for m in ["gda", "ogda", "eg", "omwu"] {
        let name = format!("{m}.csv");
        assert_eq!(fs::read(a.join(&name)).unwrap(), fs::read(b.join(&name)).unwrap(), "{name}");
    }
}

#[test]
fn divergence_is_recorded_not_fatal() {
    let dir = tempfile::tempdir().unwrap();
    let out = teamgame(&["run", "--preset", "wgan-figure", "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success());
    let summary = json(&dir.path().join("summary.json"));
    let methods = summary["methods"].as_array().unwrap();
    let gda = methods.iter().find(|m| m["method"] == "gda").unwrap();
    assert!(gda["error"].as_str().unwrap().contains("divergence"));
    assert_eq!(gda["converged"], false);
    for m in methods.iter().filter(|m| m["method"] != "gda") {
        assert_eq!(m["converged"], true, "{}", m["method"]);
    }
}

#[test]
fn empty_sweep_from_a_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("sweep.json");
    fs::write(
        &cfg,
        r#"{"n_games": 0, "team_a": [2, 2], "team_b": [2, 2],
            "method": {"method": "kpv", "eta": 0.05, "k": -1.2, "p": 0.02}}"#,
    )
    .unwrap();
    let out_dir = dir.path().join("out");
    let out = teamgame(&["sweep", "--config", cfg.to_str().unwrap(), "--out", out_dir.to_str().unwrap()]);
    assert!(out.status.success());
    assert_eq!(
        fs::read_to_string(out_dir.join("sweep.csv")).unwrap(),
        "game_index,seed,converged,final_ne_gap,iters\n"
    );
}

#[test]
fn small_sweep_uses_consecutive_seeds() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let out = teamgame(&["sweep", "--preset", "sweep-2v2", "--n-games", "3", "--seed", "10", "--jobs", "2", "--out", d]);
    assert!(out.status.success());
    let text = fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    let seeds: Vec<&str> = text.lines().skip(1).map(|l| l.split(',').nth(1).unwrap()).collect();
    assert_eq!(seeds, ["10", "11", "12"]);
    let summary = json(&dir.path().join("sweep_summary.json"));
    assert_eq!(summary["n_games"], 3);
}

#[test]
fn stability_report_for_gmp() {
    let out = teamgame(&["stability", "--preset", "stability"]);
    assert!(out.status.success());
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    let k = &v["game_operator"]["k_interval"];
    assert!((k["lower"].as_f64().unwrap() + 5.0).abs() < 1e-8);
    assert!((k["upper"].as_f64().unwrap() + 1.0).abs() < 1e-8);
    assert_eq!(v["weak_stability"]["weakly_stable"], false);
    let gda = v["dynamics"].as_array().unwrap().iter().find(|d| d["method"] == "gda").unwrap();
    assert!(gda["spectral_radius"].as_f64().unwrap() > 1.0);
}

#[test]
fn constant_game_is_reported_singular() {
    let dir = tempfile::tempdir().unwrap();
    let game = dir.path().join("flat.json");
    save_team_game(&TeamGame::constant(vec![2, 2], vec![2, 2], 1.0).unwrap(), &game).unwrap();
    let cfg = dir.path().join("stab.json");
    fs::write(&cfg, format!(r#"{{"game": {{"type": "file", "path": {:?}}}}}"#, game.to_str().unwrap())).unwrap();
    let out = teamgame(&["stability", "--config", cfg.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["game_operator"]["condition_holds"], false);
    assert_eq!(v["game_operator"]["invertible"], false);
}

#[test]
fn configuration_problems_exit_with_code_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(&bad, r#"{"game": {"type": "gmp", "omega": 0.5}, "methods": [], "init": {"type": "random"}}"#).unwrap();
    let d = dir.path().to_str().unwrap();
    for args in [
        vec!["run", "--config", bad.to_str().unwrap(), "--out", d],
        vec!["run", "--preset", "sweep-2v2", "--out", d],
        vec!["run", "--preset", "no-such-preset"],
        vec!["run"],
        vec!["stability", "--config", "/nonexistent.json"],
        vec!["frobnicate"],
    ] {
        assert_eq!(teamgame(&args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn numeric_failures_exit_with_code_three() {
    // entries this large overflow the reduced Hessian to infinity
    let dir = tempfile::tempdir().unwrap();
    let game = dir.path().join("huge.json");
    let payoff: Vec<f64> = (0..4).map(|i| if i % 3 == 0 { 1e308 } else { -1e308 }).collect();
    save_team_game(&TeamGame::new(vec![2], vec![2], payoff).unwrap(), &game).unwrap();
    let cfg = dir.path().join("stab.json");
    fs::write(&cfg, format!(r#"{{"game": {{"type": "file", "path": {:?}}}}}"#, game.to_str().unwrap())).unwrap();
    assert_eq!(teamgame(&["stability", "--config", cfg.to_str().unwrap()]).status.code(), Some(3));
}
