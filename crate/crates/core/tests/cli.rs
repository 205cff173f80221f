use clap::Parser;
use eif_core::cli::{resolve_config, Cli};
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

fn eif(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_eif"))
        .args(args)
        .current_dir(dir)
        .env_remove("EIF_SEED")
        .output()
        .expect("binary runs")
}

fn effective_config(out: &Output) -> String {
    let err = String::from_utf8_lossy(&out.stderr);
    let line = err.lines().find_map(|l| l.strip_prefix("effective config: ")).expect("config logged");
    line.to_string()
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(eif(&["gen-scenes", "--bogus"], dir.path()).status.code(), Some(2));
    assert_eq!(eif(&["teleport"], dir.path()).status.code(), Some(2));
    assert_eq!(eif(&["--set", "no_such_field=1", "gen-scenes", "--out-dir", "s"], dir.path()).status.code(), Some(2));
    assert_eq!(eif(&["--set", "cell_size=-1", "gen-scenes", "--out-dir", "s"], dir.path()).status.code(), Some(2));
    let missing = eif(&["run", "--corpus", "missing.json", "--task", "x", "--trace", "t.jsonl"], dir.path());
    assert_eq!(missing.status.code(), Some(1));
    assert_eq!(eif(&["--help"], dir.path()).status.code(), Some(0));
}

#[test]
fn later_layers_win() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("c.json");
    std::fs::write(&file, r#"{"max_hl_steps": 5, "replan_interval": 4, "frontier_threshold": 90}"#).unwrap();
    let file = file.to_str().unwrap();
    let cli = Cli::parse_from(["eif", "--config", file, "--set", "replan_interval=7", "--frontier-threshold", "120", "gen-scenes", "--out-dir", "x"]);
    let env = [("EIF_MAX_HL_STEPS".to_string(), "6".to_string()), ("EIF_REPLAN_INTERVAL".to_string(), "2".to_string())];
    let cfg = resolve_config(&cli.global, env).unwrap();
    assert_eq!(cfg.max_hl_steps, 6);
    assert_eq!(cfg.replan_interval, 7);
    assert_eq!(cfg.frontier_threshold, 120);
    assert_eq!(cfg.unknown_cost, eif_core::config::Config::default().unknown_cost);
}

#[test]
fn scenes_and_tasks_reproduce_from_logged_config() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let out = eif(&["gen-scenes", "--seeds", "3..=4", "--out-dir", "scenes"], d);
    assert!(out.status.success());
    let scenes: Vec<String> = String::from_utf8(out.stdout).unwrap().lines().map(String::from).collect();
    assert_eq!(scenes, ["scenes/scene-3-large.json", "scenes/scene-4-small.json"]);

    let first = eif(&["--seed", "11", "gen-tasks", "--scene", &scenes[1], "--n-short", "2", "--n-long", "1", "--out", "a.json"], d);
    assert!(first.status.success(), "{}", String::from_utf8_lossy(&first.stderr));
    std::fs::write(d.join("logged.json"), effective_config(&first)).unwrap();
    let again = eif(&["--config", "logged.json", "gen-tasks", "--scene", &scenes[1], "--n-short", "2", "--n-long", "1", "--out", "b.json"], d);
    assert!(again.status.success());
    let a = std::fs::read(d.join("a.json")).unwrap();
    assert_eq!(a, std::fs::read(d.join("b.json")).unwrap());
    let other = eif(&["--seed", "12", "gen-tasks", "--scene", &scenes[1], "--n-short", "2", "--n-long", "1", "--out", "c.json"], d);
    assert!(other.status.success());
    assert_ne!(a, std::fs::read(d.join("c.json")).unwrap());
}

#[test]
fn run_then_render() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let corpus = fixtures().join("tasks.json");
    let corpus = corpus.to_str().unwrap();
    let out = eif(&["run", "--corpus", corpus, "--task", "s0-short-000", "--trace", "t.jsonl"], d);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let result: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(result["success"], true);
    assert!(eif(&["render", "--trace", "t.jsonl", "--out", "map.txt"], d).status.success());
    let text = std::fs::read_to_string(d.join("map.txt")).unwrap();
    assert!(text.contains('o') && text.contains('#'));
}

#[test]
fn eval_and_sft_export() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let corpus = fixtures().join("tasks.json");
    let corpus = corpus.to_str().unwrap();
    let out = eif(&["eval", "--corpus", corpus, "--report", "r.json", "--csv", "r.csv"], d);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(d.join("r.json")).unwrap()).unwrap();
    assert_eq!(report["report"]["overall"]["sr"], 1.0);
    assert_eq!(report["planner"], "oracle");
    assert!(std::fs::read_to_string(d.join("r.csv")).unwrap().starts_with("group,"));

    assert!(eif(&["export-sft", "--corpus", corpus, "--out", "sft.jsonl"], d).status.success());
    let lines: Vec<serde_json::Value> = std::fs::read_to_string(d.join("sft.jsonl"))
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert!(lines.iter().any(|l| l["kind"] == "hp"));
    assert!(lines.iter().any(|l| l["kind"] == "lc"));
}

/// Set `BLESS=1` to rewrite the golden image after an intended rendering change.
#[test]
fn render_matches_golden_image() {
    let dir = tempfile::tempdir().unwrap();
    let trace = fixtures().join("episode.jsonl");
    let out = eif(&["render", "--trace", trace.to_str().unwrap(), "--out", "map.png", "--scale", "2", "--heat"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let got = image::open(dir.path().join("map.png")).unwrap().to_rgb8();
    let golden = fixtures().join("episode_golden.png");
    if std::env::var_os("BLESS").is_some() {
        got.save(&golden).unwrap();
    }
    let want = image::open(&golden).expect("golden image present").to_rgb8();
    assert_eq!(got.dimensions(), want.dimensions());
    let differing = got.pixels().zip(want.pixels()).filter(|(a, b)| a != b).count();
    assert_eq!(differing, 0, "{differing} pixels differ from the golden image");
}
