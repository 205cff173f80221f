use eif_core::config::Config;
use eif_core::controller::FrontierPolicy;
use eif_core::eval::{read_trace, rebuild_map, run_episode, run_seed_for, trace_to_string, write_trace, PlannerKind};
use eif_core::featmap::snapshot::MapSnapshot;
use eif_core::scene::{generate_scene, Scene, SizeClass};
use eif_core::tasks::{generate_tasks, read_tasks, validate_feasibility, write_tasks, TaskCounts};
use std::io::BufReader;

#[test]
fn scene_files_round_trip() {
    for (seed, size) in [(5, SizeClass::Small), (6, SizeClass::Large)] {
        let scene = generate_scene(seed, size);
        let text = scene.to_json();
        let back = Scene::from_json(&text).unwrap();
        assert_eq!(back, scene);
        assert_eq!(back.to_json(), text);
    }
    assert!(Scene::from_json("{\"schema_version\": 99}").is_err());
}

#[test]
fn task_files_round_trip_and_stay_feasible() {
    let config = Config::default();
    let scene = generate_scene(8, SizeClass::Small);
    let tasks = generate_tasks(&scene, TaskCounts { short: 3, long: 1, abstract_: 1 }, 8, &config);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("tasks.json");
    write_tasks(&path, &tasks).unwrap();
    let back = read_tasks(&path).unwrap();
    assert_eq!(back, tasks);
    for t in &back {
        assert!(validate_feasibility(t, &scene, &config), "{}", t.id);
    }
}

#[test]
fn traces_and_snapshots_round_trip() {
    let config = Config::default();
    let scene = generate_scene(9, SizeClass::Large);
    let tasks = generate_tasks(&scene, TaskCounts { short: 1, long: 0, abstract_: 0 }, 9, &config);
    let task = &tasks[0];
    let mut planner = PlannerKind::Heuristic { substitution: true }.build(task, &config).unwrap();
    let out = run_episode(&scene, task, planner.as_mut(), FrontierPolicy::Greedy, &config, run_seed_for(&config, task));

    let mut bytes = Vec::new();
    write_trace(&mut bytes, &out.trace).unwrap();
    let back = read_trace(BufReader::new(bytes.as_slice())).unwrap();
    assert_eq!(trace_to_string(&back), trace_to_string(&out.trace));

    let rebuilt = rebuild_map(&scene, &back).unwrap();
    assert_eq!(MapSnapshot::of(&rebuilt), MapSnapshot::of(&out.map));

    let snap = MapSnapshot::of(&out.map);
    let mut bin = Vec::new();
    snap.write_to(&mut bin).unwrap();
    assert_eq!(MapSnapshot::read_from(bin.as_slice()).unwrap(), snap);
    assert!(MapSnapshot::read_from(&bin[..bin.len() / 2]).is_err());
}
