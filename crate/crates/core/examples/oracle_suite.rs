//! Runs the oracle planner and controller over a freshly generated corpus and prints metrics.
//!
//! Usage: `cargo run --release --example oracle_suite -- [scenes] [tasks-per-scene] [first-seed]`

use eif_core::config::Config;
use eif_core::controller::FrontierPolicy;
use eif_core::eval::{compute_metrics, run_suite, PlannerKind, SceneCache};
use eif_core::scene::{generate_scene, SizeClass};
use eif_core::tasks::{corpus_counts, generate_tasks};
use std::time::Instant;

fn main() {
    let mut args = std::env::args().skip(1).map(|a| a.parse::<usize>().expect("numeric argument"));
    let n_scenes = args.next().unwrap_or(4);
    let per_scene = args.next().unwrap_or(10);
    let first = args.next().unwrap_or(0) as u64;
    let config = Config::default();
    let start = Instant::now();
    let mut tasks = Vec::new();
    let mut cache = SceneCache::default();
    for seed in first..first + n_scenes as u64 {
        let size = if seed % 2 == 0 { SizeClass::Small } else { SizeClass::Large };
        let scene = generate_scene(seed, size);
        tasks.extend(generate_tasks(&scene, corpus_counts(per_scene), seed, &config));
        cache.insert(scene);
    }
    println!("{} tasks generated in {:.2?}", tasks.len(), start.elapsed());
    let start = Instant::now();
    let results = run_suite(&tasks, &cache, &PlannerKind::Oracle, FrontierPolicy::Oracle, &config, 1);
    for r in results.iter().filter(|r| !r.success) {
        let t = tasks.iter().find(|t| t.id == r.task_id).expect("task");
        println!("FAIL {} `{}`: {} {:?} after {} actions", r.task_id, t.instruction, r.failure_class, r.sub_tag, r.ll_actions);
    }
    let expert = results.iter().map(|r| (r.task_id.clone(), r.ll_actions)).collect();
    let report = compute_metrics(&results, &expert).expect("expert lengths");
    println!("{}", report.to_csv());
    println!("{} episodes in {:.2?}", results.len(), start.elapsed());
}
