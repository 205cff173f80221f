//! Sweeps the frontier area threshold with the greedy controller and reports SR and mean path.
//!
//! Usage: `cargo run --release --example threshold_sweep -- [scenes] [tasks-per-scene]`

use eif_core::config::Config;
use eif_core::controller::FrontierPolicy;
use eif_core::eval::{run_suite, PlannerKind, SceneCache};
use eif_core::scene::{generate_scene, SizeClass};
use eif_core::tasks::{corpus_counts, generate_tasks};
use std::time::Instant;

fn main() {
    let mut args = std::env::args().skip(1).map(|a| a.parse::<usize>().expect("numeric argument"));
    let n_scenes = args.next().unwrap_or(10);
    let per_scene = args.next().unwrap_or(10);
    let base = Config::default();
    let mut tasks = Vec::new();
    let mut cache = SceneCache::default();
    for seed in 0..n_scenes as u64 {
        let size = if seed % 2 == 0 { SizeClass::Small } else { SizeClass::Large };
        let scene = generate_scene(seed, size);
        tasks.extend(generate_tasks(&scene, corpus_counts(per_scene), seed, &base));
        cache.insert(scene);
    }
    println!("threshold,episodes,sr,path_m,secs");
    for threshold in [70, 100, 150, 200] {
        let config = Config { frontier_threshold: threshold, ..base.clone() };
        let start = Instant::now();
        let results = run_suite(&tasks, &cache, &PlannerKind::Oracle, FrontierPolicy::Greedy, &config, 1);
        let n = results.len() as f64;
        let sr = results.iter().filter(|r| r.success).count() as f64 / n;
        let path = results.iter().map(|r| r.agent_path_m).sum::<f64>() / n;
        println!("{threshold},{},{sr:.4},{path:.3},{:.1}", results.len(), start.elapsed().as_secs_f64());
    }
}
