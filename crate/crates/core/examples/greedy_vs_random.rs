//! Compares greedy and random frontier selection on short tasks.
//!
//! Usage: `cargo run --release --example greedy_vs_random -- [scenes] [short-tasks-per-scene]`

use eif_core::config::Config;
use eif_core::controller::FrontierPolicy;
use eif_core::eval::{run_suite, PlannerKind, SceneCache};
use eif_core::scene::{generate_scene, SizeClass};
use eif_core::tasks::{generate_tasks, TaskCounts};

fn main() {
    let mut args = std::env::args().skip(1).map(|a| a.parse::<usize>().expect("numeric argument"));
    let n_scenes = args.next().unwrap_or(10);
    let per_scene = args.next().unwrap_or(5);
    let config = Config::default();
    let mut tasks = Vec::new();
    let mut cache = SceneCache::default();
    for seed in 0..n_scenes as u64 {
        let size = if seed % 2 == 0 { SizeClass::Small } else { SizeClass::Large };
        let scene = generate_scene(seed, size);
        let counts = TaskCounts { short: per_scene, long: 0, abstract_: 0 };
        tasks.extend(generate_tasks(&scene, counts, seed, &config));
        cache.insert(scene);
    }
    println!("policy,episodes,sr,path_m");
    for policy in [FrontierPolicy::Greedy, FrontierPolicy::Random] {
        let results = run_suite(&tasks, &cache, &PlannerKind::Oracle, policy, &config, 1);
        let n = results.len() as f64;
        let sr = results.iter().filter(|r| r.success).count() as f64 / n;
        let path = results.iter().map(|r| r.agent_path_m).sum::<f64>() / n;
        println!("{policy},{},{sr:.4},{path:.3}", results.len());
        if std::env::var("VERBOSE").is_ok() {
            for r in results.iter().filter(|r| !r.success) {
                eprintln!("  {} {} {:?} {:.1} m", r.task_id, r.failure_class, r.sub_tag, r.agent_path_m);
            }
        }
    }
}
