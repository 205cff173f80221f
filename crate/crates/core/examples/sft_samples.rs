//! Cuts planner (HP) and controller (LC) finetuning samples from oracle episodes
//! and prints the first of each as JSON.
//!
//! Usage: `cargo run --release --example sft_samples -- [scene-seed] [out.jsonl]`

use eif_core::config::Config;
use eif_core::controller::FrontierPolicy;
use eif_core::eval::{run_episode, run_seed_for};
use eif_core::planner::OraclePlanner;
use eif_core::scene::{generate_scene, SizeClass};
use eif_core::tasks::{emit_sft_samples, generate_tasks, write_sft, SftRecord, TaskCounts};

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let seed: u64 = args.first().map_or(2, |a| a.parse().expect("numeric seed"));
    let config = Config::default();
    let size = if seed % 2 == 0 { SizeClass::Small } else { SizeClass::Large };
    let scene = generate_scene(seed, size);
    let tasks = generate_tasks(&scene, TaskCounts { short: 3, long: 1, abstract_: 1 }, seed, &config);
    let mut records = Vec::new();
    for task in &tasks {
        let mut planner = OraclePlanner::new(task.gt_plan.clone());
        let out = run_episode(&scene, task, &mut planner, FrontierPolicy::Oracle, &config, run_seed_for(&config, task));
        records.extend(emit_sft_samples(&out.trace, task));
    }
    let hp = records.iter().filter(|r| matches!(r, SftRecord::Hp(_))).count();
    println!("{} tasks -> {hp} HP and {} LC records", tasks.len(), records.len() - hp);
    for kind in ["hp", "lc"] {
        if let Some(r) = records.iter().find(|r| matches!((r, kind), (SftRecord::Hp(_), "hp") | (SftRecord::Lc(_), "lc"))) {
            println!("{}", serde_json::to_string_pretty(r).expect("serializable"));
        }
    }
    if let Some(path) = args.get(1) {
        let file = std::fs::File::create(path).expect("create output");
        write_sft(std::io::BufWriter::new(file), &records).expect("write samples");
        println!("wrote {path}");
    }
}
