//! Generates a few scenes, instantiates task templates against them and prints the plans.

use eif_core::config::Config;
use eif_core::scene::{generate_scene, SizeClass};
use eif_core::tasks::{corpus_counts, generate_tasks, validate_feasibility};
use std::time::Instant;

fn main() {
    let config = Config::default();
    let counts = corpus_counts(12);
    let start = Instant::now();
    let mut total = 0;
    for seed in 0..4u64 {
        let size = if seed % 2 == 0 { SizeClass::Small } else { SizeClass::Large };
        let scene = generate_scene(seed, size);
        let tasks = generate_tasks(&scene, counts, 7, &config);
        for t in &tasks {
            assert!(validate_feasibility(t, &scene, &config));
            println!("[{}] {} ({} steps) goal {}", t.category, t.instruction, t.gt_plan.len(), t.goal);
        }
        total += tasks.len();
    }
    println!("{total} tasks in {:.2?}", start.elapsed());
}
