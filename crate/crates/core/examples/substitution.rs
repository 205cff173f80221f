//! Instructions that name an absent object while a role-equivalent one is present,
//! run with and without substitution in the heuristic planner.
//!
//! Usage: `cargo run --release --example substitution -- [scenes]`

use eif_core::config::Config;
use eif_core::controller::FrontierPolicy;
use eif_core::eval::{run_suite, PlannerKind, SceneCache};
use eif_core::planner::SubstitutionTable;
use eif_core::scene::{generate_scene, SizeClass};
use eif_core::tasks::generate_substitution_tasks;

fn main() {
    let n_scenes: u64 = std::env::args().nth(1).map_or(12, |a| a.parse().expect("numeric argument"));
    let config = Config::default();
    let table = SubstitutionTable::builtin();
    let mut tasks = Vec::new();
    let mut cache = SceneCache::default();
    for seed in 0..n_scenes {
        let size = if seed % 2 == 0 { SizeClass::Small } else { SizeClass::Large };
        let scene = generate_scene(seed, size);
        tasks.extend(generate_substitution_tasks(&scene, table, &config));
        cache.insert(scene);
    }
    for t in &tasks {
        let s = t.substitution.as_ref().expect("substitution tasks carry the pair");
        println!("{} `{}`: {} -> {}", t.id, t.instruction, s.demanded, s.present);
    }
    for kind in [PlannerKind::Heuristic { substitution: true }, PlannerKind::Heuristic { substitution: false }] {
        let results = run_suite(&tasks, &cache, &kind, FrontierPolicy::Greedy, &config, 1);
        let ok = results.iter().filter(|r| r.success).count();
        println!("{kind}: {ok}/{} succeeded", results.len());
        if std::env::var("VERBOSE").is_ok() {
            for r in results.iter().filter(|r| !r.success) {
                println!("  {} {} {:?}", r.task_id, r.failure_class, r.sub_tag);
            }
        }
    }
}
