//! Runs one episode with the greedy controller and draws the agent's final map:
//! frontiers by letter, path as `o`, centroids as `+`.
//!
//! Usage: `cargo run --release --example map_render -- [scene-seed] [task-index] [out.png]`

use eif_core::config::Config;
use eif_core::controller::FrontierPolicy;
use eif_core::eval::{run_episode, run_seed_for, TraceRecord};
use eif_core::featmap::{extract_frontiers, FrontierParams};
use eif_core::planner::OraclePlanner;
use eif_core::scene::{generate_scene, SizeClass};
use eif_core::tasks::{generate_tasks, TaskCounts};
use eif_core::viz::{ascii, render_png, Layers};

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let seed: u64 = args.first().map_or(0, |a| a.parse().expect("numeric seed"));
    let index: usize = args.get(1).map_or(0, |a| a.parse().expect("numeric index"));
    let config = Config::default();
    let size = if seed % 2 == 0 { SizeClass::Small } else { SizeClass::Large };
    let scene = generate_scene(seed, size);
    let tasks = generate_tasks(&scene, TaskCounts { short: 4, long: 0, abstract_: 0 }, seed, &config);
    let task = &tasks[index.min(tasks.len() - 1)];
    let mut planner = OraclePlanner::new(task.gt_plan.clone());
    let out = run_episode(&scene, task, &mut planner, FrontierPolicy::Greedy, &config, run_seed_for(&config, task));

    let frontiers = extract_frontiers(&out.map, FrontierParams::from_config(&config));
    let path: Vec<_> = out
        .trace
        .iter()
        .filter_map(|r| match r {
            TraceRecord::Action { pose, .. } => Some(pose.cell),
            _ => None,
        })
        .collect();
    let layers = Layers { frontiers: &frontiers, path: &path, heat: true };
    println!("{}: {} (success {})", task.id, task.instruction, out.result.success);
    println!("{:.0}% of the map known, {} frontiers left", 100.0 * out.map.explored_fraction(), frontiers.len());
    print!("{}", ascii(&out.map, layers, 4));
    if let Some(png) = args.get(2) {
        render_png(&out.map, layers, 2).save(png).expect("write png");
        println!("wrote {png}");
    }
}
