//! Runs one oracle episode and prints its planner steps, step outcomes and summary.
//!
//! Usage: `cargo run --release --example episode_trace -- [scene-seed] [task-index] [tasks-per-scene]`

use eif_core::config::Config;
use eif_core::controller::FrontierPolicy;
use eif_core::eval::{run_episode, run_seed_for, TraceRecord};
use eif_core::planner::OraclePlanner;
use eif_core::scene::{generate_scene, SizeClass};
use eif_core::tasks::{corpus_counts, generate_tasks};

fn main() {
    let mut args = std::env::args().skip(1).map(|a| a.parse::<u64>().expect("numeric argument"));
    let seed = args.next().unwrap_or(0);
    let index = args.next().unwrap_or(0) as usize;
    let per_scene = args.next().unwrap_or(10) as usize;
    let verbose = std::env::var("VERBOSE").is_ok();
    let config = Config::default();
    let size = if seed % 2 == 0 { SizeClass::Small } else { SizeClass::Large };
    let scene = generate_scene(seed, size);
    let tasks = generate_tasks(&scene, corpus_counts(per_scene), seed, &config);
    let task = &tasks[index];
    println!("{}: {}", task.id, task.instruction);
    let mut planner = OraclePlanner::new(task.gt_plan.clone());
    let out = run_episode(&scene, task, &mut planner, FrontierPolicy::Oracle, &config, run_seed_for(&config, task));
    for r in &out.trace {
        match r {
            TraceRecord::Header { start, .. } => println!("start {start:?}"),
            TraceRecord::Plan { hl, step, .. } => println!("[{hl}] {}", step.text),
            TraceRecord::StepResult { ok, error, .. } => println!("    -> ok={ok} {error:?}"),
            TraceRecord::Decide { command, goal, .. } if verbose => println!("    decide {command:?} {goal:?}"),
            TraceRecord::Action { t, cmd, pose, outcome, .. } if verbose => println!("      {t} {cmd:?} {pose:?} {outcome:?}"),
            TraceRecord::End { .. } => println!("{r:?}"),
            _ => {}
        }
    }
    println!("{:?}", out.result);
}
