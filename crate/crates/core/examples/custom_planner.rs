//! Plugging in a planner of your own: this one logs what it is shown at every call
//! and delegates the decision to the ground-truth plan.
//!
//! Usage: `cargo run --release --example custom_planner -- [scene-seed] [task-index]`

use eif_core::config::Config;
use eif_core::controller::FrontierPolicy;
use eif_core::eval::{run_episode, run_seed_for};
use eif_core::planner::{MapSummary, OraclePlanner, PlanStep, Planner, PlannerError};
use eif_core::scene::{generate_scene, SizeClass};
use eif_core::tasks::{generate_tasks, TaskCounts};

struct Narrator {
    inner: OraclePlanner,
}

impl Planner for Narrator {
    fn next_step(&mut self, instruction: &str, done: &[PlanStep], summary: &MapSummary) -> Result<PlanStep, PlannerError> {
        let seen: Vec<String> = summary.discovered.iter().map(|o| o.category.to_string()).collect();
        println!(
            "call {}: {:.0}% explored, {} frontiers, {} objects known ({})",
            done.len() + 1,
            100.0 * summary.explored_fraction,
            summary.frontier_count,
            seen.len(),
            seen.join(", ")
        );
        let step = self.inner.next_step(instruction, done, summary)?;
        println!("  -> {}", step.text);
        Ok(step)
    }

    fn name(&self) -> String {
        "narrator".into()
    }
}

fn main() {
    let mut args = std::env::args().skip(1).map(|a| a.parse::<u64>().expect("numeric argument"));
    let seed = args.next().unwrap_or(1);
    let index = args.next().unwrap_or(0) as usize;
    let config = Config::default();
    let size = if seed % 2 == 0 { SizeClass::Small } else { SizeClass::Large };
    let scene = generate_scene(seed, size);
    let tasks = generate_tasks(&scene, TaskCounts { short: 2, long: 2, abstract_: 0 }, seed, &config);
    let task = &tasks[index.min(tasks.len() - 1)];
    println!("{}: {}", task.id, task.instruction);
    let mut planner = Narrator { inner: OraclePlanner::new(task.gt_plan.clone()) };
    let out = run_episode(&scene, task, &mut planner, FrontierPolicy::Greedy, &config, run_seed_for(&config, task));
    let r = &out.result;
    println!("success {} after {} actions, {:.1} m", r.success, r.ll_actions, r.agent_path_m);
}
