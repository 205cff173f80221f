//! Parallel evaluation over a task corpus.

use super::runner::run_episode;
use super::EpisodeResult;
use crate::config::Config;
use crate::controller::FrontierPolicy;
use crate::planner::{ExternalPlanner, HeuristicPlanner, OraclePlanner, Planner, PlannerError};
use crate::scene::{generate_scene, Scene, SizeClass};
use crate::tasks::TaskSpec;
use rayon::prelude::*;
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PlannerKind {
    Oracle,
    Heuristic { substitution: bool },
    External(String),
}

impl PlannerKind {
    pub fn build(&self, task: &TaskSpec, config: &Config) -> Result<Box<dyn Planner>, PlannerError> {
        Ok(match self {
            PlannerKind::Oracle => Box::new(OraclePlanner::new(task.gt_plan.clone())),
            PlannerKind::Heuristic { substitution } => Box::new(HeuristicPlanner::new(*substitution)),
            PlannerKind::External(cmd) => Box::new(ExternalPlanner::spawn(cmd, config.adapter_timeout_secs)?),
        })
    }
}

impl fmt::Display for PlannerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PlannerKind::Oracle => f.write_str("oracle"),
            PlannerKind::Heuristic { substitution: true } => f.write_str("heuristic"),
            PlannerKind::Heuristic { substitution: false } => f.write_str("heuristic-nosub"),
            PlannerKind::External(cmd) => write!(f, "external:{cmd}"),
        }
    }
}

impl FromStr for PlannerKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "oracle" => Ok(PlannerKind::Oracle),
            "heuristic" => Ok(PlannerKind::Heuristic { substitution: true }),
            "heuristic-nosub" => Ok(PlannerKind::Heuristic { substitution: false }),
            _ => match s.strip_prefix("external:") {
                Some(cmd) if !cmd.is_empty() => Ok(PlannerKind::External(cmd.to_string())),
                _ => Err(format!("unknown planner `{s}` (expected oracle, heuristic, heuristic-nosub or external:CMD)")),
            },
        }
    }
}

/// Scenes regenerated from their seeds, shared by every episode.
#[derive(Debug, Default)]
pub struct SceneCache {
    scenes: BTreeMap<(u64, SizeClass), Scene>,
}

impl SceneCache {
    pub fn for_tasks(tasks: &[TaskSpec]) -> Self {
        let mut keys: Vec<(u64, SizeClass)> = tasks.iter().map(|t| (t.scene_seed, t.scene_size)).collect();
        keys.sort_by_key(|k| (k.0, k.1 == SizeClass::Large));
        keys.dedup();
        let scenes = keys.into_par_iter().map(|k| (k, generate_scene(k.0, k.1))).collect();
        SceneCache { scenes }
    }

    pub fn insert(&mut self, scene: Scene) {
        self.scenes.insert((scene.seed, scene.size_class), scene);
    }

    pub fn get(&self, task: &TaskSpec) -> &Scene {
        self.scenes.get(&(task.scene_seed, task.scene_size)).expect("scene cached for every task")
    }
}

/// Run seed of a task: the configured seed mixed with a hash of the task id.
pub fn run_seed_for(config: &Config, task: &TaskSpec) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in task.id.bytes() {
        h = (h ^ b as u64).wrapping_mul(0x100_0000_01b3);
    }
    config.seed ^ h
}

fn run_one(task: &TaskSpec, scenes: &SceneCache, planner: &PlannerKind, policy: FrontierPolicy, config: &Config) -> EpisodeResult {
    let scene = scenes.get(task);
    match planner.build(task, config) {
        Ok(mut p) => run_episode(scene, task, p.as_mut(), policy, config, run_seed_for(config, task)).result,
        Err(_) => EpisodeResult {
            task_id: task.id.clone(),
            category: task.category,
            success: false,
            goal_conditions_met: 0,
            goal_conditions_total: task.goal.len(),
            agent_path_m: 0.0,
            expert_path_m: task.expert_path_m,
            hl_steps: 0,
            ll_actions: 0,
            expert_actions: task.expert_actions,
            failure_class: super::FailureClass::PlanCapExceeded,
            sub_tag: None,
            trace_path: None,
        },
    }
}

/// Runs every task on `workers` threads; results come back ordered by task id.
pub fn run_suite(
    tasks: &[TaskSpec],
    scenes: &SceneCache,
    planner: &PlannerKind,
    policy: FrontierPolicy,
    config: &Config,
    workers: usize,
) -> Vec<EpisodeResult> {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(workers.max(1)).build().expect("thread pool");
    let mut out: Vec<EpisodeResult> =
        pool.install(|| tasks.par_iter().map(|t| run_one(t, scenes, planner, policy, config)).collect());
    out.sort_by(|a, b| a.task_id.cmp(&b.task_id));
    out
}

/// Fills expert lengths from oracle episodes; tasks the oracle fails keep `None`.
pub fn annotate_expert(tasks: &mut [TaskSpec], scenes: &SceneCache, config: &Config, workers: usize) {
    let results = run_suite(tasks, scenes, &PlannerKind::Oracle, FrontierPolicy::Oracle, config, workers);
    let by_id: BTreeMap<&str, &EpisodeResult> = results.iter().map(|r| (r.task_id.as_str(), r)).collect();
    for t in tasks.iter_mut() {
        if let Some(r) = by_id.get(t.id.as_str()).filter(|r| r.success) {
            t.expert_actions = Some(r.ll_actions);
            t.expert_path_m = Some(r.agent_path_m);
        }
    }
}
