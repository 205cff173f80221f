//! Task corpus: templated instructions with goal conditions, ground-truth plans,
//! feasibility checks and supervised-finetuning samples.

mod generate;
mod recipe;
mod sft;
mod templates;
mod validate;

pub use generate::{
    build_plan, corpus_counts, generate_substitution_tasks, generate_tasks, is_near_duplicate, normalize_text, TaskCounts,
    SIMILARITY_THRESHOLD,
};
pub use recipe::{expand, Knowledge, RecipeState, StepDraft};
pub use sft::{emit_sft_samples, write_sft, HpRecord, LcRecord, SftRecord};
pub use templates::{category_by_phrase, mentions_category, AbstractTemplate, Intent, ShortTemplate, TemplateSet};
pub use validate::{Reachability, SymbolicRun};

use crate::config::Config;
use crate::planner::PlanStep;
use crate::scene::{Category, GoalCondition, Scene, SizeClass};
use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

/// Step count separating short from long target-specific tasks.
pub const LONG_TASK_STEPS: usize = 15;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskCategory {
    TargetSpecificShort,
    TargetSpecificLong,
    Abstract,
}

impl TaskCategory {
    pub const ALL: [TaskCategory; 3] = [TaskCategory::TargetSpecificShort, TaskCategory::TargetSpecificLong, TaskCategory::Abstract];

    pub fn as_str(self) -> &'static str {
        match self {
            TaskCategory::TargetSpecificShort => "target_specific_short",
            TaskCategory::TargetSpecificLong => "target_specific_long",
            TaskCategory::Abstract => "abstract",
        }
    }
}

impl fmt::Display for TaskCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Demanded category missing from the scene and the equivalent the goal uses instead.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Substitution {
    pub demanded: Category,
    pub present: Category,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskSpec {
    pub id: String,
    pub instruction: String,
    pub category: TaskCategory,
    pub goal: GoalCondition,
    pub gt_plan: Vec<PlanStep>,
    pub scene_seed: u64,
    pub scene_size: SizeClass,
    /// Low-level actions of the oracle episode, filled in at corpus build.
    #[serde(default)]
    pub expert_actions: Option<usize>,
    #[serde(default)]
    pub expert_path_m: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub substitution: Option<Substitution>,
}

#[derive(Debug, Error)]
pub enum TaskError {
    #[error("scene lacks the roles required by `{0}`")]
    TemplateUnsatisfiable(String),
    #[error("task file: {0}")]
    Json(#[from] serde_json::Error),
    #[error("task file: {0}")]
    Io(#[from] std::io::Error),
}

/// Replays the plan on a scratch copy of the scene; true iff every step is legal
/// and the goal holds at the end.
pub fn validate_feasibility(task: &TaskSpec, scene: &Scene, config: &Config) -> bool {
    validation_error(task, scene, config).is_none()
}

/// First reason the task is infeasible, if any.
pub fn validation_error(task: &TaskSpec, scene: &Scene, config: &Config) -> Option<String> {
    if task.goal.is_empty() {
        return Some("empty goal".into());
    }
    if let Some(c) = task.goal.categories().into_iter().find(|&c| !scene.has_category(c)) {
        return Some(format!("goal mentions {c}, absent from the scene"));
    }
    if task.category == TaskCategory::Abstract {
        if let Some(c) = mentions_category(&task.instruction) {
            return Some(format!("abstract instruction names {c}"));
        }
    }
    let long = task.gt_plan.len() >= LONG_TASK_STEPS;
    if (task.category == TaskCategory::TargetSpecificLong) != long && task.category != TaskCategory::Abstract {
        return Some("category does not match plan length".into());
    }
    let mut reach = Reachability::new(scene, config);
    let mut run = SymbolicRun::new(scene, Some(&mut reach));
    for (i, s) in task.gt_plan.iter().enumerate() {
        if s.terminal || s.index != i + 1 {
            return Some(format!("bad step index at {}", i + 1));
        }
        if let Err(e) = run.step(&StepDraft::from_step(s)) {
            return Some(format!("step {}: {e}", s.index));
        }
    }
    (!run.satisfied(&task.goal)).then(|| "goal not satisfied after the plan".into())
}

pub fn read_tasks(path: &std::path::Path) -> Result<Vec<TaskSpec>, TaskError> {
    Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
}

pub fn write_tasks(path: &std::path::Path, tasks: &[TaskSpec]) -> Result<(), TaskError> {
    std::fs::write(path, serde_json::to_string_pretty(tasks)? + "\n")?;
    Ok(())
}
