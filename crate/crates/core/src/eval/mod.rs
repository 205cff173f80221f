//! Episode runner, metrics, failure taxonomy and suite evaluation.

mod runner;
mod suite;
pub mod trace;

pub use runner::{rebuild_map, run_episode, EpisodeOutput};
pub use suite::{annotate_expert, run_suite, run_seed_for, PlannerKind, SceneCache};
pub use trace::{read_trace, replay, replay_frames, scene_hash, trace_to_string, write_trace, EndReason, LowLevel, Outcome, StepError, TraceRecord};

use crate::sim::InteractionError;
use crate::tasks::TaskCategory;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FailureClass {
    None,
    TargetNotFound,
    InteractionPrecondition,
    NavigationBlocked,
    PlanCapExceeded,
    ExplorationExhausted,
}

impl fmt::Display for FailureClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = serde_json::to_value(self).expect("unit variant");
        f.write_str(s.as_str().expect("string"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SubTag {
    TooClose,
    TooFar,
    NotVisible,
    Precondition,
    ClosedSpace,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeResult {
    pub task_id: String,
    pub category: TaskCategory,
    pub success: bool,
    pub goal_conditions_met: usize,
    pub goal_conditions_total: usize,
    pub agent_path_m: f64,
    pub expert_path_m: Option<f64>,
    pub hl_steps: usize,
    pub ll_actions: usize,
    pub expert_actions: Option<usize>,
    pub failure_class: FailureClass,
    pub sub_tag: Option<SubTag>,
    pub trace_path: Option<String>,
}

impl EpisodeResult {
    pub fn goal_fraction(&self) -> f64 {
        if self.goal_conditions_total == 0 {
            0.0
        } else {
            self.goal_conditions_met as f64 / self.goal_conditions_total as f64
        }
    }
}

/// Maps the way an unsuccessful episode ended onto the failure taxonomy.
pub fn classify_failure(trace: &[TraceRecord]) -> (FailureClass, Option<SubTag>) {
    let reason = trace.iter().rev().find_map(|r| match r {
        TraceRecord::End { reason, .. } => Some(*reason),
        _ => None,
    });
    let last_error = trace.iter().rev().find_map(|r| match r {
        TraceRecord::StepResult { error: Some(e), .. } => Some(e.clone()),
        _ => None,
    });
    match reason {
        Some(EndReason::PlanCap) | Some(EndReason::PlannerError) => (FailureClass::PlanCapExceeded, None),
        // the plan ran to its end but the goal does not hold
        Some(EndReason::Terminal) => (FailureClass::InteractionPrecondition, Some(SubTag::Precondition)),
        Some(EndReason::ActionBudget) | Some(EndReason::StepFailed) | None => match last_error {
            Some(StepError::Exhausted { closed_space, .. }) => {
                (FailureClass::ExplorationExhausted, closed_space.then_some(SubTag::ClosedSpace))
            }
            Some(StepError::NoApproach { .. }) => (FailureClass::NavigationBlocked, None),
            Some(StepError::Interaction { failure, .. }) => (
                FailureClass::InteractionPrecondition,
                Some(match failure {
                    InteractionError::OutOfRange { too_close: true, .. } => SubTag::TooClose,
                    InteractionError::OutOfRange { .. } => SubTag::TooFar,
                    InteractionError::NotVisible => SubTag::NotVisible,
                    InteractionError::Precondition(_) => SubTag::Precondition,
                }),
            ),
            Some(StepError::CommandCap { discovered, .. }) | Some(StepError::ActionBudget { discovered, .. }) => {
                if discovered {
                    (FailureClass::NavigationBlocked, None)
                } else {
                    (FailureClass::TargetNotFound, None)
                }
            }
            Some(StepError::NoTarget) => (FailureClass::PlanCapExceeded, None),
            None => (FailureClass::TargetNotFound, None),
        },
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct GroupMetrics {
    pub episodes: usize,
    pub sr: f64,
    pub plwsr: f64,
    pub gc: f64,
    pub plwgc: f64,
    /// Mean odometer in meters.
    pub path_m: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub overall: GroupMetrics,
    pub per_category: BTreeMap<TaskCategory, GroupMetrics>,
    pub failures: BTreeMap<FailureClass, usize>,
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("no expert length for task {0}")]
pub struct MissingExpertLength(pub String);

/// Path-length weight `L_expert / max(L_agent, L_expert)`.
pub fn path_weight(agent: usize, expert: usize) -> f64 {
    let denom = agent.max(expert);
    if denom == 0 {
        1.0
    } else {
        expert as f64 / denom as f64
    }
}

fn group(results: &[&EpisodeResult], expert: &BTreeMap<String, usize>) -> Result<GroupMetrics, MissingExpertLength> {
    let n = results.len();
    if n == 0 {
        return Ok(GroupMetrics::default());
    }
    let mut m = GroupMetrics { episodes: n, ..Default::default() };
    for r in results {
        let le = *expert.get(&r.task_id).ok_or_else(|| MissingExpertLength(r.task_id.clone()))?;
        let w = path_weight(r.ll_actions, le);
        let s = if r.success { 1.0 } else { 0.0 };
        let g = r.goal_fraction();
        m.sr += s;
        m.plwsr += s * w;
        m.gc += g;
        m.plwgc += g * w;
        m.path_m += r.agent_path_m;
    }
    let k = n as f64;
    m.sr /= k;
    m.plwsr /= k;
    m.gc /= k;
    m.plwgc /= k;
    m.path_m /= k;
    Ok(m)
}

/// Aggregates results; expert lengths are low-level action counts keyed by task id.
pub fn compute_metrics(results: &[EpisodeResult], expert: &BTreeMap<String, usize>) -> Result<SuiteReport, MissingExpertLength> {
    let all: Vec<&EpisodeResult> = results.iter().collect();
    let overall = group(&all, expert)?;
    let mut per_category = BTreeMap::new();
    for c in TaskCategory::ALL {
        let sub: Vec<&EpisodeResult> = results.iter().filter(|r| r.category == c).collect();
        if !sub.is_empty() {
            per_category.insert(c, group(&sub, expert)?);
        }
    }
    let mut failures = BTreeMap::new();
    for r in results.iter().filter(|r| !r.success) {
        *failures.entry(r.failure_class).or_insert(0) += 1;
    }
    Ok(SuiteReport { overall, per_category, failures })
}

/// Expert lengths recorded on the results themselves.
pub fn expert_lengths(results: &[EpisodeResult]) -> BTreeMap<String, usize> {
    results.iter().filter_map(|r| r.expert_actions.map(|e| (r.task_id.clone(), e))).collect()
}

impl SuiteReport {
    /// Header and rows: one per category plus the overall line.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("group,episodes,sr,plwsr,gc,plwgc,path_m\n");
        let row = |name: &str, m: &GroupMetrics| {
            format!("{name},{},{:.4},{:.4},{:.4},{:.4},{:.3}\n", m.episodes, m.sr, m.plwsr, m.gc, m.plwgc, m.path_m)
        };
        for (c, m) in &self.per_category {
            out += &row(c.as_str(), m);
        }
        out += &row("overall", &self.overall);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn result(id: &str, success: bool, met: usize, total: usize, ll: usize) -> EpisodeResult {
        EpisodeResult {
            task_id: id.into(),
            category: TaskCategory::TargetSpecificShort,
            success,
            goal_conditions_met: met,
            goal_conditions_total: total,
            agent_path_m: 1.0,
            expert_path_m: None,
            hl_steps: 1,
            ll_actions: ll,
            expert_actions: None,
            failure_class: if success { FailureClass::None } else { FailureClass::TargetNotFound },
            sub_tag: None,
            trace_path: None,
        }
    }

    #[test]
    fn plw_formula() {
        assert_eq!(path_weight(200, 100), 0.5);
        assert_eq!(path_weight(80, 100), 1.0);
        let rs = vec![result("a", true, 1, 1, 200), result("b", false, 2, 4, 50)];
        let ex: BTreeMap<String, usize> = [("a".to_string(), 100), ("b".to_string(), 100)].into();
        let m = compute_metrics(&rs, &ex).unwrap();
        assert_eq!(m.overall.sr, 0.5);
        assert_eq!(m.overall.plwsr, 0.25);
        assert_eq!(m.overall.gc, 0.75);
        assert_eq!(m.failures.get(&FailureClass::TargetNotFound), Some(&1));
    }

    #[test]
    fn missing_expert_is_an_error() {
        let rs = vec![result("a", true, 1, 1, 10)];
        assert_eq!(compute_metrics(&rs, &BTreeMap::new()), Err(MissingExpertLength("a".into())));
    }

    #[test]
    fn failure_mapping() {
        let end = |reason| TraceRecord::End {
            reason,
            success: false,
            goal_met: 0,
            goal_total: 1,
            hl_steps: 30,
            ll_actions: 0,
            odometer: 0.0,
            scene_hash: String::new(),
        };
        let fail = |e| TraceRecord::StepResult { hl: 1, step: 1, ok: false, error: Some(e) };
        let lettuce = crate::scene::Category::named("Lettuce");
        assert_eq!(classify_failure(&[end(EndReason::PlanCap)]), (FailureClass::PlanCapExceeded, None));
        let t = [fail(StepError::Exhausted { target: lettuce, closed_space: true }), end(EndReason::StepFailed)];
        assert_eq!(classify_failure(&t), (FailureClass::ExplorationExhausted, Some(SubTag::ClosedSpace)));
        let close = InteractionError::OutOfRange { distance: 0.2, too_close: true };
        let t = [fail(StepError::Interaction { target: lettuce, failure: close }), end(EndReason::StepFailed)];
        assert_eq!(classify_failure(&t), (FailureClass::InteractionPrecondition, Some(SubTag::TooClose)));
    }
}
