//! Step-by-step finetuning samples cut from successful oracle episodes.

use super::TaskSpec;
use crate::controller::{ActionCommand, NavGoal};
use crate::eval::trace::{FrontierRef, TraceRecord};
use crate::planner::MapSummary;
use serde::{Deserialize, Serialize};
use std::io::Write;

/// High-level planner sample: context up to a decision point and the remaining plan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HpRecord {
    pub task_id: String,
    pub instruction: String,
    pub completed_steps: Vec<String>,
    pub summary: MapSummary,
    pub next_step: String,
    pub subsequent_steps: Vec<String>,
}

/// Low-level controller sample: one decide call and the command the oracle chose.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LcRecord {
    pub task_id: String,
    pub step: String,
    pub frontiers: Vec<FrontierRef>,
    pub command: ActionCommand,
    /// Index into `frontiers` when the command heads for a frontier.
    pub frontier_label: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SftRecord {
    Hp(HpRecord),
    Lc(LcRecord),
}

/// One HP record per planner call and one LC record per decide call.
/// Traces of failed episodes yield nothing.
pub fn emit_sft_samples(trace: &[TraceRecord], task: &TaskSpec) -> Vec<SftRecord> {
    let succeeded = trace.iter().any(|r| matches!(r, TraceRecord::End { success: true, .. }));
    if !succeeded {
        return Vec::new();
    }

    // plan steps in order, paired with whether they completed
    let mut steps: Vec<(usize, String, &MapSummary, bool)> = Vec::new();
    for r in trace {
        match r {
            TraceRecord::Plan { hl, step, summary } => steps.push((*hl, step.text.clone(), summary, step.terminal)),
            TraceRecord::StepResult { hl, ok, .. } => {
                if let Some(s) = steps.iter_mut().rev().find(|s| s.0 == *hl) {
                    s.3 = *ok;
                }
            }
            _ => {}
        }
    }

    let mut out = Vec::new();
    for (k, (_, text, summary, _)) in steps.iter().enumerate() {
        out.push(SftRecord::Hp(HpRecord {
            task_id: task.id.clone(),
            instruction: task.instruction.clone(),
            completed_steps: steps[..k].iter().filter(|s| s.3).map(|s| s.1.clone()).collect(),
            summary: (*summary).clone(),
            next_step: text.clone(),
            subsequent_steps: steps[k + 1..].iter().filter(|s| s.3).map(|s| s.1.clone()).collect(),
        }));
    }

    let text_of = |hl: usize| steps.iter().find(|s| s.0 == hl).map(|s| s.1.clone()).unwrap_or_default();
    for r in trace {
        if let TraceRecord::Decide { hl, command, goal, frontiers, .. } = r {
            let frontier_label = match goal {
                Some(NavGoal::Frontier { id, .. }) => frontiers.iter().position(|f| f.id == *id),
                _ => None,
            };
            out.push(SftRecord::Lc(LcRecord {
                task_id: task.id.clone(),
                step: text_of(*hl),
                frontiers: frontiers.clone(),
                command: command.clone(),
                frontier_label,
            }));
        }
    }
    out
}

pub fn write_sft(mut w: impl Write, records: &[SftRecord]) -> std::io::Result<()> {
    for r in records {
        serde_json::to_writer(&mut w, r)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Config;
    use crate::controller::FrontierPolicy;
    use crate::eval::{run_episode, run_seed_for};
    use crate::planner::OraclePlanner;
    use crate::scene::{generate_scene, SizeClass};
    use crate::tasks::{generate_tasks, TaskCounts};

    #[test]
    fn one_record_per_decision_point() {
        let config = Config::default();
        let scene = generate_scene(4, SizeClass::Small);
        let tasks = generate_tasks(&scene, TaskCounts { short: 2, long: 0, abstract_: 0 }, 4, &config);
        for task in &tasks {
            let mut planner = OraclePlanner::new(task.gt_plan.clone());
            let out = run_episode(&scene, task, &mut planner, FrontierPolicy::Oracle, &config, run_seed_for(&config, task));
            assert!(out.result.success);
            let recs = emit_sft_samples(&out.trace, task);
            let plans = out.trace.iter().filter(|r| matches!(r, TraceRecord::Plan { .. })).count();
            let decides = out.trace.iter().filter(|r| matches!(r, TraceRecord::Decide { .. })).count();
            let hp: Vec<&HpRecord> = recs.iter().filter_map(|r| if let SftRecord::Hp(h) = r { Some(h) } else { None }).collect();
            assert_eq!(hp.len(), plans);
            assert_eq!(recs.len() - hp.len(), decides);
            assert_eq!(hp.len(), task.gt_plan.len() + 1);
            for (i, h) in hp.iter().enumerate() {
                assert_eq!(h.completed_steps.len(), i);
                assert_eq!(h.completed_steps.len() + 1 + h.subsequent_steps.len(), hp.len());
            }
            assert!(hp.last().unwrap().next_step.ends_with("Done"));
        }
    }
}
