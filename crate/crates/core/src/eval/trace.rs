//! Episode traces: one JSON record per line, replayable against the scene.

use crate::config::Config;
use crate::controller::{ActionCommand, NavGoal};
use crate::geom::{Cell, Pose};
use crate::planner::{MapSummary, PlanStep};
use crate::scene::{ActionPrimitive, Category, ObjectId, Scene, SizeClass};
use crate::sim::{InteractionError, MotionCommand, Simulator};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::io::{BufRead, Write};
use thiserror::Error;

/// A low-level action as executed by the simulator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LowLevel {
    Motion(MotionCommand),
    Interact(ActionPrimitive),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Ok,
    Blocked,
    Failed(InteractionError),
}

/// Frontier as offered to the controller, for logging and finetuning samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrontierRef {
    pub id: usize,
    pub centroid: Cell,
    pub area: usize,
    pub token_cells: Vec<Cell>,
}

/// Why a step was abandoned.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "error", rename_all = "snake_case")]
pub enum StepError {
    /// No frontier left and the target never seen; `closed_space` when it sits in a closed container.
    Exhausted { target: Category, closed_space: bool },
    NoApproach { target: Category },
    Interaction { target: Category, failure: InteractionError },
    CommandCap { target: Category, discovered: bool },
    ActionBudget { target: Category, discovered: bool },
    NoTarget,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EndReason {
    Terminal,
    PlanCap,
    StepFailed,
    PlannerError,
    ActionBudget,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TraceRecord {
    Header {
        task_id: String,
        instruction: String,
        scene_seed: u64,
        scene_size: SizeClass,
        planner: String,
        controller: String,
        run_seed: u64,
        start: Pose,
        config: Config,
        /// Relevance score of the first frame, fused before any action.
        initial_w_raw: f64,
    },
    Plan {
        hl: usize,
        step: PlanStep,
        summary: MapSummary,
    },
    Decide {
        hl: usize,
        step: usize,
        command: ActionCommand,
        goal: Option<NavGoal>,
        frontiers: Vec<FrontierRef>,
    },
    Action {
        t: usize,
        cmd: LowLevel,
        target: Option<u32>,
        pose: Pose,
        outcome: Outcome,
        odometer: f64,
        w_raw: Option<f64>,
        w: Option<f64>,
    },
    StepResult {
        hl: usize,
        step: usize,
        ok: bool,
        error: Option<StepError>,
    },
    PlannerFailure {
        hl: usize,
        message: String,
    },
    End {
        reason: EndReason,
        success: bool,
        goal_met: usize,
        goal_total: usize,
        hl_steps: usize,
        ll_actions: usize,
        odometer: f64,
        scene_hash: String,
    },
}

/// SHA-256 of the canonical scene JSON.
pub fn scene_hash(scene: &Scene) -> String {
    let digest = Sha256::digest(scene.to_json().as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

pub fn write_trace(mut w: impl Write, records: &[TraceRecord]) -> std::io::Result<()> {
    for r in records {
        serde_json::to_writer(&mut w, r)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

pub fn trace_to_string(records: &[TraceRecord]) -> String {
    let mut buf = Vec::new();
    write_trace(&mut buf, records).expect("writing to memory");
    String::from_utf8(buf).expect("json is utf-8")
}

#[derive(Debug, Error)]
pub enum TraceError {
    #[error("trace line {line}: {source}")]
    Json { line: usize, source: serde_json::Error },
    #[error("trace: {0}")]
    Io(#[from] std::io::Error),
    #[error("trace has no header")]
    NoHeader,
    #[error("replay diverged at t={t}: {what}")]
    Diverged { t: usize, what: String },
}

pub fn read_trace(r: impl BufRead) -> Result<Vec<TraceRecord>, TraceError> {
    let mut out = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|source| TraceError::Json { line: i + 1, source })?);
    }
    Ok(out)
}

/// Re-executes the action log on `scene` and returns the final world state.
pub fn replay(scene: &Scene, records: &[TraceRecord]) -> Result<Scene, TraceError> {
    replay_frames(scene, records, |_, _| {})
}

/// Like [`replay`], calling `visit` on the start state (with `None`) and after every action.
pub fn replay_frames(
    scene: &Scene,
    records: &[TraceRecord],
    mut visit: impl FnMut(&Simulator, Option<&TraceRecord>),
) -> Result<Scene, TraceError> {
    let (start, config) = records
        .iter()
        .find_map(|r| match r {
            TraceRecord::Header { start, config, .. } => Some((*start, config.clone())),
            _ => None,
        })
        .ok_or(TraceError::NoHeader)?;
    let mut sim = Simulator::with_pose(scene.clone(), start, &config);
    visit(&sim, None);
    for r in records {
        let TraceRecord::Action { t, cmd, target, pose, outcome, .. } = r else { continue };
        let got = match *cmd {
            LowLevel::Motion(m) => {
                if sim.step_motion(m) {
                    Outcome::Blocked
                } else {
                    Outcome::Ok
                }
            }
            LowLevel::Interact(p) => {
                let id = target.ok_or(TraceError::Diverged { t: *t, what: "interaction without target".into() })?;
                match sim.interact(p, ObjectId(id)) {
                    Ok(()) => Outcome::Ok,
                    Err(e) => Outcome::Failed(e),
                }
            }
        };
        if &got != outcome || sim.state().pose != *pose {
            return Err(TraceError::Diverged { t: *t, what: format!("expected {outcome:?} at {pose:?}, got {got:?}") });
        }
        visit(&sim, Some(r));
    }
    Ok(sim.scene().clone())
}
