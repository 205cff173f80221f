//! High-level planners: produce the next natural-language step from the instruction,
//! the steps completed so far and a digest of the map.

mod external;
mod heuristic;

pub use external::{AdapterRequest, ExternalPlanner, REQUEST_VERSION};
pub use heuristic::{HeuristicPlanner, SubstitutionTable};

use crate::geom::Cell;
use crate::scene::{ActionPrimitive, Category};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Hard cap on planner calls per episode.
pub const MAX_PLAN_STEPS: usize = 30;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlanStep {
    pub index: usize,
    pub text: String,
    #[serde(default)]
    pub primitive_hint: Option<ActionPrimitive>,
    #[serde(default)]
    pub demanded_objects: Vec<Category>,
    #[serde(default)]
    pub terminal: bool,
}

impl PlanStep {
    pub fn new(index: usize, body: &str, primitive_hint: Option<ActionPrimitive>, demanded_objects: Vec<Category>) -> Self {
        PlanStep { index, text: format!("Step {index}. {body}"), primitive_hint, demanded_objects, terminal: false }
    }

    pub fn terminal(index: usize) -> Self {
        PlanStep { index, text: format!("Step {index}. Done"), primitive_hint: None, demanded_objects: Vec::new(), terminal: true }
    }

    /// Text without the "Step i." prefix.
    pub fn body(&self) -> &str {
        match self.text.split_once(". ") {
            Some((head, rest)) if head.starts_with("Step ") => rest,
            _ => &self.text,
        }
    }

    /// The object the step acts on or looks for.
    pub fn target(&self) -> Option<Category> {
        self.demanded_objects.first().copied()
    }

    /// Same step under a new index.
    pub fn renumbered(&self, index: usize) -> Self {
        PlanStep { index, text: format!("Step {index}. {}", self.body()), ..self.clone() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryObject {
    pub category: Category,
    pub instance: u32,
    pub cell: Cell,
    /// Observed open state for openable objects.
    pub open: Option<bool>,
    /// Observed power state for toggleable objects.
    pub on: Option<bool>,
}

/// Textual digest of the map for planners that do not read feature grids.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MapSummary {
    pub discovered: Vec<SummaryObject>,
    pub explored_fraction: f64,
    pub frontier_count: usize,
    #[serde(default)]
    pub frontiers: Vec<Cell>,
}

impl MapSummary {
    pub fn has(&self, c: Category) -> bool {
        self.discovered.iter().any(|o| o.category == c)
    }

    pub fn first(&self, c: Category) -> Option<&SummaryObject> {
        self.discovered.iter().find(|o| o.category == c)
    }
}

#[derive(Debug, Error)]
pub enum PlannerError {
    #[error("planner exceeded {MAX_PLAN_STEPS} steps")]
    PlannerExhausted,
    #[error("instruction not understood: {0}")]
    Unparsed(String),
    #[error("adapter did not answer within {0:.1} s")]
    AdapterTimeout(f64),
    #[error("adapter protocol error: {0}")]
    AdapterProtocolError(String),
    #[error("adapter i/o: {0}")]
    AdapterIo(#[from] std::io::Error),
}

pub trait Planner {
    fn next_step(&mut self, instruction: &str, done: &[PlanStep], summary: &MapSummary) -> Result<PlanStep, PlannerError>;

    fn name(&self) -> String;
}

/// Replays a fixed plan, then ends.
#[derive(Debug, Clone)]
pub struct OraclePlanner {
    plan: Vec<PlanStep>,
}

impl OraclePlanner {
    pub fn new(plan: Vec<PlanStep>) -> Self {
        OraclePlanner { plan: plan.into_iter().filter(|s| !s.terminal).collect() }
    }
}

impl Planner for OraclePlanner {
    fn next_step(&mut self, _instruction: &str, done: &[PlanStep], _summary: &MapSummary) -> Result<PlanStep, PlannerError> {
        if let Some(t) = done.iter().find(|s| s.terminal) {
            return Ok(t.clone());
        }
        Ok(match self.plan.get(done.len()) {
            Some(s) => s.clone(),
            None => PlanStep::terminal(done.len() + 1),
        })
    }

    fn name(&self) -> String {
        "oracle".into()
    }
}

/// Emits the same step forever; used to exercise the plan-length cap.
#[derive(Debug, Clone)]
pub struct LoopPlanner(pub PlanStep);

impl Planner for LoopPlanner {
    fn next_step(&mut self, _instruction: &str, done: &[PlanStep], _summary: &MapSummary) -> Result<PlanStep, PlannerError> {
        Ok(self.0.renumbered(done.len() + 1))
    }

    fn name(&self) -> String {
        "loop".into()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn oracle_replays_then_ends_idempotently() {
        let knife = Category::named("Knife");
        let plan = vec![
            PlanStep::new(1, "Find the knife", None, vec![knife]),
            PlanStep::new(2, "Pick up the knife", Some(ActionPrimitive::PickUp), vec![knife]),
        ];
        let mut p = OraclePlanner::new(plan.clone());
        let s = MapSummary::default();
        let mut done = Vec::new();
        for expect in &plan {
            let step = p.next_step("x", &done, &s).unwrap();
            assert_eq!(&step, expect);
            done.push(step);
        }
        let end = p.next_step("x", &done, &s).unwrap();
        assert!(end.terminal && end.demanded_objects.is_empty() && end.index == 3);
        done.push(end.clone());
        assert_eq!(p.next_step("x", &done, &s).unwrap(), end);
    }

    #[test]
    fn body_strips_prefix() {
        let s = PlanStep::new(12, "Slice the tomato", Some(ActionPrimitive::Slice), vec![Category::named("Tomato")]);
        assert_eq!(s.text, "Step 12. Slice the tomato");
        assert_eq!(s.body(), "Slice the tomato");
        assert_eq!(s.renumbered(3).text, "Step 3. Slice the tomato");
    }
}
