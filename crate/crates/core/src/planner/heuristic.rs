//! Rule-based planner: parses the instruction with the task templates and expands
//! it step by step against what the map has revealed so far.

use super::{MapSummary, PlanStep, Planner, PlannerError, MAX_PLAN_STEPS};
use crate::scene::{ActionPrimitive, Category, ObjectState};
use crate::tasks::{expand, Intent, Knowledge, RecipeState, StepDraft, TemplateSet};
use serde::{Deserialize, Serialize};
use std::collections::VecDeque;
use std::sync::OnceLock;

/// Role-equivalence classes used when a demanded category cannot be found.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubstitutionTable {
    pub classes: Vec<Vec<Category>>,
}

impl SubstitutionTable {
    pub fn builtin() -> &'static SubstitutionTable {
        static T: OnceLock<SubstitutionTable> = OnceLock::new();
        T.get_or_init(|| serde_json::from_str(include_str!("../../data/substitutions.json")).expect("bundled table parses"))
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    /// Other members of `c`'s class, in table order.
    pub fn equivalents(&self, c: Category) -> Vec<Category> {
        self.classes.iter().filter(|k| k.contains(&c)).flatten().copied().filter(|&x| x != c).collect()
    }
}

/// Exploration is considered finished at this explored fraction even if frontiers remain.
pub const EXPLORED_ENOUGH: f64 = 0.9;

pub struct HeuristicPlanner {
    templates: &'static TemplateSet,
    table: Option<SubstitutionTable>,
    intents: Option<VecDeque<Intent>>,
    queue: VecDeque<StepDraft>,
    state: RecipeState,
    acked: usize,
}

struct Seen<'a>(&'a MapSummary);

impl Knowledge for Seen<'_> {
    fn hidden_in(&self, _c: Category) -> Option<Category> {
        None
    }

    fn state(&self, c: Category) -> Option<ObjectState> {
        self.0.first(c).map(|o| ObjectState {
            is_open: o.open.unwrap_or(false),
            is_on: o.on.unwrap_or(false),
            ..ObjectState::default()
        })
    }
}

impl HeuristicPlanner {
    pub fn new(substitution: bool) -> Self {
        HeuristicPlanner {
            templates: TemplateSet::builtin(),
            table: substitution.then(|| SubstitutionTable::builtin().clone()),
            intents: None,
            queue: VecDeque::new(),
            state: RecipeState::default(),
            acked: 0,
        }
    }

    pub fn with_table(table: SubstitutionTable) -> Self {
        HeuristicPlanner { table: Some(table), ..HeuristicPlanner::new(false) }
    }

    fn choose_reading(&self, instruction: &str, summary: &MapSummary) -> Result<VecDeque<Intent>, PlannerError> {
        let readings = self.templates.parse(instruction).ok_or_else(|| PlannerError::Unparsed(instruction.to_string()))?;
        let known = |r: &Vec<Intent>| r.iter().all(|i| summary.has(i.item()));
        let pick = readings.iter().find(|r| known(r)).unwrap_or(&readings[0]);
        Ok(pick.iter().copied().collect())
    }

    fn apply_done(&mut self, s: &PlanStep) {
        match s.primitive_hint {
            Some(ActionPrimitive::PickUp) => self.state.held = s.target(),
            Some(ActionPrimitive::Place) => self.state.held = None,
            Some(ActionPrimitive::Open) => self.state.opened.extend(s.target()),
            Some(ActionPrimitive::Close) => self.state.opened.retain(|&c| Some(c) != s.target()),
            _ => {}
        }
    }

    fn substitute(&mut self, from: Category, to: Category) {
        let t = self.templates;
        for d in self.queue.iter_mut() {
            *d = d.substitute(t, from, to);
        }
        if let Some(rest) = self.intents.as_mut() {
            for i in rest.iter_mut() {
                *i = i.substitute(from, to);
            }
        }
    }

    /// Adjusts the head of the queue when its object has not turned up after exploring.
    fn handle_missing(&mut self, summary: &MapSummary) {
        let Some(head) = self.queue.front() else { return };
        let c = head.target();
        let exhausted = summary.frontier_count == 0 || summary.explored_fraction >= EXPLORED_ENOUGH;
        if summary.has(c) || !exhausted {
            return;
        }
        // look inside closed containers that might hold it
        for (&box_, contents) in &self.templates.containers {
            if !contents.contains(&c) || self.state.opened.contains(&box_) {
                continue;
            }
            if let Some(o) = summary.first(box_) {
                if o.open == Some(false) {
                    self.queue.push_front(StepDraft::act(ActionPrimitive::Open, box_));
                    self.queue.push_front(StepDraft::find(box_));
                    return;
                }
            }
        }
        if let Some(table) = &self.table {
            if let Some(e) = table.equivalents(c).into_iter().find(|&e| summary.has(e)) {
                self.substitute(c, e);
            }
        }
    }
}

impl Planner for HeuristicPlanner {
    fn next_step(&mut self, instruction: &str, done: &[PlanStep], summary: &MapSummary) -> Result<PlanStep, PlannerError> {
        if let Some(t) = done.iter().find(|s| s.terminal) {
            return Ok(t.clone());
        }
        if done.len() >= MAX_PLAN_STEPS {
            return Err(PlannerError::PlannerExhausted);
        }
        if self.intents.is_none() {
            self.intents = Some(self.choose_reading(instruction, summary)?);
        }
        while self.acked < done.len() {
            let s = &done[self.acked];
            self.apply_done(s);
            if self.queue.front().is_some_and(|d| d.body == s.body()) {
                self.queue.pop_front();
            }
            self.acked += 1;
        }
        if self.queue.is_empty() {
            if let Some(next) = self.intents.as_mut().and_then(|q| q.pop_front()) {
                let mut st = self.state.clone();
                self.queue = expand(self.templates, &next, &Seen(summary), &mut st).into();
            }
        }
        self.handle_missing(summary);
        Ok(match self.queue.front() {
            Some(d) => d.clone().into_step(done.len() + 1),
            None => PlanStep::terminal(done.len() + 1),
        })
    }

    fn name(&self) -> String {
        if self.table.is_some() {
            "heuristic".into()
        } else {
            "heuristic-nosub".into()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::Cell;
    use crate::planner::SummaryObject;

    fn seen(c: &str, open: Option<bool>) -> SummaryObject {
        SummaryObject { category: Category::named(c), instance: 1, cell: Cell::new(40, 55), open, on: None }
    }

    #[test]
    fn substitutes_mug_for_missing_bottle() {
        let mut p = HeuristicPlanner::new(true);
        let summary = MapSummary { discovered: vec![seen("Mug", None)], explored_fraction: 0.95, frontier_count: 2, frontiers: vec![] };
        let s = p.next_step("Bring me the bottle", &[], &summary).unwrap();
        assert_eq!(s.demanded_objects, vec![Category::named("Mug")]);
        assert_eq!(s.text, "Step 1. Find the mug");
    }

    #[test]
    fn without_substitution_keeps_asking() {
        let mut p = HeuristicPlanner::new(false);
        let summary = MapSummary { discovered: vec![seen("Mug", None)], explored_fraction: 0.95, frontier_count: 0, frontiers: vec![] };
        let s = p.next_step("Bring me the bottle", &[], &summary).unwrap();
        assert_eq!(s.demanded_objects, vec![Category::named("Bottle")]);
    }

    #[test]
    fn opens_fridge_before_giving_up_on_food() {
        let mut p = HeuristicPlanner::new(true);
        let summary = MapSummary { discovered: vec![seen("Fridge", Some(false))], explored_fraction: 1.0, frontier_count: 0, frontiers: vec![] };
        let s = p.next_step("Slice the lettuce", &[], &summary).unwrap();
        assert_eq!(s.body(), "Find the knife");
        let mut done = vec![s];
        let s = p.next_step("Slice the lettuce", &done, &summary).unwrap();
        assert_eq!(s.body(), "Pick up the knife");
        done.push(s);
        let s = p.next_step("Slice the lettuce", &done, &summary).unwrap();
        assert_eq!(s.body(), "Find the fridge");
        done.push(s);
        let s = p.next_step("Slice the lettuce", &done, &summary).unwrap();
        assert_eq!(s.body(), "Open the fridge");
    }

    #[test]
    fn ends_after_the_last_step() {
        let mut p = HeuristicPlanner::new(true);
        let summary = MapSummary::default();
        let mut done = Vec::new();
        loop {
            let s = p.next_step("Turn on the television", &done, &summary).unwrap();
            if s.terminal {
                assert_eq!(s.index, 3);
                break;
            }
            done.push(s);
        }
    }
}
