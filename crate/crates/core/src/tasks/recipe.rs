//! Expansion of subgoals into step sequences.

use super::templates::{Intent, TemplateSet};
use crate::planner::PlanStep;
use crate::scene::{ActionPrimitive, Category, ObjectState};

/// One step before numbering.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StepDraft {
    pub body: String,
    pub primitive: Option<ActionPrimitive>,
    pub objects: Vec<Category>,
}

impl StepDraft {
    pub fn find(c: Category) -> Self {
        StepDraft { body: format!("Find the {}", c.phrase()), primitive: None, objects: vec![c] }
    }

    pub fn act(p: ActionPrimitive, c: Category) -> Self {
        let verb = match p {
            ActionPrimitive::PickUp => "Pick up",
            ActionPrimitive::Open => "Open",
            ActionPrimitive::Close => "Close",
            ActionPrimitive::ToggleOn => "Turn on",
            ActionPrimitive::ToggleOff => "Turn off",
            ActionPrimitive::Slice => "Slice",
            ActionPrimitive::Place => "Put down",
        };
        StepDraft { body: format!("{verb} the {}", c.phrase()), primitive: Some(p), objects: vec![c] }
    }

    pub fn put(t: &TemplateSet, item: Category, receptacle: Category) -> Self {
        StepDraft { body: t.put_text(item, receptacle), primitive: Some(ActionPrimitive::Place), objects: vec![receptacle, item] }
    }

    pub fn is_find(&self) -> bool {
        self.primitive.is_none()
    }

    pub fn target(&self) -> Category {
        self.objects[0]
    }

    pub fn into_step(self, index: usize) -> PlanStep {
        PlanStep::new(index, &self.body, self.primitive, self.objects)
    }

    pub fn from_step(s: &PlanStep) -> Self {
        StepDraft { body: s.body().to_string(), primitive: s.primitive_hint, objects: s.demanded_objects.clone() }
    }

    pub fn substitute(&self, t: &TemplateSet, from: Category, to: Category) -> Self {
        if !self.objects.contains(&from) {
            return self.clone();
        }
        let objects: Vec<Category> = self.objects.iter().map(|&c| if c == from { to } else { c }).collect();
        let body = match self.primitive {
            None => StepDraft::find(objects[0]).body,
            Some(ActionPrimitive::Place) => t.put_text(objects[1], objects[0]),
            Some(p) => StepDraft::act(p, objects[0]).body,
        };
        StepDraft { body, primitive: self.primitive, objects }
    }
}

/// What the expander may assume about the world.
pub trait Knowledge {
    /// Container hiding `c` when no instance is in plain sight.
    fn hidden_in(&self, c: Category) -> Option<Category>;
    /// Current state of the instance the agent would use.
    fn state(&self, c: Category) -> Option<ObjectState>;
}

/// Bookkeeping carried between subgoals.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RecipeState {
    pub held: Option<Category>,
    pub opened: Vec<Category>,
}

fn counter() -> Category {
    Category::named("CounterTop")
}

fn microwave() -> Category {
    Category::named("Microwave")
}

/// Steps that make `c` visible and present.
fn reveal(c: Category, k: &dyn Knowledge, st: &mut RecipeState, out: &mut Vec<StepDraft>) {
    if let Some(box_) = k.hidden_in(c) {
        if !st.opened.contains(&box_) {
            out.push(StepDraft::find(box_));
            out.push(StepDraft::act(ActionPrimitive::Open, box_));
            st.opened.push(box_);
        }
    }
}

fn free_hands(t: &TemplateSet, st: &mut RecipeState, out: &mut Vec<StepDraft>) {
    if let Some(h) = st.held.take() {
        out.push(StepDraft::find(counter()));
        out.push(StepDraft::put(t, h, counter()));
    }
}

fn acquire(t: &TemplateSet, c: Category, k: &dyn Knowledge, st: &mut RecipeState, out: &mut Vec<StepDraft>) {
    if st.held == Some(c) {
        return;
    }
    free_hands(t, st, out);
    reveal(c, k, st, out);
    out.push(StepDraft::find(c));
    out.push(StepDraft::act(ActionPrimitive::PickUp, c));
    st.held = Some(c);
}

fn is_open(c: Category, k: &dyn Knowledge, st: &RecipeState) -> bool {
    st.opened.contains(&c) || k.state(c).is_some_and(|s| s.is_open)
}

/// Reaches an openable receptacle and opens it if needed.
fn reach_open(c: Category, k: &dyn Knowledge, st: &mut RecipeState, out: &mut Vec<StepDraft>) {
    reveal(c, k, st, out);
    out.push(StepDraft::find(c));
    if c.affordances().openable && !is_open(c, k, st) {
        if k.state(c).is_some_and(|s| s.is_on) {
            out.push(StepDraft::act(ActionPrimitive::ToggleOff, c));
        }
        out.push(StepDraft::act(ActionPrimitive::Open, c));
        st.opened.push(c);
    }
}

/// Steps achieving one subgoal from the given state.
pub fn expand(t: &TemplateSet, intent: &Intent, k: &dyn Knowledge, st: &mut RecipeState) -> Vec<StepDraft> {
    let mut out = Vec::new();
    match *intent {
        Intent::Slice { item } => {
            acquire(t, Category::named("Knife"), k, st, &mut out);
            reveal(item, k, st, &mut out);
            out.push(StepDraft::find(item));
            out.push(StepDraft::act(ActionPrimitive::Slice, item));
        }
        Intent::Place { item, receptacle } => {
            acquire(t, item, k, st, &mut out);
            reach_open(receptacle, k, st, &mut out);
            out.push(StepDraft::put(t, item, receptacle));
            st.held = None;
        }
        Intent::Heat { item } => {
            acquire(t, item, k, st, &mut out);
            reach_open(microwave(), k, st, &mut out);
            out.push(StepDraft::put(t, item, microwave()));
            out.push(StepDraft::act(ActionPrimitive::Close, microwave()));
            out.push(StepDraft::act(ActionPrimitive::ToggleOn, microwave()));
            st.held = None;
            st.opened.retain(|&c| c != microwave());
        }
        Intent::TurnOn { item } => {
            reveal(item, k, st, &mut out);
            out.push(StepDraft::find(item));
            let a = item.affordances();
            if a.openable && a.receptacle && is_open(item, k, st) {
                out.push(StepDraft::act(ActionPrimitive::Close, item));
                st.opened.retain(|&c| c != item);
            }
            out.push(StepDraft::act(ActionPrimitive::ToggleOn, item));
        }
        Intent::Open { item } => {
            reveal(item, k, st, &mut out);
            out.push(StepDraft::find(item));
            if k.state(item).is_some_and(|s| s.is_on) {
                out.push(StepDraft::act(ActionPrimitive::ToggleOff, item));
            }
            out.push(StepDraft::act(ActionPrimitive::Open, item));
            st.opened.push(item);
        }
        Intent::Bring { item } => acquire(t, item, k, st, &mut out),
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Blank;
    impl Knowledge for Blank {
        fn hidden_in(&self, _c: Category) -> Option<Category> {
            None
        }
        fn state(&self, _c: Category) -> Option<ObjectState> {
            None
        }
    }

    fn bodies(d: &[StepDraft]) -> Vec<&str> {
        d.iter().map(|s| s.body.as_str()).collect()
    }

    #[test]
    fn slice_recipe() {
        let t = TemplateSet::builtin();
        let mut st = RecipeState::default();
        let d = expand(t, &Intent::Slice { item: Category::named("Tomato") }, &Blank, &mut st);
        assert_eq!(bodies(&d), ["Find the knife", "Pick up the knife", "Find the tomato", "Slice the tomato"]);
        assert_eq!(st.held, Some(Category::named("Knife")));
    }

    #[test]
    fn heat_after_slice_puts_the_knife_down() {
        let t = TemplateSet::builtin();
        let mut st = RecipeState { held: Some(Category::named("Knife")), opened: vec![] };
        let d = expand(t, &Intent::Heat { item: Category::named("Potato") }, &Blank, &mut st);
        assert_eq!(
            bodies(&d),
            [
                "Find the counter top",
                "Put the knife on the counter top",
                "Find the potato",
                "Pick up the potato",
                "Find the microwave",
                "Open the microwave",
                "Put the potato in the microwave",
                "Close the microwave",
                "Turn on the microwave"
            ]
        );
        assert_eq!(st.held, None);
    }

    #[test]
    fn substitution_rewrites_text() {
        let t = TemplateSet::builtin();
        let d = StepDraft::put(t, Category::named("Bottle"), Category::named("Sink"));
        let s = d.substitute(t, Category::named("Bottle"), Category::named("Mug"));
        assert_eq!(s.body, "Put the mug in the sink");
        assert_eq!(s.objects, vec![Category::named("Sink"), Category::named("Mug")]);
    }
}
