//! PDDL-style goal conditions over object categories.

use super::{Category, ObjectId, Scene};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Predicate {
    Sliced(Category),
    Open(Category),
    Closed(Category),
    On(Category),
    Off(Category),
    In(Category, Category),
    Held(Category),
    /// Inside a microwave that is switched on.
    Heated(Category),
}

impl Predicate {
    pub fn categories(&self) -> Vec<Category> {
        match *self {
            Predicate::In(a, b) => vec![a, b],
            Predicate::Sliced(c)
            | Predicate::Open(c)
            | Predicate::Closed(c)
            | Predicate::On(c)
            | Predicate::Off(c)
            | Predicate::Held(c)
            | Predicate::Heated(c) => vec![c],
        }
    }

    /// Truth of the predicate under a category→instance binding.
    fn holds(&self, scene: &Scene, bind: &dyn Fn(Category) -> ObjectId) -> bool {
        let st = |c: Category| scene.object(bind(c)).map(|o| o.state).unwrap_or_default();
        match *self {
            Predicate::Sliced(c) => st(c).is_sliced,
            Predicate::Open(c) => st(c).is_open,
            Predicate::Closed(c) => scene.object(bind(c)).is_some_and(|o| o.affordances.openable && !o.state.is_open),
            Predicate::On(c) => st(c).is_on,
            Predicate::Off(c) => scene.object(bind(c)).is_some_and(|o| o.affordances.toggleable && !o.state.is_on),
            Predicate::In(a, b) => scene.containment.get(&bind(a)) == Some(&bind(b)),
            Predicate::Held(c) => st(c).is_held,
            Predicate::Heated(c) => scene
                .containment
                .get(&bind(c))
                .and_then(|p| scene.object(*p))
                .is_some_and(|m| m.category.name() == "Microwave" && m.state.is_on),
        }
    }

    fn name(&self) -> &'static str {
        match self {
            Predicate::Sliced(_) => "sliced",
            Predicate::Open(_) => "open",
            Predicate::Closed(_) => "closed",
            Predicate::On(_) => "on",
            Predicate::Off(_) => "off",
            Predicate::In(..) => "in",
            Predicate::Held(_) => "held",
            Predicate::Heated(_) => "heated",
        }
    }
}

impl fmt::Display for Predicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Predicate::In(a, b) => write!(f, "in({a}, {b})"),
            other => write!(f, "{}({})", other.name(), other.categories()[0]),
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum GoalParseError {
    #[error("malformed predicate `{0}`")]
    Syntax(String),
    #[error("unknown predicate `{0}`")]
    UnknownPredicate(String),
    #[error("unknown category `{0}`")]
    UnknownCategory(String),
    #[error("goal has no conjuncts")]
    Empty,
}

impl FromStr for Predicate {
    type Err = GoalParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let open = s.find('(').ok_or_else(|| GoalParseError::Syntax(s.into()))?;
        if !s.ends_with(')') {
            return Err(GoalParseError::Syntax(s.into()));
        }
        let name = &s[..open];
        let args: Vec<&str> = s[open + 1..s.len() - 1].split(',').map(str::trim).collect();
        let cats = args
            .iter()
            .map(|a| Category::from_name(a).ok_or_else(|| GoalParseError::UnknownCategory(a.to_string())))
            .collect::<Result<Vec<_>, _>>()?;
        let one = || {
            if cats.len() == 1 {
                Ok(cats[0])
            } else {
                Err(GoalParseError::Syntax(s.into()))
            }
        };
        Ok(match name {
            "sliced" => Predicate::Sliced(one()?),
            "open" => Predicate::Open(one()?),
            "closed" => Predicate::Closed(one()?),
            "on" => Predicate::On(one()?),
            "off" => Predicate::Off(one()?),
            "held" => Predicate::Held(one()?),
            "heated" => Predicate::Heated(one()?),
            "in" if cats.len() == 2 => Predicate::In(cats[0], cats[1]),
            "in" => return Err(GoalParseError::Syntax(s.into())),
            other => return Err(GoalParseError::UnknownPredicate(other.into())),
        })
    }
}

impl Serialize for Predicate {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Predicate {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

/// Conjunction of predicates; satisfied when one consistent binding of
/// categories to instances makes every conjunct true.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Predicate>", into = "Vec<Predicate>")]
pub struct GoalCondition {
    conjuncts: Vec<Predicate>,
}

impl GoalCondition {
    pub fn new(conjuncts: Vec<Predicate>) -> Result<Self, GoalParseError> {
        if conjuncts.is_empty() {
            return Err(GoalParseError::Empty);
        }
        Ok(GoalCondition { conjuncts })
    }

    pub fn conjuncts(&self) -> &[Predicate] {
        &self.conjuncts
    }

    pub fn len(&self) -> usize {
        self.conjuncts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.conjuncts.is_empty()
    }

    /// Distinct categories in first-mention order.
    pub fn categories(&self) -> Vec<Category> {
        let mut out = Vec::new();
        for p in &self.conjuncts {
            for c in p.categories() {
                if !out.contains(&c) {
                    out.push(c);
                }
            }
        }
        out
    }

    /// Number of conjuncts that hold on their own (each with its own binding).
    pub fn satisfied_count(&self, scene: &Scene) -> usize {
        self.conjuncts
            .iter()
            .filter(|p| goal_satisfied(scene, &GoalCondition { conjuncts: vec![**p] }))
            .count()
    }
}

impl TryFrom<Vec<Predicate>> for GoalCondition {
    type Error = GoalParseError;
    fn try_from(v: Vec<Predicate>) -> Result<Self, Self::Error> {
        GoalCondition::new(v)
    }
}

impl From<GoalCondition> for Vec<Predicate> {
    fn from(g: GoalCondition) -> Self {
        g.conjuncts
    }
}

impl fmt::Display for GoalCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.conjuncts.iter().map(|p| p.to_string()).collect();
        write!(f, "{{{}}}", parts.join(", "))
    }
}

/// Backtracking search for a binding that satisfies every conjunct.
pub fn goal_satisfied(scene: &Scene, goal: &GoalCondition) -> bool {
    let cats = goal.categories();
    let candidates: Vec<Vec<ObjectId>> =
        cats.iter().map(|&c| scene.instances_of(c).map(|o| o.id).collect()).collect();
    if candidates.iter().any(|v| v.is_empty()) {
        return false;
    }
    let mut binding: Vec<Option<ObjectId>> = vec![None; cats.len()];
    search(scene, goal, &cats, &candidates, &mut binding, 0)
}

fn search(
    scene: &Scene,
    goal: &GoalCondition,
    cats: &[Category],
    candidates: &[Vec<ObjectId>],
    binding: &mut Vec<Option<ObjectId>>,
    depth: usize,
) -> bool {
    // prune on conjuncts whose categories are all bound
    let bound = |c: Category| cats.iter().position(|&x| x == c).and_then(|i| binding[i]);
    for p in goal.conjuncts() {
        if p.categories().iter().all(|&c| bound(c).is_some()) {
            let lookup = |c: Category| bound(c).expect("bound");
            if !p.holds(scene, &lookup) {
                return false;
            }
        }
    }
    if depth == cats.len() {
        return true;
    }
    for &id in &candidates[depth] {
        binding[depth] = Some(id);
        if search(scene, goal, cats, candidates, binding, depth + 1) {
            return true;
        }
    }
    binding[depth] = None;
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scene::{apply_effect, generate_scene, ActionPrimitive, SizeClass};

    #[test]
    fn parse_and_display() {
        let p: Predicate = "in(Egg, Bowl)".parse().unwrap();
        assert_eq!(p, Predicate::In(Category::named("Egg"), Category::named("Bowl")));
        assert_eq!(p.to_string(), "in(Egg, Bowl)");
        assert_eq!("sliced( Tomato )".parse::<Predicate>().unwrap().to_string(), "sliced(Tomato)");
        assert!(matches!("boiled(Egg)".parse::<Predicate>(), Err(GoalParseError::UnknownPredicate(_))));
        assert!(matches!("sliced(Dragon)".parse::<Predicate>(), Err(GoalParseError::UnknownCategory(_))));
        assert!(matches!("in(Egg)".parse::<Predicate>(), Err(GoalParseError::Syntax(_))));
        assert!(GoalCondition::new(vec![]).is_err());
        assert!(serde_json::from_str::<GoalCondition>("[]").is_err());
    }

    #[test]
    fn sliced_goal_after_slicing() {
        let s = generate_scene(7, SizeClass::Small);
        let tomato = Category::named("Tomato");
        let goal = GoalCondition::new(vec![Predicate::Sliced(tomato)]).unwrap();
        if !s.has_category(tomato) {
            return;
        }
        assert!(!goal_satisfied(&s, &goal));
        let mut s2 = s.clone();
        let id = s2.instances_of(tomato).next().unwrap().id;
        s2.object_mut(id).unwrap().state.is_sliced = true;
        assert!(goal_satisfied(&s2, &goal));
    }

    #[test]
    fn binding_is_consistent_across_conjuncts() {
        let s = generate_scene(11, SizeClass::Small);
        let knife = s.instances_of(Category::named("Knife")).next().unwrap().id;
        let sink = s.instances_of(Category::named("Sink")).next().unwrap().id;
        let held = apply_effect(&s, ActionPrimitive::PickUp, knife, None).unwrap();
        let placed = apply_effect(&held, ActionPrimitive::Place, sink, Some(knife)).unwrap();
        let k = Category::named("Knife");
        let in_sink = GoalCondition::new(vec![Predicate::In(k, Category::named("Sink"))]).unwrap();
        assert!(goal_satisfied(&placed, &in_sink));
        // the same knife cannot be both in the sink and held
        let both = GoalCondition::new(vec![Predicate::In(k, Category::named("Sink")), Predicate::Held(k)]).unwrap();
        assert!(!goal_satisfied(&placed, &both));
        assert_eq!(both.satisfied_count(&placed), 1);
    }
}
