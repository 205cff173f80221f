//! Low-level controller: turns a plan step plus the current map into one command.

mod approach;
mod astar;

pub use approach::{approach_band, approach_cells, facing, line_of_sight, nearest_cell, sees};
pub use astar::{astar, path_to_commands, plan_path, turns, NoPath, OccupancyGrid, SearchParams, TrueOccupancy};

use crate::config::Config;
use crate::featmap::{DiscoveredObject, FeatureMap, Frontier, Occupancy};
use crate::geom::{cosine, Cell, Pose};
use crate::planner::PlanStep;
use crate::scene::{ActionPrimitive, Category, ObjectId, Scene};
use crate::sim::{interaction_distance, Observation};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CommandKind {
    Navigate,
    PickUp,
    Place,
    Open,
    Close,
    ToggleOn,
    ToggleOff,
    Slice,
}

impl CommandKind {
    pub fn interaction(self) -> Option<ActionPrimitive> {
        Some(match self {
            CommandKind::Navigate => return None,
            CommandKind::PickUp => ActionPrimitive::PickUp,
            CommandKind::Place => ActionPrimitive::Place,
            CommandKind::Open => ActionPrimitive::Open,
            CommandKind::Close => ActionPrimitive::Close,
            CommandKind::ToggleOn => ActionPrimitive::ToggleOn,
            CommandKind::ToggleOff => ActionPrimitive::ToggleOff,
            CommandKind::Slice => ActionPrimitive::Slice,
        })
    }

    pub fn from_primitive(p: ActionPrimitive) -> Self {
        match p {
            ActionPrimitive::PickUp => CommandKind::PickUp,
            ActionPrimitive::Place => CommandKind::Place,
            ActionPrimitive::Open => CommandKind::Open,
            ActionPrimitive::Close => CommandKind::Close,
            ActionPrimitive::ToggleOn => CommandKind::ToggleOn,
            ActionPrimitive::ToggleOff => CommandKind::ToggleOff,
            ActionPrimitive::Slice => CommandKind::Slice,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TargetRef {
    pub category: Category,
    pub instance: u32,
}

/// One executable command: navigation carries no target object, interactions always do.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActionCommand {
    pub primitive: CommandKind,
    pub target_object: Option<TargetRef>,
    pub location: Cell,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FrontierPolicy {
    /// Frontier closest to the true shortest path toward the target.
    Oracle,
    /// Frontier whose tokens best match the demanded objects.
    Greedy,
    /// Seeded uniform choice.
    Random,
}

impl fmt::Display for FrontierPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FrontierPolicy::Oracle => "oracle",
            FrontierPolicy::Greedy => "greedy",
            FrontierPolicy::Random => "random",
        })
    }
}

impl FromStr for FrontierPolicy {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "oracle" => Ok(FrontierPolicy::Oracle),
            "greedy" => Ok(FrontierPolicy::Greedy),
            "random" => Ok(FrontierPolicy::Random),
            _ => Err(format!("unknown controller `{s}` (expected oracle, greedy or random)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize, Deserialize)]
pub enum ControlError {
    #[error("no frontier left and the target is still undiscovered")]
    ExplorationExhausted,
    #[error("no reachable standing cell near the target")]
    NoApproach,
    #[error("step demands no object")]
    NoTarget,
}

/// Everything `decide` may look at besides the map and frontiers.
pub struct DecideContext<'a> {
    pub pose: Pose,
    pub held: Option<u32>,
    pub observation: &'a Observation,
    pub config: &'a Config,
    pub policy: FrontierPolicy,
    pub search: &'a SearchParams,
    pub residue: (i32, i32),
    /// Positive prompt of the current step.
    pub prompt: &'a [f32],
    /// Ground truth, consulted only by the oracle policy.
    pub truth: Option<&'a Scene>,
    pub excluded_frontiers: &'a [Cell],
    pub excluded_cells: &'a HashSet<Cell>,
    pub excluded_instances: &'a HashSet<u32>,
    /// Instance used by the previous step for the same category.
    pub focus: Option<u32>,
    /// Anchor of the frontier the previous decision headed for; kept while it survives.
    pub commitment: Option<Cell>,
    pub seed: u64,
}

/// Why a navigation goal was chosen.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum NavGoal {
    Frontier { id: usize, anchor: Cell },
    Approach { instance: u32 },
    /// Oracle fallback straight toward the true target.
    Truth { instance: u32 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Decision {
    pub command: ActionCommand,
    /// Planned lattice path for navigation (empty for interactions).
    pub path: Vec<Cell>,
    /// All acceptable end cells for navigation.
    pub goals: Vec<Cell>,
    pub goal: Option<NavGoal>,
    /// Frontier anchors found unreachable while deciding.
    pub unreachable: Vec<Cell>,
}

/// Frontier cell nearest the centroid and the lattice cells around it that may be entered.
pub fn frontier_goals(map: &FeatureMap, f: &Frontier, stride: i32, residue: (i32, i32)) -> (Cell, Vec<Cell>) {
    let anchor = *f
        .cells
        .iter()
        .min_by(|a, b| {
            a.dist(f.centroid).partial_cmp(&b.dist(f.centroid)).unwrap_or(std::cmp::Ordering::Equal).then(a.cmp(b))
        })
        .expect("frontiers are nonempty");
    let reach = stride - 1;
    let mut goals = Vec::new();
    for row in anchor.row - reach..=anchor.row + reach {
        for col in anchor.col - reach..=anchor.col + reach {
            let c = Cell::new(row, col);
            if (row - residue.0).rem_euclid(stride) == 0
                && (col - residue.1).rem_euclid(stride) == 0
                && map.in_bounds(c)
                && map.occupancy(c) != Occupancy::Obstacle
            {
                goals.push(c);
            }
        }
    }
    (anchor, goals)
}

/// Distance in meters from the agent to the object's observed cells.
pub fn known_distance(pose: Pose, obj: &DiscoveredObject, cell_size: f64) -> f64 {
    nearest_cell(pose.cell, &obj.cells).1 * cell_size
}

/// Whether an interaction with `obj` can be attempted right now.
pub fn can_interact(ctx: &DecideContext, obj: &DiscoveredObject) -> bool {
    let d = known_distance(ctx.pose, obj, ctx.config.cell_size);
    ctx.observation.contains_instance(obj.instance)
        && !ctx.excluded_cells.contains(&ctx.pose.cell)
        && d > ctx.config.min_interaction_range
        && d <= ctx.config.interaction_range
}

/// Discovered instance the step should act on.
pub fn pick_instance<'m>(map: &'m FeatureMap, ctx: &DecideContext, category: Category) -> Option<&'m DiscoveredObject> {
    if let Some(f) = ctx.focus {
        if let Some(o) = map.object(f) {
            if o.category == category && Some(f) != ctx.held && !ctx.excluded_instances.contains(&f) {
                return Some(o);
            }
        }
    }
    map.instances_of(category)
        .filter(|o| Some(o.instance) != ctx.held && !ctx.excluded_instances.contains(&o.instance))
        .min_by(|a, b| {
            let da = known_distance(ctx.pose, a, 1.0);
            let db = known_distance(ctx.pose, b, 1.0);
            da.partial_cmp(&db).unwrap_or(std::cmp::Ordering::Equal).then(a.instance.cmp(&b.instance))
        })
}

/// Chooses the next command for `step`.
pub fn decide(step: &PlanStep, frontiers: &[Frontier], map: &FeatureMap, ctx: &DecideContext) -> Result<Decision, ControlError> {
    let category = *step.demanded_objects.first().ok_or(ControlError::NoTarget)?;
    if let Some(obj) = pick_instance(map, ctx, category) {
        let target = TargetRef { category, instance: obj.instance };
        if let (Some(p), true) = (step.primitive_hint, can_interact(ctx, obj)) {
            return Ok(Decision {
                command: ActionCommand {
                    primitive: CommandKind::from_primitive(p),
                    target_object: Some(target),
                    location: obj.location(),
                },
                path: Vec::new(),
                goals: Vec::new(),
                goal: None,
                unreachable: Vec::new(),
            });
        }
        let mut goals: Vec<Cell> =
            approach_cells(map, &obj.cells, obj.top, ctx.search.stride, ctx.residue, ctx.config)
                .into_iter()
                .filter(|c| !ctx.excluded_cells.contains(c))
                .collect();
        let path = match ctx.truth {
            Some(t) => seen_path(t, map, ctx.search, ctx, ObjectId(obj.instance), &mut goals).ok_or(NoPath),
            None => astar(map, ctx.search, ctx.pose.cell, &goals),
        };
        if let Ok(path) = path {
            return Ok(navigate(path, goals, NavGoal::Approach { instance: obj.instance }, Vec::new()));
        }
        // no known standing cell yet: keep mapping, which may reveal one
        return explore(step, category, frontiers, map, ctx).map_err(|e| match e {
            ControlError::ExplorationExhausted => ControlError::NoApproach,
            e => e,
        });
    }
    explore(step, category, frontiers, map, ctx)
}

fn navigate(path: Vec<Cell>, goals: Vec<Cell>, goal: NavGoal, unreachable: Vec<Cell>) -> Decision {
    let location = *path.last().expect("paths include the start");
    Decision {
        command: ActionCommand { primitive: CommandKind::Navigate, target_object: None, location },
        path,
        goals,
        goal: Some(goal),
        unreachable,
    }
}

/// Candidate frontier with its navigation plan.
pub struct Candidate<'f> {
    pub frontier: &'f Frontier,
    pub anchor: Cell,
    pub goals: Vec<Cell>,
    pub path: Vec<Cell>,
    pub cost: f64,
}

fn path_cost(map: &FeatureMap, params: &SearchParams, path: &[Cell]) -> f64 {
    path.windows(2)
        .map(|w| {
            let (dr, dc) = ((w[1].row - w[0].row).signum(), (w[1].col - w[0].col).signum());
            params.edge_cost(map, w[0], dr, dc).unwrap_or(f64::INFINITY)
        })
        .sum()
}

/// Reachable, not yet excluded frontiers; unreachable anchors are reported separately.
pub fn candidates<'f>(frontiers: &'f [Frontier], map: &FeatureMap, ctx: &DecideContext) -> (Vec<Candidate<'f>>, Vec<Cell>) {
    let mut out = Vec::new();
    let mut unreachable = Vec::new();
    for f in frontiers {
        let (anchor, goals) = frontier_goals(map, f, ctx.search.stride, ctx.residue);
        if ctx.excluded_frontiers.iter().any(|e| e.chebyshev(anchor) <= ctx.search.stride) {
            continue;
        }
        match astar(map, ctx.search, ctx.pose.cell, &goals) {
            Ok(path) => {
                let cost = path_cost(map, ctx.search, &path);
                out.push(Candidate { frontier: f, anchor, goals, path, cost });
            }
            Err(NoPath) => unreachable.push(anchor),
        }
    }
    (out, unreachable)
}

/// Mean cosine similarity of a frontier's tokens to the prompt.
pub fn token_score(f: &Frontier, prompt: &[f32]) -> f32 {
    if f.tokens.is_empty() {
        return 0.0;
    }
    f.tokens.iter().map(|t| cosine(t, prompt)).sum::<f32>() / f.tokens.len() as f32
}

/// Lattice path through true free space to the nearest standing cell of any visible
/// instance of `category`, with the chosen instance.
pub fn true_path(scene: &Scene, ctx: &DecideContext, category: Category) -> Option<(u32, Vec<Cell>, Vec<Cell>)> {
    let grid = TrueOccupancy(scene);
    let params = SearchParams::new(ctx.search.stride, 1.0);
    let mut best: Option<(u32, Vec<Cell>, Vec<Cell>)> = None;
    for o in scene.instances_of(category) {
        if o.state.is_held || scene.hidden_by(o.id).is_some() {
            continue;
        }
        let cells: Vec<Cell> = o.footprint().cells().collect();
        let top = scene.base_height(o.id) + o.category.info().height;
        let mut goals: Vec<Cell> = approach_cells(&grid, &cells, top, params.stride, ctx.residue, ctx.config)
            .into_iter()
            .filter(|c| !ctx.excluded_cells.contains(c))
            .collect();
        if let Some(path) = seen_path(scene, &grid, &params, ctx, o.id, &mut goals) {
            if best.as_ref().is_none_or(|b| path.len() < b.1.len()) {
                best = Some((o.id.0, path, goals));
            }
        }
    }
    best
}

/// Shortest path to a goal from which `id` actually renders; drops blind goals along the way.
fn seen_path<G: OccupancyGrid>(
    scene: &Scene,
    grid: &G,
    params: &SearchParams,
    ctx: &DecideContext,
    id: ObjectId,
    goals: &mut Vec<Cell>,
) -> Option<Vec<Cell>> {
    while let Ok(path) = astar(grid, params, ctx.pose.cell, goals) {
        let end = *path.last()?;
        if sees(scene, end, id, ctx.config) {
            return Some(path);
        }
        goals.retain(|&g| g != end);
    }
    None
}

fn explore(step: &PlanStep, category: Category, frontiers: &[Frontier], map: &FeatureMap, ctx: &DecideContext) -> Result<Decision, ControlError> {
    let (cands, unreachable) = candidates(frontiers, map, ctx);
    let truth = match (ctx.policy, ctx.truth) {
        (FrontierPolicy::Oracle, Some(scene)) => true_path(scene, ctx, category),
        _ => None,
    };
    if cands.is_empty() {
        // the oracle knows where the target is even when the map has no frontier left
        if let Some((instance, path, _)) = truth {
            let goals = vec![*path.last().expect("paths include the start")];
            return Ok(navigate(path, goals, NavGoal::Truth { instance }, unreachable));
        }
        let _ = step;
        return Err(ControlError::ExplorationExhausted);
    }
    let kept = ctx.commitment.and_then(|a| {
        cands
            .iter()
            .enumerate()
            .filter(|(_, c)| c.anchor.chebyshev(a) <= ctx.search.stride)
            .min_by_key(|(_, c)| (c.anchor.chebyshev(a), c.anchor))
            .map(|(i, _)| i)
    });
    let chosen = kept.unwrap_or_else(|| select_frontier(&cands, ctx, truth.as_ref().map(|t| t.1.as_slice())));
    let c = &cands[chosen];
    Ok(navigate(c.path.clone(), c.goals.clone(), NavGoal::Frontier { id: c.frontier.id, anchor: c.anchor }, unreachable))
}

/// Index of the chosen candidate under the context's policy.
pub fn select_frontier(cands: &[Candidate], ctx: &DecideContext, true_path: Option<&[Cell]>) -> usize {
    assert!(!cands.is_empty(), "select_frontier needs candidates");
    let lex = |a: &Candidate, b: &Candidate| a.frontier.centroid.cmp(&b.frontier.centroid);
    let cmp_f = |x: f64, y: f64| x.partial_cmp(&y).unwrap_or(std::cmp::Ordering::Equal);
    let idx = |best: Option<(usize, &Candidate)>| best.map(|b| b.0).expect("nonempty");
    match (ctx.policy, true_path) {
        (FrontierPolicy::Oracle, Some(path)) if !path.is_empty() => {
            let key = |c: &Candidate| -> (f64, usize) {
                path.iter()
                    .enumerate()
                    .map(|(i, p)| (p.dist(c.frontier.centroid), i))
                    .min_by(|a, b| cmp_f(a.0, b.0).then(b.1.cmp(&a.1)))
                    .expect("nonempty path")
            };
            idx(cands.iter().enumerate().min_by(|a, b| {
                let (ka, kb) = (key(a.1), key(b.1));
                cmp_f(ka.0, kb.0).then(kb.1.cmp(&ka.1)).then(lex(a.1, b.1))
            }))
        }
        (FrontierPolicy::Random, _) => {
            let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
            rng.gen_range(0..cands.len())
        }
        // greedy, and the oracle when the target cannot be reached at all
        _ => idx(cands.iter().enumerate().min_by(|a, b| {
            let (sa, sb) = (token_score(a.1.frontier, ctx.prompt), token_score(b.1.frontier, ctx.prompt));
            sb.partial_cmp(&sa)
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(cmp_f(a.1.cost, b.1.cost))
                .then(lex(a.1, b.1))
        })),
    }
}

/// Ground-truth distance from the agent to an object, for the simulator's range check.
pub fn true_distance(scene: &Scene, pose: Pose, instance: u32) -> Option<f64> {
    interaction_distance(scene, pose.cell, crate::scene::ObjectId(instance))
}
