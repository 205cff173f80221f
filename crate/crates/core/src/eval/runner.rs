//! The inference loop: look around, then alternate planner steps and controller
//! commands while the map is refreshed after every action.

use super::trace::{replay_frames, EndReason, FrontierRef, LowLevel, Outcome, StepError, TraceError, TraceRecord};
use super::{classify_failure, EpisodeResult};
use crate::attention::{build_prompts, relevance, PromptTriplet};
use crate::config::Config;
use crate::controller::{
    can_interact, decide, facing, path_to_commands, pick_instance, turns, ControlError, DecideContext, Decision,
    FrontierPolicy, NavGoal, SearchParams,
};
use crate::featmap::{extract_frontiers, pixel_features, project, EmbeddingTable, FeatureMap, Frontier, FrontierParams, PixelFeatures};
use crate::geom::{Cell, Pose};
use crate::planner::{MapSummary, PlanStep, Planner, SummaryObject};
use crate::scene::{ActionPrimitive, Category, ObjectId, Scene};
use crate::sim::{InteractionError, MotionCommand, Observation, Simulator};
use crate::tasks::TaskSpec;
use std::collections::{BTreeMap, HashMap, HashSet};
use std::sync::Arc;

/// Everything an episode produced.
#[derive(Debug, Clone)]
pub struct EpisodeOutput {
    pub result: EpisodeResult,
    pub trace: Vec<TraceRecord>,
    pub final_scene: Scene,
    pub map: FeatureMap,
}

struct BudgetSpent;

enum NavResult {
    Arrived,
    Replan,
}

struct Episode<'a> {
    config: &'a Config,
    sim: Simulator,
    map: FeatureMap,
    table: Arc<EmbeddingTable>,
    prompts: PromptTriplet,
    trace: Vec<TraceRecord>,
    search: SearchParams,
    residue: (i32, i32),
    policy: FrontierPolicy,
    run_seed: u64,
    decisions: u64,
    /// Frontier anchors already visited or found unreachable.
    spent_frontiers: Vec<Cell>,
    focus: BTreeMap<Category, u32>,
    /// Standing cells that failed to see or reach each target category.
    bad_cells: HashMap<Category, HashSet<Cell>>,
    commitment: Option<Cell>,
}

impl<'a> Episode<'a> {
    fn new(scene: Scene, config: &'a Config, policy: FrontierPolicy, run_seed: u64) -> Self {
        let sim = Simulator::reset(scene, run_seed, config);
        let scene = sim.scene();
        let map = FeatureMap::new(scene.width, scene.height, config.feature_dim, config.cell_size);
        let table = EmbeddingTable::shared(config.feature_dim);
        let prompts = build_prompts(&[], &table);
        let stride = config.step_cells();
        let cell = sim.state().pose.cell;
        Episode {
            config,
            search: SearchParams::new(stride, config.unknown_cost),
            residue: (cell.row.rem_euclid(stride), cell.col.rem_euclid(stride)),
            sim,
            map,
            table,
            prompts,
            trace: Vec::new(),
            policy,
            run_seed,
            decisions: 0,
            spent_frontiers: Vec::new(),
            focus: BTreeMap::new(),
            bad_cells: HashMap::new(),
            commitment: None,
        }
    }

    fn pose(&self) -> Pose {
        self.sim.state().pose
    }

    /// Fuses the current observation into the map; returns (ŵ, w).
    fn integrate(&mut self) -> (f64, f64) {
        let obs = self.sim.observation();
        let feats = pixel_features(obs, &self.table, self.config.fusion_temperature);
        let w_raw = relevance(&feats.global, &self.prompts, self.config.softmax_temperature);
        let w = fuse(&mut self.map, obs, &feats, self.config, w_raw);
        (w_raw, w)
    }

    fn record(&mut self, cmd: LowLevel, target: Option<u32>, outcome: Outcome) {
        let (w_raw, w) = if outcome == Outcome::Ok {
            let (a, b) = self.integrate();
            (Some(a), Some(b))
        } else {
            (None, None)
        };
        let st = self.sim.state();
        self.trace.push(TraceRecord::Action {
            t: st.low_level_action_count,
            cmd,
            target,
            pose: st.pose,
            outcome,
            odometer: st.odometer,
            w_raw,
            w,
        });
    }

    fn budget_left(&self) -> bool {
        self.sim.state().low_level_action_count < self.config.max_ll_actions
    }

    fn motion(&mut self, cmd: MotionCommand) -> Result<bool, BudgetSpent> {
        if !self.budget_left() {
            return Err(BudgetSpent);
        }
        let blocked = self.sim.step_motion(cmd);
        self.record(LowLevel::Motion(cmd), None, if blocked { Outcome::Blocked } else { Outcome::Ok });
        Ok(blocked)
    }

    fn look_around(&mut self) -> Result<(), BudgetSpent> {
        for _ in 0..4 {
            self.motion(MotionCommand::RotateLeft)?;
        }
        Ok(())
    }

    fn frontiers(&self) -> Vec<Frontier> {
        extract_frontiers(&self.map, FrontierParams::from_config(self.config))
    }

    fn summary(&self, frontiers: &[Frontier]) -> MapSummary {
        let scene = self.sim.scene();
        let discovered = self
            .map
            .objects()
            .values()
            .map(|o| {
                let truth = scene.object(ObjectId(o.instance));
                let a = o.category.affordances();
                SummaryObject {
                    category: o.category,
                    instance: o.instance,
                    cell: o.location(),
                    open: truth.filter(|_| a.openable).map(|t| t.state.is_open),
                    on: truth.filter(|_| a.toggleable).map(|t| t.state.is_on),
                }
            })
            .collect();
        let live: Vec<Cell> =
            frontiers.iter().filter(|f| !self.spent(f)).map(|f| f.centroid).collect();
        MapSummary {
            discovered,
            explored_fraction: self.map.explored_fraction(),
            frontier_count: live.len(),
            frontiers: live,
        }
    }

    fn spent(&self, f: &Frontier) -> bool {
        let (anchor, _) = crate::controller::frontier_goals(&self.map, f, self.search.stride, self.residue);
        self.spent_frontiers.iter().any(|e| e.chebyshev(anchor) <= self.search.stride)
    }

    fn target_hidden(&self, c: Category) -> bool {
        let scene = self.sim.scene();
        let mut any = false;
        for o in scene.instances_of(c) {
            if scene.is_rendered(o.id) {
                return false;
            }
            any |= scene.hidden_by(o.id).is_some();
        }
        any
    }

    fn discovered(&self, c: Category) -> bool {
        self.map.instances_of(c).next().is_some()
    }

    fn decide(
        &mut self,
        step: &PlanStep,
        frontiers: &[Frontier],
        excluded_cells: &HashSet<Cell>,
        excluded_instances: &HashSet<u32>,
    ) -> Result<Decision, ControlError> {
        let target = step.target().ok_or(ControlError::NoTarget)?;
        self.decisions += 1;
        let ctx = DecideContext {
            pose: self.pose(),
            held: self.sim.state().held_object.map(|h| h.0),
            observation: self.sim.observation(),
            config: self.config,
            policy: self.policy,
            search: &self.search,
            residue: self.residue,
            prompt: &self.prompts.positive,
            truth: (self.policy == FrontierPolicy::Oracle).then(|| self.sim.scene()),
            excluded_frontiers: &self.spent_frontiers,
            excluded_cells,
            excluded_instances,
            focus: self.focus.get(&target).copied(),
            commitment: self.commitment,
            seed: self.run_seed ^ self.decisions.wrapping_mul(0x9e37_79b9_7f4a_7c15),
        };
        let d = decide(step, frontiers, &self.map, &ctx);
        self.commitment = match &d {
            Ok(Decision { goal: Some(NavGoal::Frontier { anchor, .. }), .. }) => Some(*anchor),
            _ => None,
        };
        d
    }

    /// Follows a planned path for at most `replan_interval` motions.
    fn follow(&mut self, path: &[Cell]) -> Result<NavResult, BudgetSpent> {
        let cmds = path_to_commands(path, self.pose().heading);
        for (k, cmd) in cmds.into_iter().enumerate() {
            if k >= self.config.replan_interval {
                return Ok(NavResult::Replan);
            }
            let before = self.pose();
            if self.motion(cmd)? {
                let (dr, dc) = before.heading.step();
                let s = self.search.stride;
                self.search.blocked.insert((before.cell, before.cell.offset(dr * s, dc * s)));
                return Ok(NavResult::Replan);
            }
        }
        Ok(NavResult::Arrived)
    }

    fn face(&mut self, cells: &[Cell]) -> Result<(), BudgetSpent> {
        let h = facing(self.pose().cell, cells);
        for cmd in turns(self.pose().heading, h) {
            self.motion(cmd)?;
        }
        Ok(())
    }

    /// Runs controller commands until the step's postcondition holds.
    fn execute(&mut self, hl: usize, step: &PlanStep) -> Result<(), StepError> {
        let target = step.target().ok_or(StepError::NoTarget)?;
        self.prompts = build_prompts(&step.demanded_objects, &self.table);
        self.commitment = None;
        let mut excluded_cells = self.bad_cells.get(&target).cloned().unwrap_or_default();
        let excluded_instances = HashSet::new();
        let spent = |ep: &Self| StepError::ActionBudget { target, discovered: ep.discovered(target) };
        for _ in 0..self.config.max_commands_per_step {
            if !self.budget_left() {
                return Err(spent(self));
            }
            if step.primitive_hint.is_none() {
                let done = {
                    let ctx_focus = self.focus.get(&target).copied();
                    let held = self.sim.state().held_object.map(|h| h.0);
                    let obs = self.sim.observation();
                    let ctx = DecideContext {
                        pose: self.pose(),
                        held,
                        observation: obs,
                        config: self.config,
                        policy: self.policy,
                        search: &self.search,
                        residue: self.residue,
                        prompt: &self.prompts.positive,
                        truth: None,
                        excluded_frontiers: &[],
                        excluded_cells: &excluded_cells,
                        excluded_instances: &excluded_instances,
                        focus: ctx_focus,
                        commitment: None,
                        seed: 0,
                    };
                    let mut found = None;
                    if let Some(o) = pick_instance(&self.map, &ctx, target) {
                        if can_interact(&ctx, o) {
                            found = Some(o.instance);
                        }
                    }
                    if found.is_none() {
                        found = self
                            .map
                            .instances_of(target)
                            .filter(|o| Some(o.instance) != held && !excluded_instances.contains(&o.instance))
                            .find(|o| can_interact(&ctx, o))
                            .map(|o| o.instance);
                    }
                    found
                };
                if let Some(inst) = done {
                    self.focus.insert(target, inst);
                    return Ok(());
                }
            }
            let frontiers = self.frontiers();
            let decision = match self.decide(step, &frontiers, &excluded_cells, &excluded_instances) {
                Ok(d) => d,
                Err(ControlError::ExplorationExhausted) => {
                    return Err(StepError::Exhausted { target, closed_space: self.target_hidden(target) })
                }
                Err(ControlError::NoApproach) => return Err(StepError::NoApproach { target }),
                Err(ControlError::NoTarget) => return Err(StepError::NoTarget),
            };
            self.spent_frontiers.extend(decision.unreachable.iter().copied());
            self.trace.push(TraceRecord::Decide {
                hl,
                step: step.index,
                command: decision.command.clone(),
                goal: decision.goal.clone(),
                frontiers: frontiers
                    .iter()
                    .map(|f| FrontierRef { id: f.id, centroid: f.centroid, area: f.area, token_cells: f.token_cells.clone() })
                    .collect(),
            });
            if let Some(p) = decision.command.primitive.interaction() {
                let inst = decision.command.target_object.expect("interactions carry a target").instance;
                return self.interact(p, inst, target);
            }
            let arrived = match self.follow(&decision.path) {
                Ok(NavResult::Arrived) => true,
                Ok(NavResult::Replan) => false,
                Err(BudgetSpent) => return Err(spent(self)),
            };
            if !arrived {
                continue;
            }
            let here = self.pose().cell;
            let r = match decision.goal {
                Some(NavGoal::Frontier { anchor, .. }) => {
                    self.spent_frontiers.push(anchor);
                    self.commitment = None;
                    self.look_around()
                }
                Some(NavGoal::Approach { instance }) | Some(NavGoal::Truth { instance }) => {
                    let cells = match self.map.object(instance) {
                        Some(o) => o.cells.clone(),
                        None => self
                            .sim
                            .scene()
                            .object(ObjectId(instance))
                            .map(|o| o.footprint().cells().collect())
                            .unwrap_or_default(),
                    };
                    let r = if cells.is_empty() { Ok(()) } else { self.face(&cells) };
                    if !self.sim.observation().contains_instance(instance) {
                        excluded_cells.insert(here);
                        self.bad_cells.entry(target).or_default().insert(here);
                    }
                    r
                }
                None => Ok(()),
            };
            if r.is_err() {
                return Err(spent(self));
            }
        }
        Err(StepError::CommandCap { target, discovered: self.discovered(target) })
    }

    fn interact(&mut self, p: ActionPrimitive, inst: u32, target: Category) -> Result<(), StepError> {
        if !self.budget_left() {
            return Err(StepError::ActionBudget { target, discovered: true });
        }
        match self.sim.interact(p, ObjectId(inst)) {
            Ok(()) => {
                self.record(LowLevel::Interact(p), Some(inst), Outcome::Ok);
                if p == ActionPrimitive::PickUp {
                    self.map.forget_object(inst);
                }
                self.focus.insert(target, inst);
                Ok(())
            }
            Err(e) => {
                if matches!(e, InteractionError::OutOfRange { .. } | InteractionError::NotVisible) {
                    let here = self.pose().cell;
                    self.bad_cells.entry(target).or_default().insert(here);
                }
                self.record(LowLevel::Interact(p), Some(inst), Outcome::Failed(e.clone()));
                Err(StepError::Interaction { target, failure: e })
            }
        }
    }
}

fn fuse(map: &mut FeatureMap, obs: &Observation, feats: &PixelFeatures, config: &Config, w_raw: f64) -> f64 {
    let frame = project(obs, feats, config, (map.width, map.height));
    map.update(&frame, w_raw).expect("relevance lies in [0, 1]")
}

/// Rebuilds the agent's final map from a trace by re-fusing every frame with its logged score.
pub fn rebuild_map(scene: &Scene, records: &[TraceRecord]) -> Result<FeatureMap, TraceError> {
    let Some(TraceRecord::Header { config, initial_w_raw, .. }) = records.iter().find(|r| matches!(r, TraceRecord::Header { .. }))
    else {
        return Err(TraceError::NoHeader);
    };
    let table = EmbeddingTable::shared(config.feature_dim);
    let mut map = FeatureMap::new(scene.width, scene.height, config.feature_dim, config.cell_size);
    replay_frames(scene, records, |sim, r| {
        let w_raw = match r {
            None => Some(*initial_w_raw),
            Some(TraceRecord::Action { w_raw, .. }) => *w_raw,
            Some(_) => None,
        };
        if let Some(w_raw) = w_raw {
            let obs = sim.observation();
            let feats = pixel_features(obs, &table, config.fusion_temperature);
            fuse(&mut map, obs, &feats, config, w_raw);
        }
        if let Some(TraceRecord::Action { cmd: LowLevel::Interact(ActionPrimitive::PickUp), target: Some(id), outcome: Outcome::Ok, .. }) = r {
            map.forget_object(*id);
        }
    })?;
    Ok(map)
}

/// Runs one task to completion or failure.
pub fn run_episode(
    scene: &Scene,
    task: &TaskSpec,
    planner: &mut dyn Planner,
    policy: FrontierPolicy,
    config: &Config,
    run_seed: u64,
) -> EpisodeOutput {
    let mut ep = Episode::new(scene.clone(), config, policy, run_seed);
    let (initial_w_raw, _) = ep.integrate();
    ep.trace.push(TraceRecord::Header {
        task_id: task.id.clone(),
        instruction: task.instruction.clone(),
        scene_seed: task.scene_seed,
        scene_size: task.scene_size,
        planner: planner.name(),
        controller: policy.to_string(),
        run_seed,
        start: ep.pose(),
        config: config.clone(),
        initial_w_raw,
    });
    let mut reason = EndReason::PlanCap;
    if ep.look_around().is_err() {
        reason = EndReason::ActionBudget;
    }
    let mut done: Vec<PlanStep> = Vec::new();
    let mut retries = 0;
    let mut hl = 0;
    while reason == EndReason::PlanCap && hl < config.max_hl_steps {
        hl += 1;
        let frontiers = ep.frontiers();
        let summary = ep.summary(&frontiers);
        let step = match planner.next_step(&task.instruction, &done, &summary) {
            Ok(s) => s,
            Err(e) => {
                ep.trace.push(TraceRecord::PlannerFailure { hl, message: e.to_string() });
                reason = EndReason::PlannerError;
                break;
            }
        };
        ep.trace.push(TraceRecord::Plan { hl, step: step.clone(), summary });
        if step.terminal {
            reason = EndReason::Terminal;
            break;
        }
        match ep.execute(hl, &step) {
            Ok(()) => {
                ep.trace.push(TraceRecord::StepResult { hl, step: step.index, ok: true, error: None });
                done.push(step);
                retries = 0;
            }
            Err(e) => {
                let budget = matches!(e, StepError::ActionBudget { .. });
                ep.trace.push(TraceRecord::StepResult { hl, step: step.index, ok: false, error: Some(e) });
                retries += 1;
                if budget {
                    reason = EndReason::ActionBudget;
                } else if retries > config.max_step_retries {
                    reason = EndReason::StepFailed;
                }
            }
        }
    }
    let final_scene = ep.sim.scene().clone();
    let goal_met = task.goal.satisfied_count(&final_scene);
    let goal_total = task.goal.len();
    let st = ep.sim.state().clone();
    let success = goal_met == goal_total;
    ep.trace.push(TraceRecord::End {
        reason,
        success,
        goal_met,
        goal_total,
        hl_steps: hl,
        ll_actions: st.low_level_action_count,
        odometer: st.odometer,
        scene_hash: super::trace::scene_hash(&final_scene),
    });
    let (failure_class, sub_tag) = if success { (super::FailureClass::None, None) } else { classify_failure(&ep.trace) };
    let result = EpisodeResult {
        task_id: task.id.clone(),
        category: task.category,
        success,
        goal_conditions_met: goal_met,
        goal_conditions_total: goal_total,
        agent_path_m: st.odometer,
        expert_path_m: task.expert_path_m,
        hl_steps: hl,
        ll_actions: st.low_level_action_count,
        expert_actions: task.expert_actions,
        failure_class,
        sub_tag,
        trace_path: None,
    };
    EpisodeOutput { result, trace: ep.trace, final_scene, map: ep.map }
}
