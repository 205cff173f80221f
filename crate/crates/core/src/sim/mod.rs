//! Agent embodiment: pose, discrete motion, rendering and interactions.

mod camera;
mod render;

pub use camera::Camera;
pub use render::{render_columns, render_observation, Observation};

use crate::config::Config;
use crate::geom::{Cell, Heading, Pose};
use crate::scene::{
    apply_effect, lattice_components, ActionPrimitive, LatticeComponents, ObjectId, PreconditionViolated, Scene,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MotionCommand {
    Forward,
    RotateLeft,
    RotateRight,
}

impl fmt::Display for MotionCommand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentState {
    pub pose: Pose,
    pub held_object: Option<ObjectId>,
    /// Meters translated so far.
    pub odometer: f64,
    pub low_level_action_count: usize,
}

#[derive(Debug, Clone, PartialEq, Error, Serialize, Deserialize)]
pub enum InteractionError {
    #[error("target at {distance:.2} m is out of range")]
    OutOfRange { distance: f64, too_close: bool },
    #[error("target is not visible")]
    NotVisible,
    #[error(transparent)]
    Precondition(#[from] PreconditionViolated),
}

/// One episode's simulator. Owns the evolving scene snapshot.
#[derive(Debug, Clone)]
pub struct Simulator {
    scene: Scene,
    state: AgentState,
    obs: Observation,
    config: Config,
}

/// Largest lattice component for the residue of `cell`, the region the agent can actually roam.
pub fn roaming_region(scene: &Scene, cell: Cell, stride: i32) -> LatticeComponents {
    lattice_components(scene, stride, (cell.row.rem_euclid(stride), cell.col.rem_euclid(stride)))
}

/// Samples a start pose: a free cell inside a room, on the main component of its motion lattice.
pub fn sample_start(scene: &Scene, seed: u64, stride: i32) -> Pose {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_0a6e_u64);
    let mut cache: Vec<Option<LatticeComponents>> = (0..stride * stride).map(|_| None).collect();
    loop {
        let cell = Cell::new(rng.gen_range(0..scene.height), rng.gen_range(0..scene.width));
        let heading = Heading::ALL[rng.gen_range(0..4)];
        if !scene.is_free(cell) || scene.room_of(cell).is_none() {
            continue;
        }
        let k = (cell.row.rem_euclid(stride) * stride + cell.col.rem_euclid(stride)) as usize;
        let lc = cache[k].get_or_insert_with(|| roaming_region(scene, cell, stride));
        if lc.label(cell).is_some() && lc.label(cell) == lc.main_label() {
            return Pose::new(cell, heading);
        }
    }
}

/// Distance in meters from the agent cell center to the nearest footprint cell center of `target`.
pub fn interaction_distance(scene: &Scene, from: Cell, target: ObjectId) -> Option<f64> {
    let o = scene.object(target)?;
    let fp = o.footprint();
    let r = from.row.clamp(fp.row0, fp.row1 - 1);
    let c = from.col.clamp(fp.col0, fp.col1 - 1);
    Some(from.dist(Cell::new(r, c)) * scene.cell_size)
}

impl Simulator {
    /// Places the agent on a seeded random start cell and renders the first frame.
    pub fn reset(scene: Scene, seed: u64, config: &Config) -> Self {
        let pose = sample_start(&scene, seed, config.step_cells());
        Self::with_pose(scene, pose, config)
    }

    pub fn with_pose(scene: Scene, pose: Pose, config: &Config) -> Self {
        let obs = render_observation(&scene, pose, config);
        let held_object = scene.held();
        Simulator {
            scene,
            state: AgentState { pose, held_object, odometer: 0.0, low_level_action_count: 0 },
            obs,
            config: config.clone(),
        }
    }

    pub fn scene(&self) -> &Scene {
        &self.scene
    }

    pub fn state(&self) -> &AgentState {
        &self.state
    }

    pub fn observation(&self) -> &Observation {
        &self.obs
    }

    pub fn config(&self) -> &Config {
        &self.config
    }

    /// Executes one motion command; returns `true` if a Forward was blocked.
    pub fn step_motion(&mut self, cmd: MotionCommand) -> bool {
        self.state.low_level_action_count += 1;
        let pose = &mut self.state.pose;
        let mut blocked = false;
        match cmd {
            MotionCommand::RotateLeft => pose.heading = pose.heading.left(),
            MotionCommand::RotateRight => pose.heading = pose.heading.right(),
            MotionCommand::Forward => {
                let (dr, dc) = pose.heading.step();
                let n = self.config.step_cells();
                if (1..=n).all(|k| self.scene.is_free(pose.cell.offset(dr * k, dc * k))) {
                    pose.cell = pose.cell.offset(dr * n, dc * n);
                    self.state.odometer += self.config.step_size;
                } else {
                    blocked = true;
                }
            }
        }
        if !blocked {
            self.obs = render_observation(&self.scene, self.state.pose, &self.config);
        }
        blocked
    }

    /// Attempts an interaction with a visible target within range.
    pub fn interact(&mut self, primitive: ActionPrimitive, target: ObjectId) -> Result<(), InteractionError> {
        self.state.low_level_action_count += 1;
        if !self.obs.contains_instance(target.0) {
            return Err(InteractionError::NotVisible);
        }
        let distance = interaction_distance(&self.scene, self.state.pose.cell, target).ok_or(InteractionError::NotVisible)?;
        let too_close = distance <= self.config.min_interaction_range;
        if too_close || distance > self.config.interaction_range + 1e-9 {
            return Err(InteractionError::OutOfRange { distance, too_close });
        }
        self.scene = apply_effect(&self.scene, primitive, target, self.state.held_object)?;
        self.state.held_object = self.scene.held();
        self.obs = render_observation(&self.scene, self.state.pose, &self.config);
        Ok(())
    }
}
