//! Symbolic plan execution with an omniscient navigator.

use super::recipe::{Knowledge, StepDraft};
use crate::config::Config;
use crate::controller::{approach_cells, sees, TrueOccupancy};
use crate::geom::Cell;
use crate::scene::{apply_effect, goal_satisfied, lattice_components, GoalCondition, LatticeComponents, ObjectId, ObjectState, Scene};
use crate::scene::{ActionPrimitive, Category};
use std::collections::{BTreeMap, HashMap};

/// Scratch copy of a scene with a category-to-instance binding.
pub struct SymbolicRun<'r, 'c> {
    pub scene: Scene,
    pub held: Option<ObjectId>,
    focus: BTreeMap<Category, ObjectId>,
    reach: Option<&'r mut Reachability<'c>>,
}

/// Which instances can be approached from the main lattice component for every start residue.
pub struct Reachability<'c> {
    config: &'c Config,
    components: Vec<LatticeComponents>,
    cache: HashMap<(ObjectId, Cell, i64), bool>,
}

impl<'c> Reachability<'c> {
    pub fn new(scene: &Scene, config: &'c Config) -> Self {
        let s = config.step_cells();
        let components = (0..s * s).map(|k| lattice_components(scene, s, (k / s, k % s))).collect();
        Reachability { config, components, cache: HashMap::new() }
    }

    /// True when a reachable standing cell exists for every residue.
    pub fn approachable(&mut self, scene: &Scene, id: ObjectId) -> bool {
        let Some(o) = scene.object(id) else { return false };
        let top = scene.base_height(id) + o.category.info().height;
        let key = (id, o.pose.cell, (top * 1000.0).round() as i64);
        if let Some(&v) = self.cache.get(&key) {
            return v;
        }
        let cells: Vec<Cell> = o.footprint().cells().collect();
        let grid = TrueOccupancy(scene);
        let s = self.config.step_cells();
        let ok = self.components.iter().enumerate().all(|(k, lc)| {
            let residue = (k as i32 / s, k as i32 % s);
            let main = lc.main_label();
            approach_cells(&grid, &cells, top, s, residue, self.config).iter().any(|&c| lc.label(c).is_some() && lc.label(c) == main && sees(scene, c, id, self.config))
        });
        self.cache.insert(key, ok);
        ok
    }
}

impl<'r, 'c> SymbolicRun<'r, 'c> {
    pub fn new(scene: &Scene, reach: Option<&'r mut Reachability<'c>>) -> Self {
        SymbolicRun { scene: scene.clone(), held: scene.held(), focus: BTreeMap::new(), reach }
    }

    /// Instances of `c` the agent could see, lowest id first.
    fn visible(&self, c: Category) -> Vec<ObjectId> {
        self.scene.instances_of(c).filter(|o| self.scene.is_rendered(o.id)).map(|o| o.id).collect()
    }

    fn approachable(&mut self, id: ObjectId) -> bool {
        match self.reach.as_mut() {
            Some(r) => r.approachable(&self.scene, id),
            None => true,
        }
    }

    /// Executes one step; the error names the first violated condition.
    pub fn step(&mut self, d: &StepDraft) -> Result<(), String> {
        let c = *d.objects.first().ok_or("step demands no object")?;
        let ids = self.visible(c);
        if ids.is_empty() {
            return Err(format!("no visible {c}"));
        }
        for &id in &ids {
            if !self.approachable(id) {
                return Err(format!("{c} {} cannot be approached", id.0));
            }
        }
        let Some(p) = d.primitive else {
            let id = self.focus.get(&c).copied().filter(|id| ids.contains(id)).unwrap_or(ids[0]);
            self.focus.insert(c, id);
            return Ok(());
        };
        // any visible instance must work, since the agent acts on whichever it found
        let mut next = None;
        for &id in &ids {
            let r = apply_effect(&self.scene, p, id, self.held).map_err(|e| e.to_string())?;
            if next.is_none() || self.focus.get(&c) == Some(&id) {
                next = Some((id, r));
            }
        }
        let (id, scene) = next.expect("nonempty");
        self.scene = scene;
        self.focus.insert(c, id);
        match p {
            ActionPrimitive::PickUp => self.held = Some(id),
            ActionPrimitive::Place => self.held = None,
            _ => {}
        }
        Ok(())
    }

    pub fn satisfied(&self, goal: &GoalCondition) -> bool {
        goal_satisfied(&self.scene, goal)
    }
}

impl Knowledge for SymbolicRun<'_, '_> {
    fn hidden_in(&self, c: Category) -> Option<Category> {
        if !self.visible(c).is_empty() {
            return None;
        }
        self.scene.instances_of(c).find_map(|o| self.scene.hidden_by(o.id)).and_then(|b| self.scene.object(b)).map(|b| b.category)
    }

    fn state(&self, c: Category) -> Option<ObjectState> {
        let id = self.focus.get(&c).copied().or_else(|| self.visible(c).first().copied())?;
        self.scene.object(id).map(|o| o.state)
    }
}
