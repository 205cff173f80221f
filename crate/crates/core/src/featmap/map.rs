use super::project::FrameContribution;
use crate::geom::Cell;
use crate::scene::Category;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[repr(u8)]
pub enum Occupancy {
    Unknown = 0,
    Free = 1,
    Obstacle = 2,
}

#[derive(Debug, Clone, Copy, PartialEq, Error)]
#[error("attention weight {0} is outside [0, 1]")]
pub struct InvalidWeight(pub f64);

/// An object instance seen at least once this episode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscoveredObject {
    pub instance: u32,
    pub category: Category,
    /// Cells where it was seen in its most recent sighting.
    pub cells: Vec<Cell>,
    /// Highest point observed in the most recent sighting, meters.
    pub top: f64,
    pub first_seen: usize,
    pub last_seen: usize,
}

impl DiscoveredObject {
    /// Rounded mean of the observed cells.
    pub fn location(&self) -> Cell {
        let n = self.cells.len().max(1) as f64;
        let r: f64 = self.cells.iter().map(|c| c.row as f64).sum::<f64>() / n;
        let c: f64 = self.cells.iter().map(|c| c.col as f64).sum::<f64>() / n;
        Cell::new(r.round() as i32, c.round() as i32)
    }
}

/// Online top-down semantic feature map.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMap {
    pub width: i32,
    pub height: i32,
    pub dim: usize,
    pub cell_size: f64,
    features: Vec<f32>,
    hit_count: Vec<u32>,
    occupancy: Vec<Occupancy>,
    /// Blend weight most recently applied at each cell, for visualization.
    last_weight: Vec<f32>,
    weight_history: Vec<f64>,
    running_mean: f64,
    objects: BTreeMap<u32, DiscoveredObject>,
}

impl FeatureMap {
    pub fn new(width: i32, height: i32, dim: usize, cell_size: f64) -> Self {
        let n = (width * height) as usize;
        FeatureMap {
            width,
            height,
            dim,
            cell_size,
            features: vec![0.0; n * dim],
            hit_count: vec![0; n],
            occupancy: vec![Occupancy::Unknown; n],
            last_weight: vec![0.0; n],
            weight_history: Vec::new(),
            running_mean: 0.0,
            objects: BTreeMap::new(),
        }
    }

    pub fn in_bounds(&self, c: Cell) -> bool {
        c.row >= 0 && c.col >= 0 && c.row < self.height && c.col < self.width
    }

    pub fn index(&self, c: Cell) -> usize {
        (c.row * self.width + c.col) as usize
    }

    pub fn cell_at(&self, i: usize) -> Cell {
        Cell::new(i as i32 / self.width, i as i32 % self.width)
    }

    pub fn feature(&self, c: Cell) -> &[f32] {
        let i = self.index(c);
        &self.features[i * self.dim..(i + 1) * self.dim]
    }

    pub fn features_raw(&self) -> &[f32] {
        &self.features
    }

    pub fn hit_count(&self, c: Cell) -> u32 {
        self.hit_count[self.index(c)]
    }

    pub fn is_explored(&self, c: Cell) -> bool {
        self.in_bounds(c) && self.hit_count[self.index(c)] > 0
    }

    /// Out-of-bounds cells read as obstacles.
    pub fn occupancy(&self, c: Cell) -> Occupancy {
        if self.in_bounds(c) {
            self.occupancy[self.index(c)]
        } else {
            Occupancy::Obstacle
        }
    }

    pub fn occupancy_raw(&self) -> &[Occupancy] {
        &self.occupancy
    }

    pub fn last_weight(&self, c: Cell) -> f32 {
        self.last_weight[self.index(c)]
    }

    pub fn weight_history(&self) -> &[f64] {
        &self.weight_history
    }

    /// Number of updates performed.
    pub fn timestep(&self) -> usize {
        self.weight_history.len()
    }

    pub fn objects(&self) -> &BTreeMap<u32, DiscoveredObject> {
        &self.objects
    }

    pub fn object(&self, instance: u32) -> Option<&DiscoveredObject> {
        self.objects.get(&instance)
    }

    /// Drops an instance the agent knows has left its last seen place, e.g. when picked up.
    pub fn forget_object(&mut self, instance: u32) {
        self.objects.remove(&instance);
    }

    /// Discovered instances of a category, in instance order.
    pub fn instances_of(&self, category: Category) -> impl Iterator<Item = &DiscoveredObject> {
        self.objects.values().filter(move |o| o.category == category)
    }

    /// Known (free or obstacle) fraction of the map.
    pub fn explored_fraction(&self) -> f64 {
        let known = self.occupancy.iter().filter(|&&o| o != Occupancy::Unknown).count();
        known as f64 / self.occupancy.len().max(1) as f64
    }

    /// Marks a cell as an obstacle, e.g. after a blocked move.
    pub fn mark_obstacle(&mut self, c: Cell) {
        if self.in_bounds(c) {
            let i = self.index(c);
            self.occupancy[i] = Occupancy::Obstacle;
        }
    }

    /// Normalized weight for a new raw score: the score over the running mean of all
    /// scores so far (including this one), clamped to `[0, 1]`.
    pub fn normalized_weight(&self, w_raw: f64) -> f64 {
        let i = self.weight_history.len() as f64 + 1.0;
        let mean = self.running_mean + (w_raw - self.running_mean) / i;
        if mean > 0.0 {
            (w_raw / mean).clamp(0.0, 1.0)
        } else {
            0.0
        }
    }

    /// Blends a frame into the map and returns the applied weight.
    ///
    /// Only cells with hits change their feature: `S = (1 - w) S + w F / hits`.
    pub fn update(&mut self, frame: &FrameContribution, w_raw: f64) -> Result<f64, InvalidWeight> {
        if !(0.0..=1.0).contains(&w_raw) || w_raw.is_nan() {
            return Err(InvalidWeight(w_raw));
        }
        let w = self.normalized_weight(w_raw);
        self.weight_history.push(w_raw);
        let i = self.weight_history.len() as f64;
        self.running_mean += (w_raw - self.running_mean) / i;
        let t = self.weight_history.len();

        let wf = w as f32;
        let dim = self.dim;
        for (k, &cell) in frame.cells.iter().enumerate() {
            if !self.in_bounds(cell) {
                continue;
            }
            let idx = self.index(cell);
            let n = frame.hits[k] as f32;
            let s = &mut self.features[idx * dim..(idx + 1) * dim];
            for (sv, fv) in s.iter_mut().zip(frame.feature(k)) {
                *sv = (1.0 - wf) * *sv + wf * (fv / n);
            }
            self.hit_count[idx] += frame.hits[k];
            self.last_weight[idx] = wf;
        }
        for &c in &frame.free {
            if self.in_bounds(c) {
                let idx = self.index(c);
                if self.occupancy[idx] == Occupancy::Unknown {
                    self.occupancy[idx] = Occupancy::Free;
                }
            }
        }
        for &c in &frame.obstacle {
            self.mark_obstacle(c);
        }
        for s in &frame.sightings {
            let e = self.objects.entry(s.instance).or_insert(DiscoveredObject {
                instance: s.instance,
                category: s.category,
                cells: Vec::new(),
                top: s.top,
                first_seen: t,
                last_seen: t,
            });
            e.cells = s.cells.clone();
            e.top = s.top;
            e.last_seen = t;
        }
        Ok(w)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn frame(cells: &[(Cell, Vec<f32>, u32)]) -> FrameContribution {
        FrameContribution {
            dim: 2,
            cells: cells.iter().map(|c| c.0).collect(),
            features: cells.iter().flat_map(|c| c.1.clone()).collect(),
            hits: cells.iter().map(|c| c.2).collect(),
            obstacle: cells.iter().map(|c| c.0).collect(),
            ..Default::default()
        }
    }

    #[test]
    fn constant_history_gives_full_weight() {
        let mut m = FeatureMap::new(4, 4, 2, 0.05);
        let f = frame(&[(Cell::new(1, 1), vec![2.0, 0.0], 2)]);
        for _ in 0..3 {
            assert_eq!(m.update(&f, 0.5).unwrap(), 1.0);
        }
        assert_eq!(m.feature(Cell::new(1, 1)), &[1.0, 0.0]);
        for c in [0.1, 0.3, 0.7, 1.0 / 3.0] {
            let mut m = FeatureMap::new(4, 4, 2, 0.05);
            for _ in 0..50 {
                assert_eq!(m.update(&f, c).unwrap(), 1.0);
            }
        }
    }

    #[test]
    fn rising_score_is_clamped() {
        let mut m = FeatureMap::new(4, 4, 2, 0.05);
        let f = frame(&[(Cell::new(0, 0), vec![1.0, 1.0], 1)]);
        m.update(&f, 0.2).unwrap();
        // raw 0.8 / mean 0.5 = 1.6
        assert_eq!(m.normalized_weight(0.8), 1.0);
        assert_eq!(m.update(&f, 0.8).unwrap(), 1.0);
        assert_eq!(m.weight_history(), &[0.2, 0.8]);
    }

    #[test]
    fn empty_contribution_leaves_map_alone() {
        let mut m = FeatureMap::new(4, 4, 2, 0.05);
        m.update(&frame(&[(Cell::new(2, 2), vec![0.0, 1.0], 1)]), 0.4).unwrap();
        let before = m.clone();
        m.update(&FrameContribution { dim: 2, ..Default::default() }, 0.3).unwrap();
        assert_eq!(m.features_raw(), before.features_raw());
        assert_eq!(m.occupancy_raw(), before.occupancy_raw());
    }

    #[test]
    fn invalid_weights_are_rejected() {
        let mut m = FeatureMap::new(2, 2, 2, 0.05);
        let f = FrameContribution { dim: 2, ..Default::default() };
        assert!(m.update(&f, 1.5).is_err());
        assert!(m.update(&f, -0.1).is_err());
        assert!(m.update(&f, f64::NAN).is_err());
        assert_eq!(m.timestep(), 0);
    }
}
