use super::pixel::PixelFeatures;
use crate::config::Config;
use crate::geom::Cell;
use crate::scene::Category;
use crate::sim::{Camera, Observation};
use std::collections::HashMap;

/// Sparse top-down contribution of one frame.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FrameContribution {
    pub dim: usize,
    /// Cells with at least one pixel, sorted.
    pub cells: Vec<Cell>,
    /// Summed pixel features, `dim` floats per entry of `cells`.
    pub features: Vec<f32>,
    /// Pixel counts per entry of `cells`.
    pub hits: Vec<u32>,
    /// Cells seen to be free this frame, sorted.
    pub free: Vec<Cell>,
    /// Cells where a surface was hit, sorted.
    pub obstacle: Vec<Cell>,
    /// Objects seen this frame, sorted by instance.
    pub sightings: Vec<Sighting>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sighting {
    pub instance: u32,
    pub category: Category,
    /// Cells its pixels project to, sorted.
    pub cells: Vec<Cell>,
    /// Highest observed point above the floor, meters.
    pub top: f64,
}

impl FrameContribution {
    pub fn is_empty(&self) -> bool {
        self.cells.is_empty() && self.free.is_empty()
    }

    pub fn feature(&self, k: usize) -> &[f32] {
        &self.features[k * self.dim..(k + 1) * self.dim]
    }
}

/// Map cell of a pixel with finite depth.
pub fn pixel_cell(cam: &Camera, x: usize, depth: f64) -> Cell {
    let (r, c) = cam.unproject(x, depth);
    Cell::new(r.floor() as i32, c.floor() as i32)
}

/// Unprojects every hit pixel to its map cell and sums features per cell, then carves
/// free space between adjacent pixel columns up to their nearest hit.
pub fn project(obs: &Observation, feats: &PixelFeatures, config: &Config, map_size: (i32, i32)) -> FrameContribution {
    let (map_w, map_h) = map_size;
    let in_map = |c: Cell| c.row >= 0 && c.col >= 0 && c.row < map_h && c.col < map_w;
    let cam = Camera::new(obs.pose, config);
    let dim = feats.dim;

    let mut slot_of: HashMap<Cell, usize> = HashMap::new();
    let mut cells: Vec<Cell> = Vec::new();
    let mut sums: Vec<f32> = Vec::new();
    let mut hits: Vec<u32> = Vec::new();
    let mut seen: HashMap<u32, (u16, Vec<Cell>, f64)> = HashMap::new();
    for y in 0..obs.height {
        for x in 0..obs.width {
            let i = obs.index(x, y);
            if obs.instance[i] == 0 {
                continue;
            }
            let cell = pixel_cell(&cam, x, obs.depth[i]);
            if !in_map(cell) {
                continue;
            }
            let k = *slot_of.entry(cell).or_insert_with(|| {
                cells.push(cell);
                sums.extend(std::iter::repeat_n(0.0, dim));
                hits.push(0);
                cells.len() - 1
            });
            for (s, f) in sums[k * dim..(k + 1) * dim].iter_mut().zip(feats.pixel(i)) {
                *s += f;
            }
            hits[k] += 1;
            if obs.instance[i] != crate::scene::WALL_INSTANCE {
                let z = cam.camera_height + obs.depth[i] * cam.row_tangent(y);
                let e = seen.entry(obs.instance[i]).or_insert((obs.category[i], Vec::new(), f64::MIN));
                e.1.push(cell);
                e.2 = e.2.max(z);
            }
        }
    }

    let mut order: Vec<usize> = (0..cells.len()).collect();
    order.sort_by_key(|&k| cells[k]);
    let mut contribution = FrameContribution { dim, ..Default::default() };
    for k in order {
        contribution.cells.push(cells[k]);
        contribution.features.extend_from_slice(&sums[k * dim..(k + 1) * dim]);
        contribution.hits.push(hits[k]);
    }
    contribution.obstacle = contribution.cells.clone();

    let mut sightings: Vec<Sighting> = seen
        .into_iter()
        .map(|(instance, (cat, mut cells, top))| {
            cells.sort();
            cells.dedup();
            Sighting { instance, category: Category::from_id(cat).expect("valid category"), cells, top }
        })
        .collect();
    sightings.sort_by_key(|s| s.instance);
    contribution.sightings = sightings;
    contribution.free = carve_free(obs, &cam, in_map, &contribution.obstacle);
    contribution
}

/// Cells inside the fan of triangles spanned by adjacent pixel columns, each triangle cut
/// at the nearer of its two columns' first hits (or the sensor range).
fn carve_free(obs: &Observation, cam: &Camera, in_map: impl Fn(Cell) -> bool, obstacle: &[Cell]) -> Vec<Cell> {
    let max_s = cam.max_range / cam.cell_size;
    let reach: Vec<f64> = (0..obs.width)
        .map(|x| {
            (0..obs.height)
                .map(|y| obs.depth[obs.index(x, y)])
                .filter(|d| d.is_finite())
                .fold(cam.max_range, f64::min)
                / cam.cell_size
        })
        .collect();
    let ((fr, fc), (rr, rc)) = cam.pose.heading.basis();
    let (r0, c0) = cam.origin();
    let reach_max = reach.iter().cloned().fold(0.0, f64::max).min(max_s);
    let lateral = reach_max * cam.half_tan;
    // bounding box of the view in world cells
    let corners = [(0.0, 0.0), (reach_max, -lateral), (reach_max, lateral)];
    let (mut rmin, mut rmax, mut cmin, mut cmax) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for (u, v) in corners {
        let (r, c) = (r0 + u * fr + v * rr, c0 + u * fc + v * rc);
        rmin = rmin.min(r);
        rmax = rmax.max(r);
        cmin = cmin.min(c);
        cmax = cmax.max(c);
    }
    let w = obs.width as f64;
    let mut free = vec![cam.pose.cell];
    for row in rmin.floor() as i32..=rmax.ceil() as i32 {
        for col in cmin.floor() as i32..=cmax.ceil() as i32 {
            let cell = Cell::new(row, col);
            if !in_map(cell) || cell == cam.pose.cell {
                continue;
            }
            let (dr, dc) = (row as f64 + 0.5 - r0, col as f64 + 0.5 - c0);
            let u = dr * fr + dc * fc;
            if u <= 0.0 {
                continue;
            }
            let v = dr * rr + dc * rc;
            let xf = (v / u / cam.half_tan + 1.0) * w / 2.0 - 0.5;
            if xf < 0.0 || xf > w - 1.0 {
                continue;
            }
            let k = (xf.floor() as usize).min(obs.width - 2);
            if u <= reach[k].min(reach[k + 1]) - 0.5 {
                free.push(cell);
            }
        }
    }
    free.sort();
    free.retain(|c| obstacle.binary_search(c).is_err());
    free
}
