use super::camera::Camera;
use crate::config::Config;
use crate::geom::{Cell, Pose};
use crate::scene::{Category, Scene, WALL_INSTANCE};
use serde::{Deserialize, Serialize};
use std::ops::Range;

const WALL_HEIGHT: f64 = 2.5;
/// Rays that only graze a cell corner over less than this many cells are ignored.
const GRAZE: f64 = 1e-6;

/// Egocentric frame: z-depth in meters (`f64::INFINITY` for no hit within range)
/// plus ground-truth category and instance ids per pixel, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub width: usize,
    pub height: usize,
    #[serde(with = "depth_serde")]
    pub depth: Vec<f64>,
    pub category: Vec<u16>,
    pub instance: Vec<u32>,
    pub pose: Pose,
}

mod depth_serde {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &[f64], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(v.iter().map(|d| if d.is_finite() { Some(*d) } else { None }))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
        let v: Vec<Option<f64>> = Vec::deserialize(d)?;
        Ok(v.into_iter().map(|x| x.unwrap_or(f64::INFINITY)).collect())
    }
}

impl Observation {
    pub fn empty(width: usize, height: usize, pose: Pose) -> Self {
        let n = width * height;
        Observation { width, height, depth: vec![f64::INFINITY; n], category: vec![0; n], instance: vec![0; n], pose }
    }

    pub fn index(&self, x: usize, y: usize) -> usize {
        y * self.width + x
    }

    pub fn is_hit(&self, i: usize) -> bool {
        self.instance[i] != 0
    }

    pub fn contains_instance(&self, instance: u32) -> bool {
        self.instance.contains(&instance)
    }

    /// Pixel counts per visible instance, sorted by instance id.
    pub fn instance_areas(&self) -> Vec<(u32, Category, usize)> {
        let mut counts: std::collections::BTreeMap<u32, (u16, usize)> = Default::default();
        for (i, &inst) in self.instance.iter().enumerate() {
            if inst != 0 {
                let e = counts.entry(inst).or_insert((self.category[i], 0));
                e.1 += 1;
            }
        }
        counts
            .into_iter()
            .map(|(inst, (cat, n))| (inst, Category::from_id(cat).expect("valid category"), n))
            .collect()
    }
}

/// Casts one ray per pixel. Contents of closed containers and held objects are never drawn.
pub fn render_observation(scene: &Scene, pose: Pose, config: &Config) -> Observation {
    render_columns(scene, pose, config, 0..config.image_size)
}

/// Like [`render_observation`] but only fills the pixel columns in `xs`; the rest stay empty.
pub fn render_columns(scene: &Scene, pose: Pose, config: &Config, xs: Range<usize>) -> Observation {
    let cam = Camera::new(pose, config);
    let mut obs = Observation::empty(cam.width, cam.height, pose);
    let boxes = scene.render_boxes();
    let max_s = config.max_range / config.cell_size;
    let row_tan: Vec<f64> = (0..cam.height).map(|y| cam.row_tangent(y)).collect();
    let (r0, c0) = cam.origin();

    for x in xs.start..xs.end.min(cam.width) {
        let (dr, dc) = cam.column_direction(x);
        // pixels still looking for a surface
        let mut open: Vec<usize> = (0..cam.height).collect();
        // Amanatides-Woo traversal
        let mut cell = Cell::new(r0.floor() as i32, c0.floor() as i32);
        let step_r = if dr > 0.0 { 1 } else { -1 };
        let step_c = if dc > 0.0 { 1 } else { -1 };
        let next_boundary = |p: f64, d: f64| -> f64 {
            if d > 0.0 {
                (p.floor() + 1.0 - p) / d
            } else if d < 0.0 {
                (p - p.floor()) / -d
            } else {
                f64::INFINITY
            }
        };
        let mut t_max_r = next_boundary(r0, dr);
        let mut t_max_c = next_boundary(c0, dc);
        let t_delta_r = if dr != 0.0 { 1.0 / dr.abs() } else { f64::INFINITY };
        let t_delta_c = if dc != 0.0 { 1.0 / dc.abs() } else { f64::INFINITY };
        let mut s_in = 0.0;
        while s_in <= max_s && !open.is_empty() {
            let s_out = t_max_r.min(t_max_c);
            let s_end = s_out.min(max_s);
            if s_end - s_in > GRAZE {
                let wall = scene.is_wall(cell);
                let here = boxes.at(cell);
                if wall || !here.is_empty() {
                    open.retain(|&y| {
                        let tv = row_tan[y];
                        let mut best: Option<(f64, u32, u16)> = None;
                        let mut consider = |z0: f64, z1: f64, inst: u32, cat: u16| {
                            if let Some(s) = entry_depth(cam.camera_height, tv, cam.cell_size, s_in, s_end, z0, z1) {
                                if best.is_none_or(|b| s < b.0) {
                                    best = Some((s, inst, cat));
                                }
                            }
                        };
                        if wall {
                            consider(0.0, WALL_HEIGHT, WALL_INSTANCE, Category::WALL.id());
                        }
                        for b in here {
                            consider(b.z0, b.z1, b.instance, b.category.id());
                        }
                        match best {
                            Some((s, inst, cat)) => {
                                // sample inside the hit cell so the point re-projects onto it
                                let depth = s + (0.5 * (s_end - s)).min(0.05);
                                let i = y * cam.width + x;
                                obs.depth[i] = depth * cam.cell_size;
                                obs.instance[i] = inst;
                                obs.category[i] = cat;
                                false
                            }
                            None => true,
                        }
                    });
                }
                // drop rays that left the vertical band where anything exists
                open.retain(|&y| {
                    let z = cam.camera_height + s_end * cam.cell_size * row_tan[y];
                    !((z > WALL_HEIGHT && row_tan[y] >= 0.0) || (z < 0.0 && row_tan[y] <= 0.0))
                });
            }
            if t_max_r < t_max_c {
                cell.row += step_r;
                t_max_r += t_delta_r;
            } else {
                cell.col += step_c;
                t_max_c += t_delta_c;
            }
            s_in = s_out;
        }
    }
    obs
}

/// First z-depth (cells) in `[s_in, s_end]` where the ray of vertical tangent `tv`
/// is inside the box `[z0, z1]`, if any.
fn entry_depth(cam_h: f64, tv: f64, cell: f64, s_in: f64, s_end: f64, z0: f64, z1: f64) -> Option<f64> {
    let z_at = |s: f64| cam_h + s * cell * tv;
    let zi = z_at(s_in);
    if zi >= z0 && zi <= z1 {
        return Some(s_in);
    }
    let target = if zi > z1 && tv < 0.0 {
        z1
    } else if zi < z0 && tv > 0.0 {
        z0
    } else {
        return None;
    };
    let s = (target - cam_h) / (cell * tv);
    (s >= s_in && s_end - s > GRAZE).then_some(s)
}
