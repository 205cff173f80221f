//! Top-down pictures of a feature map: explored mask, frontiers, attention weights and the agent path.

use crate::featmap::{FeatureMap, Frontier, Occupancy};
use crate::geom::Cell;
use image::{Rgb, RgbImage};
use std::collections::HashMap;

const UNKNOWN: [u8; 3] = [40, 40, 48];
const FREE: [u8; 3] = [225, 225, 215];
const OBSTACLE: [u8; 3] = [20, 20, 20];
const PATH: [u8; 3] = [30, 90, 230];
const CENTROID: [u8; 3] = [255, 255, 255];
const PALETTE: [[u8; 3]; 6] = [[0, 170, 80], [230, 140, 0], [170, 60, 200], [0, 170, 190], [200, 200, 0], [120, 80, 40]];

/// What to draw on top of the map.
#[derive(Debug, Default, Clone, Copy)]
pub struct Layers<'a> {
    pub frontiers: &'a [Frontier],
    pub path: &'a [Cell],
    /// Tint explored cells by the weight of their most recent update.
    pub heat: bool,
}

fn frontier_owner(frontiers: &[Frontier]) -> HashMap<Cell, usize> {
    let mut owner = HashMap::new();
    for (k, f) in frontiers.iter().enumerate() {
        for &c in &f.cells {
            owner.insert(c, k);
        }
    }
    owner
}

/// Character picture, one character per `scale x scale` block.
///
/// `#` obstacle, `.` free, blank unknown, frontier cells by letter, `o` path, `+` centroid.
pub fn ascii(map: &FeatureMap, layers: Layers, scale: usize) -> String {
    let scale = scale.max(1) as i32;
    let owner = frontier_owner(layers.frontiers);
    let path: std::collections::HashSet<Cell> = layers.path.iter().copied().collect();
    let mut out = String::new();
    for br in (0..map.height).step_by(scale as usize) {
        for bc in (0..map.width).step_by(scale as usize) {
            let block: Vec<Cell> = (br..(br + scale).min(map.height))
                .flat_map(|r| (bc..(bc + scale).min(map.width)).map(move |c| Cell::new(r, c)))
                .collect();
            let ch = if block.iter().any(|c| layers.frontiers.iter().any(|f| f.centroid == *c)) {
                '+'
            } else if block.iter().any(|c| path.contains(c)) {
                'o'
            } else if let Some(k) = block.iter().filter_map(|c| owner.get(c)).min() {
                (b'a' + (*k % 26) as u8) as char
            } else if block.iter().any(|&c| map.occupancy(c) == Occupancy::Obstacle) {
                '#'
            } else if block.iter().any(|&c| map.occupancy(c) == Occupancy::Free) {
                '.'
            } else {
                ' '
            };
            out.push(ch);
        }
        out.push('\n');
    }
    out
}

fn blend(a: [u8; 3], b: [u8; 3], t: f32) -> [u8; 3] {
    let t = t.clamp(0.0, 1.0);
    [0, 1, 2].map(|i| (a[i] as f32 * (1.0 - t) + b[i] as f32 * t).round() as u8)
}

/// Color picture with `scale` pixels per cell.
pub fn render_png(map: &FeatureMap, layers: Layers, scale: u32) -> RgbImage {
    let scale = scale.max(1);
    let owner = frontier_owner(layers.frontiers);
    let mut img = RgbImage::new(map.width as u32 * scale, map.height as u32 * scale);
    let paint = |c: Cell, color: [u8; 3], img: &mut RgbImage| {
        if !map.in_bounds(c) {
            return;
        }
        for dy in 0..scale {
            for dx in 0..scale {
                img.put_pixel(c.col as u32 * scale + dx, c.row as u32 * scale + dy, Rgb(color));
            }
        }
    };
    for row in 0..map.height {
        for col in 0..map.width {
            let c = Cell::new(row, col);
            let mut color = match map.occupancy(c) {
                Occupancy::Unknown => UNKNOWN,
                Occupancy::Free => FREE,
                Occupancy::Obstacle => OBSTACLE,
            };
            if layers.heat && map.is_explored(c) {
                color = blend([60, 0, 0], [255, 60, 0], map.last_weight(c));
            }
            if let Some(&k) = owner.get(&c) {
                color = PALETTE[k % PALETTE.len()];
            }
            paint(c, color, &mut img);
        }
    }
    for &c in layers.path {
        paint(c, PATH, &mut img);
    }
    for f in layers.frontiers {
        for dr in -1..=1 {
            for dc in -1..=1 {
                paint(f.centroid.offset(dr, dc), CENTROID, &mut img);
            }
        }
    }
    img
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> FeatureMap {
        FeatureMap::new(12, 8, 4, 0.05)
    }

    #[test]
    fn unknown_map_is_blank() {
        let m = toy();
        let s = ascii(&m, Layers::default(), 2);
        assert_eq!(s.lines().count(), 4);
        assert!(s.lines().all(|l| l.len() == 6 && l.trim().is_empty()));
        let img = render_png(&m, Layers::default(), 3);
        assert_eq!(img.dimensions(), (36, 24));
        assert!(img.pixels().all(|p| p.0 == UNKNOWN));
    }

    #[test]
    fn path_and_obstacles_show() {
        let mut m = toy();
        m.mark_obstacle(Cell::new(0, 0));
        let path = [Cell::new(7, 11)];
        let s = ascii(&m, Layers { path: &path, ..Default::default() }, 1);
        assert_eq!(s.lines().next().unwrap().chars().next(), Some('#'));
        assert_eq!(s.lines().nth(7).unwrap().chars().nth(11), Some('o'));
    }
}
