//! Standing cells from which an object can be seen and reached.

use super::astar::OccupancyGrid;
use crate::config::Config;
use crate::featmap::Occupancy;
use crate::geom::{Cell, Heading, Pose};
use crate::scene::{ObjectId, Scene};
use crate::sim::{render_columns, Camera};

/// Distance band (meters) for standing near an object whose top is at `top` meters.
///
/// The lower bound keeps the top inside the downward half of the field of view.
pub fn approach_band(top: f64, config: &Config) -> (f64, f64) {
    let half_tan = (config.fov.to_radians() / 2.0).tan();
    let lo = ((config.camera_height - top) / half_tan + 0.1).max(0.75);
    let hi = (config.interaction_range - 0.15).max(lo);
    (lo, hi)
}

/// Nearest target cell to `from` and its distance in cells.
pub fn nearest_cell(from: Cell, target: &[Cell]) -> (Cell, f64) {
    target
        .iter()
        .map(|&t| (t, from.dist(t)))
        .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Equal).then(a.0.cmp(&b.0)))
        .expect("target cells are nonempty")
}

/// Heading that puts the nearest target cell inside the horizontal field of view.
pub fn facing(from: Cell, target: &[Cell]) -> Heading {
    let (t, _) = nearest_cell(from, target);
    Heading::toward((t.row - from.row) as f64, (t.col - from.col) as f64)
}

/// Whether the straight line to the nearest target cell avoids obstacles other than
/// those within `support` cells of the target (the furniture it rests on).
pub fn line_of_sight(grid: &impl OccupancyGrid, from: Cell, target: &[Cell], support: f64) -> bool {
    let (t, d) = nearest_cell(from, target);
    let steps = (d * 2.0).ceil() as i32;
    let (r0, c0) = from.center();
    let (r1, c1) = t.center();
    for k in 1..steps {
        let f = k as f64 / steps as f64;
        let c = Cell::new((r0 + (r1 - r0) * f).floor() as i32, (c0 + (c1 - c0) * f).floor() as i32);
        if grid.occupancy_at(c) == Occupancy::Obstacle && nearest_cell(c, target).1 > support {
            return false;
        }
    }
    true
}

/// Lattice cells in the distance band around `target`, free on `grid`, with line of sight.
pub fn approach_cells(
    grid: &impl OccupancyGrid,
    target: &[Cell],
    top: f64,
    stride: i32,
    residue: (i32, i32),
    config: &Config,
) -> Vec<Cell> {
    if target.is_empty() {
        return Vec::new();
    }
    let (lo, hi) = approach_band(top, config);
    let reach = (hi / config.cell_size).ceil() as i32 + 1;
    let rmin = target.iter().map(|c| c.row).min().unwrap() - reach;
    let rmax = target.iter().map(|c| c.row).max().unwrap() + reach;
    let cmin = target.iter().map(|c| c.col).min().unwrap() - reach;
    let cmax = target.iter().map(|c| c.col).max().unwrap() + reach;
    let first = |lo: i32, res: i32| lo + (res - lo).rem_euclid(stride);
    let support = 0.5 / config.cell_size;
    let mut out = Vec::new();
    let mut row = first(rmin, residue.0);
    while row <= rmax {
        let mut col = first(cmin, residue.1);
        while col <= cmax {
            let c = Cell::new(row, col);
            let d = nearest_cell(c, target).1 * config.cell_size;
            if d >= lo && d <= hi && grid.occupancy_at(c) == Occupancy::Free && line_of_sight(grid, c, target, support) {
                out.push(c);
            }
            col += stride;
        }
        row += stride;
    }
    out
}

/// Whether `id` shows up in the frame rendered from `cell` when facing it.
pub fn sees(scene: &Scene, cell: Cell, id: ObjectId, config: &Config) -> bool {
    let Some(o) = scene.object(id) else { return false };
    let cells: Vec<Cell> = o.footprint().cells().collect();
    let pose = Pose::new(cell, facing(cell, &cells));
    let xs = Camera::new(pose, config).columns_covering(o.footprint());
    render_columns(scene, pose, config, xs).contains_instance(id.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Open;
    impl OccupancyGrid for Open {
        fn occupancy_at(&self, _: Cell) -> Occupancy {
            Occupancy::Free
        }
    }

    #[test]
    fn band_tracks_object_height() {
        let cfg = Config::default();
        assert_eq!(approach_band(1.0, &cfg).0, 0.75);
        let (lo, hi) = approach_band(0.45, &cfg);
        assert!((lo - 1.15).abs() < 1e-9 && hi == 1.35);
    }

    #[test]
    fn cells_are_on_lattice_and_in_band() {
        let cfg = Config::default();
        let target = vec![Cell::new(50, 50), Cell::new(50, 51)];
        let cells = approach_cells(&Open, &target, 0.9, 5, (2, 3), &cfg);
        assert!(!cells.is_empty());
        for c in cells {
            assert_eq!(((c.row - 2).rem_euclid(5), (c.col - 3).rem_euclid(5)), (0, 0));
            let d = nearest_cell(c, &target).1 * 0.05;
            assert!((0.75..=1.35).contains(&d));
        }
    }
}
