//! Pinhole camera geometry shared by rendering and map projection.
//!
//! The camera has no pitch, so z-depth is the horizontal distance along the
//! facing direction. Pixel column `x` looks along `forward + t(x) * right`.

use crate::config::Config;
use crate::geom::{Pose, Rect};
use std::ops::Range;

#[derive(Debug, Clone, Copy)]
pub struct Camera {
    pub pose: Pose,
    pub width: usize,
    pub height: usize,
    /// tan(fov / 2)
    pub half_tan: f64,
    pub cell_size: f64,
    pub camera_height: f64,
    pub max_range: f64,
}

impl Camera {
    pub fn new(pose: Pose, config: &Config) -> Self {
        Camera {
            pose,
            width: config.image_size,
            height: config.image_size,
            half_tan: (config.fov.to_radians() / 2.0).tan(),
            cell_size: config.cell_size,
            camera_height: config.camera_height,
            max_range: config.max_range,
        }
    }

    /// Camera position in continuous cell units `(row, col)`.
    pub fn origin(&self) -> (f64, f64) {
        self.pose.cell.center()
    }

    /// Lateral tangent of pixel column `x`; negative is left of center.
    pub fn column_tangent(&self, x: usize) -> f64 {
        (2.0 * (x as f64 + 0.5) / self.width as f64 - 1.0) * self.half_tan
    }

    /// Vertical tangent of pixel row `y`; positive is above the horizon.
    pub fn row_tangent(&self, y: usize) -> f64 {
        (1.0 - 2.0 * (y as f64 + 0.5) / self.height as f64) * self.half_tan
    }

    /// Ray direction of column `x` in `(row, col)` cell units with unit forward component.
    pub fn column_direction(&self, x: usize) -> (f64, f64) {
        let ((fr, fc), (rr, rc)) = self.pose.heading.basis();
        let t = self.column_tangent(x);
        (fr + t * rr, fc + t * rc)
    }

    /// Pixel columns whose rays can pass through `rect`; all columns if part of it is behind the camera.
    pub fn columns_covering(&self, rect: Rect) -> Range<usize> {
        let ((fr, fc), (rr, rc)) = self.pose.heading.basis();
        let (r0, c0) = self.origin();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for (r, c) in [(rect.row0, rect.col0), (rect.row0, rect.col1), (rect.row1, rect.col0), (rect.row1, rect.col1)] {
            let (dr, dc) = (r as f64 - r0, c as f64 - c0);
            let f = dr * fr + dc * fc;
            if f <= 1e-9 {
                return 0..self.width;
            }
            let t = (dr * rr + dc * rc) / f;
            lo = lo.min(t);
            hi = hi.max(t);
        }
        let col = |t: f64| (t / self.half_tan + 1.0) * self.width as f64 / 2.0 - 0.5;
        let a = (col(lo).floor() - 1.0).max(0.0) as usize;
        let b = (col(hi).ceil() + 2.0).clamp(0.0, self.width as f64) as usize;
        a.min(b)..b
    }

    /// World point (continuous cell units) seen by column `x` at z-depth `depth_m`.
    pub fn unproject(&self, x: usize, depth_m: f64) -> (f64, f64) {
        let (r0, c0) = self.origin();
        let (dr, dc) = self.column_direction(x);
        let s = depth_m / self.cell_size;
        (r0 + s * dr, c0 + s * dc)
    }
}
