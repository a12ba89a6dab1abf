//! Planar vector helpers and the simulation box.

use serde::{Deserialize, Serialize};

pub type Vec2 = [f64; 2];

#[inline]
pub fn dot(a: Vec2, b: Vec2) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

#[inline]
pub fn norm(a: Vec2) -> f64 {
    dot(a, a).sqrt()
}

/// Boundary condition along the x axis. Only periodic is supported.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryX {
    #[default]
    Periodic,
}

/// Boundary condition along the y axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryY {
    /// Flat walls at y = 0 and y = height.
    #[default]
    RigidWall,
    Periodic,
}

/// Rectangular domain `[0, width) x [0, height]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimBox {
    pub width: f64,
    pub height: f64,
    pub boundary_y: BoundaryY,
}

impl SimBox {
    pub fn area(&self) -> f64 {
        self.width * self.height
    }

    /// Minimum-image vector from `b` to `a` (i.e. `a - b`).
    #[inline]
    pub fn separation(&self, a: Vec2, b: Vec2) -> Vec2 {
        let mut dx = a[0] - b[0];
        dx -= self.width * (dx / self.width).round();
        let mut dy = a[1] - b[1];
        if self.boundary_y == BoundaryY::Periodic {
            dy -= self.height * (dy / self.height).round();
        }
        [dx, dy]
    }

    /// Wraps a point into the primary cell along the periodic axes.
    pub fn wrap(&self, p: Vec2) -> Vec2 {
        let x = p[0].rem_euclid(self.width);
        // rem_euclid can return `width` itself for tiny negative inputs
        let x = if x >= self.width { 0.0 } else { x };
        let y = match self.boundary_y {
            BoundaryY::Periodic => {
                let y = p[1].rem_euclid(self.height);
                if y >= self.height {
                    0.0
                } else {
                    y
                }
            }
            BoundaryY::RigidWall => p[1],
        };
        [x, y]
    }
}
