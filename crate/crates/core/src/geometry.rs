//! Planar points and the rigid transform between antenna and screen frames.

use serde::{Deserialize, Serialize};

/// Point in meters.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn lerp(&self, other: &Point, t: f64) -> Point {
        Point::new(self.x + t * (other.x - self.x), self.y + t * (other.y - self.y))
    }
}

/// Rotation by `theta` followed by translation `(x_t, y_t)`, mapping
/// antenna-array coordinates to screen coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ScreenPose {
    pub theta: f64,
    pub x_t: f64,
    pub y_t: f64,
}

impl ScreenPose {
    pub const IDENTITY: ScreenPose = ScreenPose { theta: 0.0, x_t: 0.0, y_t: 0.0 };

    pub fn new(theta: f64, x_t: f64, y_t: f64) -> Self {
        Self { theta, x_t, y_t }
    }

    /// Row-major 2×2 rotation block.
    pub fn rotation(&self) -> [[f64; 2]; 2] {
        let (s, c) = self.theta.sin_cos();
        [[c, -s], [s, c]]
    }

    pub fn to_screen(&self, antenna: Point) -> Point {
        let [[a, b], [c, d]] = self.rotation();
        Point::new(a * antenna.x + b * antenna.y + self.x_t, c * antenna.x + d * antenna.y + self.y_t)
    }

    pub fn to_antenna(&self, screen: Point) -> Point {
        let [[a, b], [c, d]] = self.rotation();
        let (x, y) = (screen.x - self.x_t, screen.y - self.y_t);
        Point::new(a * x + c * y, b * x + d * y)
    }

    /// `θ` wrapped into `(-π, π]`.
    pub fn normalized(&self) -> ScreenPose {
        ScreenPose { theta: wrap_angle(self.theta), ..*self }
    }

    /// Orthonormal rotation block with determinant +1, to `tol`.
    pub fn is_proper_rotation(&self, tol: f64) -> bool {
        let [[a, b], [c, d]] = self.rotation();
        let det = a * d - b * c;
        (det - 1.0).abs() <= tol
            && (a * a + c * c - 1.0).abs() <= tol
            && (b * b + d * d - 1.0).abs() <= tol
            && (a * b + c * d).abs() <= tol
    }
}

/// Wraps an angle into `(-π, π]`.
pub fn wrap_angle(theta: f64) -> f64 {
    use std::f64::consts::PI;
    let w = (theta + PI).rem_euclid(2.0 * PI) - PI;
    if w <= -PI {
        w + 2.0 * PI
    } else {
        w
    }
}
