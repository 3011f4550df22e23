//! Least-squares rigid transform from partial point correspondences.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{wrap_angle, Point, ScreenPose};

/// Screen coordinates fixed by one correspondence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    X,
    Y,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PoseConstraint {
    pub antenna: Point,
    /// Only the components selected by `axis` are used.
    pub screen: Point,
    pub axis: Axis,
}

impl PoseConstraint {
    pub fn both(antenna: Point, screen: Point) -> Self {
        Self { antenna, screen, axis: Axis::Both }
    }

    pub fn x(antenna: Point, x: f64) -> Self {
        Self { antenna, screen: Point::new(x, 0.0), axis: Axis::X }
    }

    pub fn y(antenna: Point, y: f64) -> Self {
        Self { antenna, screen: Point::new(0.0, y), axis: Axis::Y }
    }

    fn has_x(&self) -> bool {
        matches!(self.axis, Axis::X | Axis::Both)
    }

    fn has_y(&self) -> bool {
        matches!(self.axis, Axis::Y | Axis::Both)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PoseSolution {
    pub pose: ScreenPose,
    /// Root-mean-square screen residual over all scalar equations (m).
    pub residual: f64,
}

const GRID_STEP: f64 = PI / 1800.0;

/// Optimal translation for a fixed rotation and the resulting squared error.
fn fit_translation(cs: &[PoseConstraint], theta: f64) -> (f64, f64, f64) {
    let (s, c) = theta.sin_cos();
    let (mut sx, mut nx, mut sy, mut ny) = (0.0, 0, 0.0, 0);
    for k in cs {
        let a = k.antenna;
        if k.has_x() {
            sx += k.screen.x - (c * a.x - s * a.y);
            nx += 1;
        }
        if k.has_y() {
            sy += k.screen.y - (s * a.x + c * a.y);
            ny += 1;
        }
    }
    let (tx, ty) = (sx / nx as f64, sy / ny as f64);
    let mut err = 0.0;
    for k in cs {
        let a = k.antenna;
        if k.has_x() {
            err += (c * a.x - s * a.y + tx - k.screen.x).powi(2);
        }
        if k.has_y() {
            err += (s * a.x + c * a.y + ty - k.screen.y).powi(2);
        }
    }
    (tx, ty, err)
}

/// Rigid transform minimising the squared screen residual of `constraints`.
///
/// Rotation is found by a 0.1° grid over the full circle, golden-section
/// refinement of the best cell and a few Newton steps on the cost; the
/// translation is closed-form for each rotation.
pub fn solve_pose(constraints: &[PoseConstraint]) -> Result<PoseSolution> {
    let nx = constraints.iter().filter(|k| k.has_x()).count();
    let ny = constraints.iter().filter(|k| k.has_y()).count();
    if nx == 0 || ny == 0 || nx + ny < 3 {
        return Err(Error::PoseUnsolvable(format!(
            "{nx} x- and {ny} y-equations cannot fix rotation and translation"
        )));
    }
    if constraints
        .iter()
        .any(|k| !(k.antenna.x.is_finite() && k.antenna.y.is_finite() && k.screen.x.is_finite() && k.screen.y.is_finite()))
    {
        return Err(Error::PoseUnsolvable("non-finite coordinates".into()));
    }
    let cost = |t: f64| fit_translation(constraints, t).2;

    let steps = (2.0 * PI / GRID_STEP).round() as usize;
    let mut best = (f64::INFINITY, 0.0);
    for i in 0..steps {
        let t = -PI + (i + 1) as f64 * GRID_STEP;
        let e = cost(t);
        if e < best.0 {
            best = (e, t);
        }
    }

    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (best.1 - GRID_STEP, best.1 + GRID_STEP);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (cost(c), cost(d));
    for _ in 0..80 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = cost(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = cost(d);
        }
    }
    let mut theta = 0.5 * (a + b);
    let h = 1e-5;
    for _ in 0..4 {
        let (fm, f0, fp) = (cost(theta - h), cost(theta), cost(theta + h));
        let curv = (fp - 2.0 * f0 + fm) / (h * h);
        if !(curv > 0.0) {
            break;
        }
        let step = (fp - fm) / (2.0 * h) / curv;
        if !(step.abs() < GRID_STEP) || cost(theta - step) > f0 {
            break;
        }
        theta -= step;
    }

    check_rank(constraints, theta)?;
    let (tx, ty, err) = fit_translation(constraints, theta);
    Ok(PoseSolution {
        pose: ScreenPose::new(wrap_angle(theta), tx, ty),
        residual: (err / (nx + ny) as f64).sqrt(),
    })
}

/// Rejects configurations whose Jacobian in `(θ, x_t, y_t)` is rank deficient.
fn check_rank(cs: &[PoseConstraint], theta: f64) -> Result<()> {
    let (s, c) = theta.sin_cos();
    let mut rows: Vec<[f64; 3]> = Vec::new();
    for k in cs {
        let a = k.antenna;
        if k.has_x() {
            rows.push([-s * a.x - c * a.y, 1.0, 0.0]);
        }
        if k.has_y() {
            rows.push([c * a.x - s * a.y, 0.0, 1.0]);
        }
    }
    let mut jtj = [[0.0; 3]; 3];
    for r in &rows {
        for i in 0..3 {
            for j in 0..3 {
                jtj[i][j] += r[i] * r[j];
            }
        }
    }
    let scale = (0..3).map(|i| jtj[i][i]).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let d = (0..3).map(|i| jtj[i][i].sqrt().max(f64::MIN_POSITIVE)).collect::<Vec<_>>();
    let m = |i: usize, j: usize| jtj[i][j] / (d[i] * d[j]);
    let det = m(0, 0) * (m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1)) - m(0, 1) * (m(1, 0) * m(2, 2) - m(1, 2) * m(2, 0))
        + m(0, 2) * (m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0));
    if jtj[0][0] <= 1e-24 * scale || det.abs() < 1e-10 {
        return Err(Error::PoseUnsolvable(
            "correspondences are degenerate (coincident or aligned with the constrained axis)".into(),
        ));
    }
    Ok(())
}

/// Largest screen-space discrepancy between two poses over `probes`.
pub fn pose_error(estimate: &ScreenPose, truth: &ScreenPose, probes: &[Point]) -> f64 {
    probes
        .iter()
        .map(|p| estimate.to_screen(*p).distance(&truth.to_screen(*p)))
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn grid_pairs(pose: &ScreenPose) -> Vec<PoseConstraint> {
        (0..6)
            .map(|i| Point::new(0.01 * (i % 3) as f64, 0.015 * (i / 3) as f64))
            .map(|a| PoseConstraint::both(a, pose.to_screen(a)))
            .collect()
    }

    #[test]
    fn identity() {
        let s = solve_pose(&grid_pairs(&ScreenPose::IDENTITY)).unwrap();
        assert!(s.pose.theta.abs() < 1e-9 && s.pose.x_t.abs() < 1e-9 && s.pose.y_t.abs() < 1e-9);
        assert!(s.residual < 1e-9);
    }

    #[test]
    fn quarter_turn_with_offset() {
        let truth = ScreenPose::new(PI / 2.0, 0.03, -0.02);
        let s = solve_pose(&grid_pairs(&truth)).unwrap();
        assert!((s.pose.theta - truth.theta).abs() < 1e-6);
        assert!((s.pose.x_t - truth.x_t).abs() < 1e-6 && (s.pose.y_t - truth.y_t).abs() < 1e-6);
    }

    #[test]
    fn single_axis_constraints() {
        let truth = ScreenPose::new(0.3, 0.01, 0.02);
        let pts = [Point::new(0.0, 0.0), Point::new(0.03, 0.0), Point::new(0.0, 0.04), Point::new(0.02, 0.05)];
        let mut cs: Vec<_> = pts.iter().map(|a| PoseConstraint::y(*a, truth.to_screen(*a).y)).collect();
        cs.push(PoseConstraint::x(pts[0], truth.to_screen(pts[0]).x));
        let s = solve_pose(&cs).unwrap();
        assert!(pose_error(&s.pose, &truth, &pts) < 1e-6);
    }

    #[test]
    fn degenerate_inputs() {
        let a = Point::new(0.01, 0.01);
        let c = PoseConstraint::both(a, Point::new(0.02, 0.03));
        assert!(matches!(solve_pose(&[c, c]), Err(Error::PoseUnsolvable(_))));
        assert!(matches!(solve_pose(&[c]), Err(Error::PoseUnsolvable(_))));
        // Only y-equations.
        let ys: Vec<_> = (0..4).map(|i| PoseConstraint::y(Point::new(i as f64 * 0.01, 0.0), 0.01)).collect();
        assert!(matches!(solve_pose(&ys), Err(Error::PoseUnsolvable(_))));
    }

    proptest! {
        #[test]
        fn round_trip(theta in -PI..PI, tx in -0.1f64..0.1, ty in -0.1f64..0.1) {
            let truth = ScreenPose::new(theta, tx, ty);
            let s = solve_pose(&grid_pairs(&truth)).unwrap();
            prop_assert!(wrap_angle(s.pose.theta - theta).abs() < 1e-6);
            prop_assert!((s.pose.x_t - tx).abs() < 1e-6 && (s.pose.y_t - ty).abs() < 1e-6);
            prop_assert!(s.pose.is_proper_rotation(1e-12));
        }
    }
}
