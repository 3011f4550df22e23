//! Gesture synthesis into timed antenna activations.

use serde::{Deserialize, Serialize};

use super::array::{select_antenna, AntennaArray};
use super::profiles::DeviceProfile;
use crate::circuit::NoiseInput;
use crate::error::{ensure_positive, invalid, Error, Result};
use crate::geometry::{Point, ScreenPose};
use crate::susceptibility::{predict_frequency_sets, Band};

pub const TAP_DURATION: f64 = 0.1;
pub const LONG_PRESS_DURATION: f64 = 1.5;
/// Activation time per antenna along a swipe.
pub const SWIPE_NODE_DWELL: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GestureKind {
    ShortTap,
    LongPress,
    Swipe,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GestureSpec {
    pub kind: GestureKind,
    /// Screen coordinates; a single point for taps and presses.
    pub path: Vec<Point>,
    pub duration: f64,
}

impl GestureSpec {
    pub fn tap(at: Point) -> Self {
        Self { kind: GestureKind::ShortTap, path: vec![at], duration: TAP_DURATION }
    }

    pub fn long_press(at: Point) -> Self {
        Self { kind: GestureKind::LongPress, path: vec![at], duration: LONG_PRESS_DURATION }
    }

    pub fn swipe(path: Vec<Point>) -> Self {
        let len = path_length(&path);
        Self { kind: GestureKind::Swipe, path, duration: len }
    }
}

pub fn path_length(path: &[Point]) -> f64 {
    path.windows(2).map(|w| w[0].distance(&w[1])).sum()
}

/// Distance from `p` to the polyline `path`.
pub fn distance_to_path(p: Point, path: &[Point]) -> f64 {
    if path.len() == 1 {
        return p.distance(&path[0]);
    }
    path.windows(2)
        .map(|w| {
            let (a, b) = (w[0], w[1]);
            let (dx, dy) = (b.x - a.x, b.y - a.y);
            let len2 = dx * dx + dy * dy;
            let t = if len2 > 0.0 { (((p.x - a.x) * dx + (p.y - a.y) * dy) / len2).clamp(0.0, 1.0) } else { 0.0 };
            p.distance(&a.lerp(&b, t))
        })
        .fold(f64::INFINITY, f64::min)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AttackStep {
    pub antenna: usize,
    /// Screen point this step aims at.
    pub target: Point,
    /// Excitation; `v_n` is the amplitude induced at the aimed node.
    pub noise: NoiseInput,
    /// Field at the panel surface (V/m).
    pub e_field: f64,
    pub start: f64,
    pub duration: f64,
    /// Consult the scan-mode detector after this step.
    pub checkpoint: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AttackPlan {
    pub kind: GestureKind,
    pub steps: Vec<AttackStep>,
    pub max_retries: u32,
}

impl AttackPlan {
    pub fn end_time(&self) -> f64 {
        self.steps.last().map(|s| s.start + s.duration).unwrap_or(0.0)
    }
}

/// Screen outline used to validate gesture targets.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScreenBounds {
    pub width: f64,
    pub height: f64,
}

impl ScreenBounds {
    fn contains(&self, p: Point) -> bool {
        p.x >= 0.0 && p.x <= self.width && p.y >= 0.0 && p.y <= self.height
    }
}

/// Turns a gesture into antenna activations for `profile`'s attack
/// frequency.
///
/// Taps and presses are a single activation of the antenna nearest the
/// target. Swipes sample the path every half antenna spacing and activate
/// each newly nearest antenna in turn for [`SWIPE_NODE_DWELL`]. Consecutive
/// footprints share a node, which keeps the contact continuous while only
/// one antenna is driven at a time.
pub fn plan_gesture(
    g: &GestureSpec,
    profile: &DeviceProfile,
    pose: &ScreenPose,
    array: &AntennaArray,
    bounds: ScreenBounds,
    electrode_gap: f64,
) -> Result<AttackPlan> {
    if g.path.is_empty() {
        return Err(invalid("path", "gesture needs at least one point"));
    }
    if let Some(p) = g.path.iter().find(|p| !bounds.contains(**p)) {
        return Err(Error::CoverageGap(format!("gesture point ({:.4}, {:.4}) lies off the screen", p.x, p.y)));
    }
    let sensor = profile.sensor();
    let f = profile.attack_frequency_hz;
    let sets = predict_frequency_sets(sensor.f_sw, sensor.d_s, Band::new(0.5 * f, 1.5 * f))?;
    if !sets.f_emax.iter().any(|m| (m - f).abs() <= 1e-9 * f) {
        return Err(invalid("attack_frequency_hz", format!("{f} Hz is not a maximal-coupling frequency")));
    }
    let noise = NoiseInput::new(profile.e_field_v_per_m * electrode_gap, f, 0.0);
    let step = |antenna, target, start, duration| AttackStep {
        antenna,
        target,
        noise,
        e_field: profile.e_field_v_per_m,
        start,
        duration,
        checkpoint: true,
    };

    let steps = match g.kind {
        GestureKind::ShortTap | GestureKind::LongPress => {
            if g.path.len() != 1 {
                return Err(invalid("path", "taps and presses target a single point"));
            }
            ensure_positive("duration", g.duration)?;
            if g.kind == GestureKind::LongPress && g.duration <= TAP_DURATION {
                return Err(invalid("duration", "a long press must outlast a tap"));
            }
            vec![step(select_antenna(array, pose, g.path[0])?, g.path[0], 0.0, g.duration)]
        }
        GestureKind::Swipe => {
            if g.path.len() < 2 {
                return Err(invalid("path", "a swipe needs at least two points"));
            }
            let h = 0.5 * array.spacing;
            let mut samples = vec![g.path[0]];
            for w in g.path.windows(2) {
                let n = (w[0].distance(&w[1]) / h).ceil().max(1.0) as usize;
                samples.extend((1..=n).map(|k| w[0].lerp(&w[1], k as f64 / n as f64)));
            }
            let mut steps: Vec<AttackStep> = Vec::new();
            for p in samples {
                let a = select_antenna(array, pose, p)?;
                if steps.last().map(|s| s.antenna) != Some(a) {
                    let start = steps.len() as f64 * SWIPE_NODE_DWELL;
                    steps.push(step(a, p, start, SWIPE_NODE_DWELL));
                }
            }
            steps
        }
    };
    Ok(AttackPlan { kind: g.kind, steps, max_retries: 3 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::attacker::profiles::device_profile;

    fn setup() -> (DeviceProfile, AntennaArray, ScreenBounds) {
        (
            device_profile("ipad_pro").unwrap(),
            AntennaArray::standard(0.01).unwrap(),
            ScreenBounds { width: 0.2, height: 0.15 },
        )
    }

    #[test]
    fn tap_is_single_step() {
        let (p, a, b) = setup();
        let plan = plan_gesture(&GestureSpec::tap(Point::new(0.05, 0.05)), &p, &ScreenPose::IDENTITY, &a, b, 1.9e-4).unwrap();
        assert_eq!(plan.steps.len(), 1);
        assert_eq!(plan.steps[0].duration, TAP_DURATION);
        assert_eq!(plan.steps[0].noise.f_e, 270e3);
        let press = plan_gesture(&GestureSpec::long_press(Point::new(0.05, 0.05)), &p, &ScreenPose::IDENTITY, &a, b, 1.9e-4).unwrap();
        assert!(press.steps[0].duration > plan.steps[0].duration);
    }

    #[test]
    fn z_swipe_follows_path() {
        let (p, a, b) = setup();
        // Seven waypoints, 14 cm in total.
        let path = vec![
            Point::new(0.03, 0.10),
            Point::new(0.05, 0.10),
            Point::new(0.07, 0.10),
            Point::new(0.05, 0.08),
            Point::new(0.03, 0.06),
            Point::new(0.05, 0.06),
            Point::new(0.07, 0.06),
        ];
        let len = path_length(&path);
        assert!((len - (0.08 + 2.0 * 0.02f64.hypot(0.02))).abs() < 1e-12);
        let pose = ScreenPose::new(0.2, 0.02, -0.01);
        let plan = plan_gesture(&GestureSpec::swipe(path.clone()), &p, &pose, &a, b, 1.9e-4).unwrap();
        assert!(plan.steps.len() > 5);
        for w in plan.steps.windows(2) {
            assert!(w[1].start >= w[0].start + w[0].duration - 1e-12);
            assert_ne!(w[0].antenna, w[1].antenna);
        }
        for s in &plan.steps {
            let mapped = pose.to_screen(a.positions[s.antenna]);
            assert!(distance_to_path(mapped, &path) < a.spacing);
        }
    }

    #[test]
    fn leaving_screen_is_gap() {
        let (p, a, b) = setup();
        let g = GestureSpec::swipe(vec![Point::new(0.15, 0.05), Point::new(0.25, 0.05)]);
        assert!(matches!(plan_gesture(&g, &p, &ScreenPose::IDENTITY, &a, b, 1.9e-4), Err(Error::CoverageGap(_))));
    }
}
