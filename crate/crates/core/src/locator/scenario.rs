//! Synthetic localization scenarios with known ground truth.

use std::f64::consts::PI;

use rand::Rng;

use super::{
    collect_training_set, locate_screen, pose_error, LineClassifier, LocateReport, LocateSettings,
};
use crate::circuit::SensorParams;
use crate::error::{invalid, Result};
use crate::geometry::{Point, ScreenPose};
use crate::screen::{emission_trace, EmissionTrace, ScreenModel, TraceSettings};

/// Lattice cells `(i, j)` of the seven-antenna probe layout; the twelve-antenna
/// layout extends it.
const CORE_CELLS: [(i32, i32); 7] = [(0, 0), (1, 0), (2, 0), (3, 0), (0, 2), (1, 2), (2, 2)];
const EXTRA_CELLS: [(i32, i32); 5] = [(3, 2), (0, 1), (1, 1), (2, 1), (3, 1)];

/// Antenna positions for a 7- or 12-antenna layout with lattice `spacing`.
pub fn probe_layout(count: usize, spacing: f64) -> Result<Vec<Point>> {
    let cells: Vec<(i32, i32)> = match count {
        7 => CORE_CELLS.to_vec(),
        12 => CORE_CELLS.iter().chain(&EXTRA_CELLS).copied().collect(),
        _ => return Err(invalid("antennas", format!("layouts exist for 7 or 12 antennas, not {count}"))),
    };
    Ok(cells
        .into_iter()
        .map(|(i, j)| Point::new(i as f64 * spacing, j as f64 * spacing))
        .collect())
}

/// Panel, antenna layout and acquisition settings shared by scenarios.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSpec {
    pub model: ScreenModel,
    pub spacing: f64,
    pub settings: TraceSettings,
    /// Largest |θ| drawn for random poses (rad).
    pub max_rotation: f64,
    /// Largest offset of the left edge from the column-0/1 midpoint, in
    /// spacings.
    pub max_edge_offset: f64,
    pub k: usize,
    pub training_step: f64,
}

impl ScenarioSpec {
    /// 16 × 24 laptop panel at 4 mm pitch probed by a 12 mm lattice. The
    /// spacing is an odd multiple of the pitch so that axis-aligned poses can
    /// put every antenna exactly over a line center.
    pub fn laptop() -> Result<Self> {
        let model = ScreenModel::new(16, 24, 4e-3, SensorParams::chromebook())?;
        let settings = TraceSettings::for_model(&model);
        Ok(Self {
            model,
            spacing: 0.012,
            settings,
            max_rotation: 5f64.to_radians(),
            max_edge_offset: 0.3,
            k: 3,
            training_step: 1e-3,
        })
    }

    /// Calibrated acquisition impairments: 50 mV rms noise against a ~1 V
    /// carrier and ±5 % slot-boundary jitter.
    pub fn with_calibrated_noise(mut self) -> Self {
        self.settings.noise_rms = 0.05;
        self.settings.jitter = 0.05;
        self
    }

    /// Classifier trained on three columns of the panel, four samples per
    /// line pitch.
    pub fn train<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<LineClassifier> {
        let w = self.model.width();
        let set = collect_training_set(&self.model, &[0.25 * w, 0.5 * w, 0.75 * w], self.training_step, &self.settings, rng)?;
        LineClassifier::train(&set, self.k, true)
    }

    /// Random pose with the panel's left edge between lattice columns 0 and 1
    /// and the lattice rows near the panel's vertical middle.
    pub fn random_pose<R: Rng + ?Sized>(&self, rng: &mut R) -> ScreenPose {
        let theta = rng.gen_range(-self.max_rotation..=self.max_rotation);
        let u = rng.gen_range(-self.max_edge_offset..=self.max_edge_offset);
        let v = rng.gen_range(-0.5..=0.5) * self.spacing;
        let anchor = Point::new((0.5 + u) * self.spacing, self.spacing);
        let target = Point::new(0.0, 0.5 * self.model.height() + v);
        anchor_pose(theta, anchor, target)
    }

    /// Axis-aligned pose (`θ = 0`, or `θ = π` when `flipped`) that puts every
    /// on-screen antenna exactly over a line center and a side edge exactly
    /// half-way between lattice columns 0 and 1.
    pub fn exact_pose(&self, flipped: bool) -> ScreenPose {
        let anchor = Point::new(0.5 * self.spacing, self.spacing);
        let y = self.model.line_center(self.model.rows / 2);
        if flipped {
            anchor_pose(PI, anchor, Point::new(self.model.width(), y))
        } else {
            anchor_pose(0.0, anchor, Point::new(0.0, y))
        }
    }

    /// Traces for `antennas` with the panel at `pose`.
    pub fn traces<R: Rng + ?Sized>(&self, pose: ScreenPose, antennas: &[Point], rng: &mut R) -> Result<Vec<EmissionTrace>> {
        let mut m = self.model.clone();
        m.pose = pose;
        antennas.iter().map(|a| emission_trace(&m, *a, &self.settings, rng)).collect()
    }

    /// Locates the panel at `pose` with `count` antennas and returns the
    /// report with its worst error over the seven core probes.
    pub fn run<R: Rng + ?Sized>(&self, clf: &LineClassifier, pose: ScreenPose, count: usize, rng: &mut R) -> Result<(LocateReport, f64)> {
        let antennas = probe_layout(count, self.spacing)?;
        let traces = self.traces(pose, &antennas, rng)?;
        let report = locate_screen(&self.model, &traces, clf, &LocateSettings::for_spacing(self.spacing))?;
        let probes = probe_layout(7, self.spacing)?;
        let err = pose_error(&report.pose, &pose, &probes);
        Ok((report, err))
    }
}

/// Pose with rotation `theta` that maps antenna point `anchor` onto screen
/// point `target`.
pub fn anchor_pose(theta: f64, anchor: Point, target: Point) -> ScreenPose {
    let r = ScreenPose::new(theta, 0.0, 0.0).to_screen(anchor);
    ScreenPose::new(theta, target.x - r.x, target.y - r.y)
}
