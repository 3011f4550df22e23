//! Screen localization from emission traces.
//!
//! Each on-screen antenna yields its TX line (the y coordinate on the screen)
//! by nearest-neighbour matching of per-bit magnitudes. Neighbouring antennas
//! whose amplitudes differ sharply straddle a screen edge, which pins the
//! other coordinate. A rigid transform is fitted to all of these.

pub mod boundary;
pub mod features;
pub mod pose;
pub mod scenario;
pub mod segment;

use std::time::Instant;

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{Point, ScreenPose};
use crate::screen::{emission_trace, EmissionTrace, ScreenModel, TraceSettings};

pub use boundary::{detect_boundary, DEFAULT_BOUNDARY_THRESHOLD};
pub use features::{extract_features, FeatureVector, LineClassifier, TrainingSample, TrainingSet};
pub use pose::{pose_error, solve_pose, Axis, PoseConstraint, PoseSolution};
pub use segment::{segment_trace, FrameLayout, Segmentation};

/// Fewest antennas with on-screen signal that `locate_screen` accepts.
pub const MIN_ON_SCREEN: usize = 4;

/// Samples the panel in its own frame along `columns` (screen x), from the
/// first to the last line center every `step` meters, labelling each
/// position with its nearest line.
pub fn collect_training_set<R: Rng + ?Sized>(
    model: &ScreenModel,
    columns: &[f64],
    step: f64,
    settings: &TraceSettings,
    rng: &mut R,
) -> Result<TrainingSet> {
    crate::error::ensure_positive("step", step)?;
    let mut own = model.clone();
    own.pose = ScreenPose::IDENTITY;
    let layout = FrameLayout::from_model(&own);
    let top = own.line_center(own.rows - 1) + 1e-9 * own.pitch;
    let mut samples = Vec::new();
    for &x in columns {
        let mut y = own.line_center(0);
        while y <= top {
            let trace = emission_trace(&own, Point::new(x, y), settings, rng)?;
            let seg = segment_trace(&trace, &layout)?;
            let line = ((y / own.pitch - 0.5).round().max(0.0) as usize).min(own.rows - 1);
            samples.push(TrainingSample { features: extract_features(&trace, &seg).values, line, position: y });
            y += step;
        }
    }
    Ok(TrainingSet { samples, step, columns: columns.to_vec() })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AntennaPrediction {
    pub antenna: Point,
    /// Trace RMS (V).
    pub amplitude: f64,
    pub on_screen: bool,
    pub line: Option<usize>,
    /// Antenna position mapped through the solved pose.
    pub screen: Point,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LocateReport {
    pub pose: ScreenPose,
    pub residual: f64,
    pub antennas: Vec<AntennaPrediction>,
    /// Antenna index pairs that straddle a screen edge.
    pub boundary_pairs: Vec<(usize, usize)>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub elapsed_s: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocateSettings {
    pub boundary_threshold: f64,
    /// Antennas closer than this are neighbours for edge detection (m).
    pub neighbor_radius: f64,
    /// Use the mean sampled position of the nearest training vectors instead
    /// of the classified line's center.
    pub regress_position: bool,
}

impl LocateSettings {
    pub fn for_spacing(spacing: f64) -> Self {
        Self { boundary_threshold: DEFAULT_BOUNDARY_THRESHOLD, neighbor_radius: 1.2 * spacing, regress_position: true }
    }
}

/// Estimates the antenna-to-screen pose of `model`'s panel from one trace per
/// antenna. Only the panel dimensions and driving scheme of `model` are used.
pub fn locate_screen(
    model: &ScreenModel,
    traces: &[EmissionTrace],
    clf: &LineClassifier,
    settings: &LocateSettings,
) -> Result<LocateReport> {
    let started = Instant::now();
    let layout = FrameLayout::from_model(model);
    let amps: Vec<f64> = traces.iter().map(EmissionTrace::rms).collect();
    let max_amp = amps.iter().copied().fold(0.0, f64::max);
    if !(max_amp > 0.0) {
        return Err(Error::LocateFailure("no antenna received any emission".into()));
    }
    let on: Vec<bool> = amps.iter().map(|a| a / max_amp >= settings.boundary_threshold).collect();

    let mut lines = vec![None; traces.len()];
    let mut y_constraints = Vec::new();
    for (i, t) in traces.iter().enumerate() {
        if !on[i] {
            continue;
        }
        let Ok(seg) = segment_trace(t, &layout) else { continue };
        let fv = extract_features(t, &seg).values;
        let line = clf.classify(&fv)?;
        lines[i] = Some(line);
        let y = if settings.regress_position { clf.estimate_position(&fv)? } else { model.line_center(line) };
        y_constraints.push(PoseConstraint::y(t.antenna, y));
    }
    if y_constraints.len() < MIN_ON_SCREEN {
        return Err(Error::LocateFailure(format!(
            "{} antennas with on-screen signal, need at least {MIN_ON_SCREEN}",
            y_constraints.len()
        )));
    }

    let mut pairs = Vec::new();
    for i in 0..traces.len() {
        for j in i + 1..traces.len() {
            if on[i] != on[j]
                && traces[i].antenna.distance(&traces[j].antenna) <= settings.neighbor_radius
                && boundary::is_boundary(amps[i], amps[j], settings.boundary_threshold)
            {
                pairs.push((i, j));
            }
        }
    }

    let theta0 = preliminary_rotation(&y_constraints);
    let rot = ScreenPose::new(theta0, 0.0, 0.0);
    let mut constraints = y_constraints;
    let mut has_x = false;
    for &(i, j) in &pairs {
        let (inside, outside) = if on[i] { (i, j) } else { (j, i) };
        let a_in = traces[inside].antenna;
        let a_out = traces[outside].antenna;
        let mid = a_in.lerp(&a_out, 0.5);
        let d = rot.to_screen(Point::new(a_out.x - a_in.x, a_out.y - a_in.y));
        // Pairs running diagonally to the screen axes do not say which edge they cross.
        if d.x.abs() >= 2.0 * d.y.abs() {
            has_x = true;
            constraints.push(PoseConstraint::x(mid, if d.x < 0.0 { 0.0 } else { model.width() }));
        } else if d.y.abs() >= 2.0 * d.x.abs() {
            constraints.push(PoseConstraint::y(mid, if d.y < 0.0 { 0.0 } else { model.height() }));
        }
    }
    if !has_x {
        return Err(Error::LocateFailure("no antenna pair straddles a side edge of the screen".into()));
    }
    let sol = solve_pose(&constraints).map_err(|e| Error::LocateFailure(e.to_string()))?;

    let antennas = traces
        .iter()
        .enumerate()
        .map(|(i, t)| AntennaPrediction {
            antenna: t.antenna,
            amplitude: amps[i],
            on_screen: on[i],
            line: lines[i],
            screen: sol.pose.to_screen(t.antenna),
        })
        .collect();
    Ok(LocateReport {
        pose: sol.pose,
        residual: sol.residual,
        antennas,
        boundary_pairs: pairs,
        elapsed_s: Some(started.elapsed().as_secs_f64()),
    })
}

/// Rotation that best explains the line constraints alone; a y-only fit
/// determines `θ` up to the translation along x.
fn preliminary_rotation(ys: &[PoseConstraint]) -> f64 {
    let cost = |theta: f64| {
        let (s, c) = f64::sin_cos(theta);
        let pred: Vec<f64> = ys.iter().map(|k| s * k.antenna.x + c * k.antenna.y).collect();
        let off = ys.iter().zip(&pred).map(|(k, p)| k.screen.y - p).sum::<f64>() / ys.len() as f64;
        ys.iter().zip(&pred).map(|(k, p)| (p + off - k.screen.y).powi(2)).sum::<f64>()
    };
    let mut best = (f64::INFINITY, 0.0);
    for i in 0..3600 {
        let t = -std::f64::consts::PI + (i + 1) as f64 * std::f64::consts::PI / 1800.0;
        // Prefer the smaller rotation among equal-cost candidates.
        let e = cost(t) + 1e-18 * t.abs();
        if e < best.0 {
            best = (e, t);
        }
    }
    best.1
}
