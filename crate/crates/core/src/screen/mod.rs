//! Whole-screen model: a TX/RX node grid read out frame by frame.
//!
//! TX lines are the rows. Node `(r, c)` sits at `((c + ½)p, (r + ½)p)` in
//! screen coordinates, so the screen spans `[0, cols·p] × [0, rows·p]`.

pub mod driving;
pub mod emission;
pub mod scan_mode;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::circuit::{exceeds_threshold, transfer_deviation, NoiseInput, SensorParams};
use crate::error::{ensure_positive, invalid, Result};
use crate::field::ElectrodeGeometry;
use crate::geometry::{Point, ScreenPose};
use crate::susceptibility::accumulate;

pub use driving::{CodeMatrix, DrivingKind, DrivingScheme};
pub use emission::{emission_trace, EmissionTrace, TraceSettings};
pub use scan_mode::{run_scan_schedule, step_scan_mode, ScanConstants, ScanEvent, ScanMode, ScanPulse, ScanState};

/// Electrode overlap area assumed for every node (m²).
pub const DEFAULT_NODE_AREA: f64 = 64e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct ScreenModel {
    pub rows: usize,
    pub cols: usize,
    /// Node spacing (m).
    pub pitch: f64,
    pub sensor: SensorParams,
    /// Row-major per-node shift of the minimum detectable ΔC (F); empty means
    /// a uniform panel.
    pub delta_c_offsets: Vec<f64>,
    pub electrode: ElectrodeGeometry,
    pub driving: DrivingScheme,
    /// Antenna-to-screen transform.
    pub pose: ScreenPose,
    pub scan: ScanConstants,
    /// Emission gain applied to antennas outside the panel.
    pub boundary_factor: f64,
    /// Standard deviation of TX-line coupling across lines, in pitches.
    pub coupling_width: f64,
}

impl ScreenModel {
    /// PDM panel with Walsh–Hadamard codes and an identity pose.
    pub fn new(rows: usize, cols: usize, pitch: f64, sensor: SensorParams) -> Result<Self> {
        let electrode = ElectrodeGeometry::with_capacitance(sensor.c_m, DEFAULT_NODE_AREA, 1.0)?;
        let m = Self {
            rows,
            cols,
            pitch,
            driving: DrivingScheme::pdm(rows.max(1))?,
            sensor,
            delta_c_offsets: Vec::new(),
            electrode,
            pose: ScreenPose::IDENTITY,
            scan: ScanConstants::default(),
            boundary_factor: 0.1,
            coupling_width: 0.5,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if self.rows < 2 || self.cols < 2 {
            return Err(invalid("grid", format!("must be at least 2×2, got {}×{}", self.rows, self.cols)));
        }
        ensure_positive("pitch", self.pitch)?;
        self.sensor.validate()?;
        self.electrode.validate()?;
        self.driving.validate(self.rows)?;
        self.scan.validate()?;
        ensure_positive("coupling_width", self.coupling_width)?;
        if !(self.boundary_factor >= 0.0 && self.boundary_factor < 1.0) {
            return Err(invalid("boundary_factor", "must lie in [0, 1)"));
        }
        if !self.delta_c_offsets.is_empty() && self.delta_c_offsets.len() != self.rows * self.cols {
            return Err(invalid("delta_c_offsets", "need one entry per node"));
        }
        Ok(())
    }

    pub fn width(&self) -> f64 {
        self.cols as f64 * self.pitch
    }

    pub fn height(&self) -> f64 {
        self.rows as f64 * self.pitch
    }

    pub fn node_center(&self, row: usize, col: usize) -> Point {
        Point::new((col as f64 + 0.5) * self.pitch, (row as f64 + 0.5) * self.pitch)
    }

    /// Center y of TX line `row`.
    pub fn line_center(&self, row: usize) -> f64 {
        (row as f64 + 0.5) * self.pitch
    }

    /// Screen-coordinate containment, edges inclusive.
    pub fn contains(&self, p: Point) -> bool {
        p.x >= 0.0 && p.x <= self.width() && p.y >= 0.0 && p.y <= self.height()
    }

    /// Node whose cell contains `p`.
    pub fn node_at(&self, p: Point) -> Result<(usize, usize)> {
        if !self.contains(p) {
            return Err(invalid("position", format!("({}, {}) lies outside the screen", p.x, p.y)));
        }
        let r = ((p.y / self.pitch) as usize).min(self.rows - 1);
        let c = ((p.x / self.pitch) as usize).min(self.cols - 1);
        Ok((r, c))
    }

    /// Accumulated-deviation threshold of one node.
    pub fn node_threshold(&self, row: usize, col: usize) -> f64 {
        let base = self.sensor.threshold_n();
        match self.delta_c_offsets.get(row * self.cols + col) {
            Some(off) => {
                let shift = self.sensor.n_cycles as f64 * off / self.sensor.c_s * self.sensor.v_in;
                (base + shift).max(base * 1e-3)
            }
            None => base,
        }
    }
}

/// Finger contact at a screen position.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Touch {
    pub position: Point,
    /// Capacitance change (F).
    pub delta_c: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum FootprintProfile {
    Disc { radius: f64 },
    Gaussian { sigma: f64 },
}

impl FootprintProfile {
    pub fn weight(&self, distance: f64) -> f64 {
        match *self {
            FootprintProfile::Disc { radius } => (distance <= radius) as u8 as f64,
            FootprintProfile::Gaussian { sigma } => (-0.5 * (distance / sigma).powi(2)).exp(),
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            FootprintProfile::Disc { radius } => ensure_positive("radius", radius),
            FootprintProfile::Gaussian { sigma } => ensure_positive("sigma", sigma),
        }
    }
}

/// Spatial field distribution of one IEMI source at the panel surface.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IemiFootprint {
    /// Source center in antenna coordinates.
    pub center: Point,
    pub profile: FootprintProfile,
    /// Field at the center (V/m).
    pub peak_e_z: f64,
    pub f_e: f64,
    /// Interference phase at the start of this frame's sensing window.
    pub phi0: f64,
}

impl IemiFootprint {
    /// Copy with the phase advanced by `dt` seconds.
    pub fn advanced(&self, dt: f64) -> Self {
        Self {
            phi0: (self.phi0 + 2.0 * PI * self.f_e * dt).rem_euclid(2.0 * PI),
            ..*self
        }
    }

    fn validate(&self) -> Result<()> {
        self.profile.validate()?;
        if !(self.peak_e_z.is_finite() && self.peak_e_z >= 0.0) {
            return Err(invalid("peak_e_z", "must be finite and >= 0"));
        }
        NoiseInput::new(0.0, self.f_e, self.phi0).validate()
    }
}

/// One connected group of detected nodes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TouchPoint {
    pub nodes: Vec<(usize, usize)>,
    pub peak: (usize, usize),
    /// Deviation-weighted centroid (screen coordinates).
    pub position: Point,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TouchFrame {
    pub index: u64,
    pub timestamp: f64,
    /// Detected nodes in row-major order.
    pub nodes: Vec<(usize, usize)>,
    pub touches: Vec<TouchPoint>,
    /// Largest node deviation relative to its threshold.
    pub peak_ratio: f64,
}

impl TouchFrame {
    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Accumulated deviation of every node over one sensing window, row-major.
pub fn node_deviations(model: &ScreenModel, touches: &[Touch], iemi: &[IemiFootprint]) -> Result<Vec<f64>> {
    let n = model.sensor.n_cycles;
    let mut dev = vec![0.0; model.rows * model.cols];
    for t in touches {
        if !(t.delta_c.is_finite() && t.delta_c >= 0.0) {
            return Err(invalid("delta_c", "must be finite and >= 0"));
        }
        let (r, c) = model.node_at(t.position)?;
        dev[r * model.cols + c] += n as f64 * transfer_deviation(&model.sensor, model.sensor.v_in, t.delta_c);
    }
    for fp in iemi {
        fp.validate()?;
    }
    for r in 0..model.rows {
        for c in 0..model.cols {
            let at = model.pose.to_antenna(model.node_center(r, c));
            for fp in iemi {
                let w = fp.profile.weight(at.distance(&fp.center));
                if w < 1e-12 {
                    continue;
                }
                let v_n = w * fp.peak_e_z * model.electrode.gap;
                dev[r * model.cols + c] += accumulate(&model.sensor, &NoiseInput::new(v_n, fp.f_e, fp.phi0), n);
            }
        }
    }
    Ok(dev)
}

/// Reads one frame: every node whose accumulated deviation passes its
/// threshold is reported, grouped into 4-connected touches.
pub fn scan_frame(
    model: &ScreenModel,
    index: u64,
    timestamp: f64,
    touches: &[Touch],
    iemi: &[IemiFootprint],
) -> Result<TouchFrame> {
    let dev = node_deviations(model, touches, iemi)?;
    Ok(frame_from_deviations(model, index, timestamp, &dev))
}

pub(crate) fn frame_from_deviations(model: &ScreenModel, index: u64, timestamp: f64, dev: &[f64]) -> TouchFrame {
    let cols = model.cols;
    let mut hit = vec![false; dev.len()];
    let mut peak_ratio = 0.0f64;
    for r in 0..model.rows {
        for c in 0..cols {
            let thr = model.node_threshold(r, c);
            let d = dev[r * cols + c];
            peak_ratio = peak_ratio.max(d.abs() / thr);
            hit[r * cols + c] = exceeds_threshold(d, thr);
        }
    }
    let nodes: Vec<(usize, usize)> = (0..dev.len()).filter(|&i| hit[i]).map(|i| (i / cols, i % cols)).collect();

    let mut seen = vec![false; dev.len()];
    let mut touches = Vec::new();
    for &(r0, c0) in &nodes {
        if seen[r0 * cols + c0] {
            continue;
        }
        let mut group = Vec::new();
        let mut stack = vec![(r0, c0)];
        seen[r0 * cols + c0] = true;
        while let Some((r, c)) = stack.pop() {
            group.push((r, c));
            let mut nb = Vec::with_capacity(4);
            if r > 0 {
                nb.push((r - 1, c));
            }
            if r + 1 < model.rows {
                nb.push((r + 1, c));
            }
            if c > 0 {
                nb.push((r, c - 1));
            }
            if c + 1 < cols {
                nb.push((r, c + 1));
            }
            for (rr, cc) in nb {
                let i = rr * cols + cc;
                if hit[i] && !seen[i] {
                    seen[i] = true;
                    stack.push((rr, cc));
                }
            }
        }
        group.sort_unstable();
        touches.push(touch_point(model, dev, group));
    }
    TouchFrame {
        index,
        timestamp,
        nodes,
        touches,
        peak_ratio,
    }
}

/// Weighted centroid of a group; a shared maximum resolves to the lowest
/// `(row, col)` node among the maxima.
fn touch_point(model: &ScreenModel, dev: &[f64], group: Vec<(usize, usize)>) -> TouchPoint {
    let mag = |&(r, c): &(usize, usize)| dev[r * model.cols + c].abs();
    let max = group.iter().map(mag).fold(0.0, f64::max);
    let maxima: Vec<_> = group.iter().filter(|n| mag(n) == max).copied().collect();
    let peak = maxima[0];
    let position = if maxima.len() > 1 || group.len() == 1 {
        model.node_center(peak.0, peak.1)
    } else {
        let total: f64 = group.iter().map(mag).sum();
        let (sx, sy) = group.iter().fold((0.0, 0.0), |(sx, sy), n| {
            let p = model.node_center(n.0, n.1);
            (sx + mag(n) * p.x, sy + mag(n) * p.y)
        });
        Point::new(sx / total, sy / total)
    };
    TouchPoint { nodes: group, peak, position }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::susceptibility::accumulate_m_cycles;
    use crate::susceptibility::SusceptibilityQuery;

    fn panel() -> ScreenModel {
        ScreenModel::new(8, 6, 5e-3, SensorParams::chromebook()).unwrap()
    }

    #[test]
    fn empty_frame() {
        let f = scan_frame(&panel(), 0, 0.0, &[], &[]).unwrap();
        assert!(f.is_empty() && f.touches.is_empty());
    }

    #[test]
    fn single_finger() {
        let m = panel();
        let t = Touch { position: m.node_center(2, 2), delta_c: 0.2e-12 };
        let f = scan_frame(&m, 0, 0.0, &[t], &[]).unwrap();
        assert_eq!(f.nodes, vec![(2, 2)]);
        assert_eq!(f.touches[0].position, m.node_center(2, 2));
        let weak = Touch { delta_c: 0.05e-12, ..t };
        assert!(scan_frame(&m, 0, 0.0, &[weak], &[]).unwrap().is_empty());
        let outside = Touch { position: Point::new(-1e-3, 0.01), ..t };
        assert!(scan_frame(&m, 0, 0.0, &[outside], &[]).is_err());
    }

    #[test]
    fn footprint_fires_only_under_itself() {
        let m = panel();
        let fp = IemiFootprint {
            center: m.node_center(4, 3),
            profile: FootprintProfile::Disc { radius: m.pitch },
            peak_e_z: 1200.0,
            f_e: 140e3,
            phi0: 1.5 * PI,
        };
        let f = scan_frame(&m, 0, 0.0, &[], &[fp]).unwrap();
        assert!(!f.is_empty());
        // Brute-force oracle per node.
        for r in 0..m.rows {
            for c in 0..m.cols {
                let d = m.node_center(r, c).distance(&fp.center);
                let expected = if d <= m.pitch {
                    let q = SusceptibilityQuery {
                        sensor: m.sensor.clone(),
                        noise: NoiseInput::new(fp.peak_e_z * m.electrode.gap, fp.f_e, fp.phi0),
                        m_cycles: m.sensor.n_cycles,
                    };
                    accumulate_m_cycles(&q).unwrap().abs() >= m.sensor.threshold_n()
                } else {
                    false
                };
                assert_eq!(f.nodes.contains(&(r, c)), expected, "node ({r},{c})");
            }
        }
    }

    #[test]
    fn small_disc_is_local() {
        let m = panel();
        let fp = IemiFootprint {
            center: m.node_center(3, 1),
            profile: FootprintProfile::Disc { radius: 0.49 * m.pitch },
            peak_e_z: 2500.0,
            f_e: 140e3,
            phi0: 1.5 * PI,
        };
        let dev = node_deviations(&m, &[], &[fp]).unwrap();
        for (i, d) in dev.iter().enumerate() {
            assert_eq!(*d != 0.0, i == 3 * m.cols + 1);
        }
    }

    #[test]
    fn plateau_resolves_to_lowest_node() {
        let m = panel();
        let fp = IemiFootprint {
            center: Point::new(m.pitch * 2.0, m.pitch * 2.5),
            profile: FootprintProfile::Disc { radius: 0.6 * m.pitch },
            peak_e_z: 2500.0,
            f_e: 140e3,
            phi0: 1.5 * PI,
        };
        let f = scan_frame(&m, 0, 0.0, &[], &[fp]).unwrap();
        assert_eq!(f.nodes, vec![(2, 1), (2, 2)]);
        assert_eq!(f.touches[0].position, m.node_center(2, 1));
    }

    #[test]
    fn rejects_tiny_grids() {
        assert!(ScreenModel::new(1, 6, 5e-3, SensorParams::chromebook()).is_err());
        assert!(ScreenModel::new(4, 6, 0.0, SensorParams::chromebook()).is_err());
    }
}
