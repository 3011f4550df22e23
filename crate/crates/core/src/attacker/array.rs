//! Antenna array under the tabletop.

use serde::{Deserialize, Serialize};

use crate::error::{ensure_positive, Error, Result};
use crate::geometry::{Point, ScreenPose};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AntennaMode {
    Monitor,
    Attack,
    Grounded,
    Floating,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AntennaArray {
    /// Antenna-frame positions (m).
    pub positions: Vec<Point>,
    pub spacing: f64,
    /// Width and height of the populated area (m).
    pub extent: (f64, f64),
    pub modes: Vec<AntennaMode>,
}

impl AntennaArray {
    /// Square lattice from the origin covering `width × height`.
    pub fn grid(width: f64, height: f64, spacing: f64) -> Result<Self> {
        ensure_positive("spacing", spacing)?;
        ensure_positive("width", width)?;
        ensure_positive("height", height)?;
        let nx = (width / spacing + 1e-9).floor() as usize + 1;
        let ny = (height / spacing + 1e-9).floor() as usize + 1;
        let positions: Vec<Point> = (0..ny)
            .flat_map(|j| (0..nx).map(move |i| Point::new(i as f64 * spacing, j as f64 * spacing)))
            .collect();
        let modes = vec![AntennaMode::Monitor; positions.len()];
        Ok(Self { positions, spacing, extent: (width, height), modes })
    }

    /// The 24 cm × 17 cm array.
    pub fn standard(spacing: f64) -> Result<Self> {
        Self::grid(0.24, 0.17, spacing)
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// Drives antenna `index` and grounds all others.
    pub fn arm(&mut self, index: usize) {
        for (i, m) in self.modes.iter_mut().enumerate() {
            *m = if i == index { AntennaMode::Attack } else { AntennaMode::Grounded };
        }
    }

    /// Returns every antenna to monitoring.
    pub fn disarm(&mut self) {
        self.modes.fill(AntennaMode::Monitor);
    }

    pub fn attacking(&self) -> usize {
        self.modes.iter().filter(|m| **m == AntennaMode::Attack).count()
    }

    /// Farthest a target may lie from its nearest mapped antenna: half the
    /// lattice diagonal.
    pub fn coverage_radius(&self) -> f64 {
        self.spacing * std::f64::consts::FRAC_1_SQRT_2 * (1.0 + 1e-9)
    }
}

/// Antenna whose screen-mapped position is nearest to `target`; ties go to
/// the lowest index.
pub fn select_antenna(array: &AntennaArray, pose: &ScreenPose, target: Point) -> Result<usize> {
    let mut best = (f64::INFINITY, usize::MAX);
    for (i, a) in array.positions.iter().enumerate() {
        let d = pose.to_screen(*a).distance(&target);
        if d < best.0 {
            best = (d, i);
        }
    }
    if best.1 == usize::MAX || best.0 > array.coverage_radius() {
        return Err(Error::CoverageGap(format!(
            "nearest antenna is {:.1} mm from target ({:.4}, {:.4}); coverage radius {:.1} mm",
            best.0 * 1e3,
            target.x,
            target.y,
            array.coverage_radius() * 1e3
        )));
    }
    Ok(best.1)
}
