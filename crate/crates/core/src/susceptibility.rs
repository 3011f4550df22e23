//! Frequency susceptibility of a QT sensor to sinusoidal interference.
//!
//! The deviation produced by one sensing window is
//!
//! ```text
//! V_Tn = -(C_M V_n / C_s) · (sin(2π D_s f_E / f_sw + φ0) - sin φ0)
//! ```
//!
//! which vanishes whenever `f_E` is a multiple of `f_sw / D_s`. Across
//! consecutive cycles the interference phase advances by `2π f_E / f_sw`, so
//! only harmonics of `f_sw` accumulate coherently.

use std::f64::consts::PI;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::circuit::{exceeds_threshold, NoiseInput, SensorParams};
use crate::error::{ensure_positive, invalid, Error, Result};
use crate::field::ElectrodeGeometry;

/// Upper limit of the analysed band.
pub const MAX_BAND_HZ: f64 = 10e6;
/// Largest harmonic index searched when inverting observed maxima.
pub const MAX_HARMONIC_INDEX: u32 = 100;
/// Field strength above which a frequency is declared immune.
pub const DEFAULT_FIELD_CAP: f64 = 3000.0;

const INTEGER_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SusceptibilityQuery {
    pub sensor: SensorParams,
    pub noise: NoiseInput,
    pub m_cycles: u32,
}

/// Inclusive frequency band `[low, high]` in hertz.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Band {
    pub low: f64,
    pub high: f64,
}

impl Band {
    pub fn new(low: f64, high: f64) -> Self {
        Self { low, high }
    }

    fn validate(&self) -> Result<()> {
        if !(self.low > 0.0 && self.high <= MAX_BAND_HZ * (1.0 + 1e-12)) {
            return Err(invalid(
                "band",
                format!("must lie within (0, {MAX_BAND_HZ}] Hz, got [{}, {}]", self.low, self.high),
            ));
        }
        Ok(())
    }

    fn is_empty(&self) -> bool {
        self.low > self.high
    }

    fn contains(&self, f: f64) -> bool {
        let slack = 1e-9 * f.abs().max(1.0);
        f >= self.low - slack && f <= self.high + slack
    }
}

/// Frequencies of zero and of maximal single-window coupling.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrequencySets {
    pub f_emax: Vec<f64>,
    pub f_emin: Vec<f64>,
    pub band: Band,
}

/// Closed-form deviation of a single sensing window.
pub fn v_tn_closed(sensor: &SensorParams, noise: &NoiseInput) -> f64 {
    window_term(sensor, noise.v_n, noise.f_e, noise.phi0)
}

fn window_term(sensor: &SensorParams, v_n: f64, f_e: f64, phi: f64) -> f64 {
    let arg = 2.0 * PI * sensor.d_s * f_e / sensor.f_sw;
    -sensor.interference_scale(v_n) * ((arg + phi).sin() - phi.sin())
}

/// Trapezoidal integral of the integrated noise current over `[0, T_s]`.
pub fn v_tn_numeric(sensor: &SensorParams, noise: &NoiseInput, steps: usize) -> Result<f64> {
    if steps < 1000 {
        return Err(Error::Precondition(format!(
            "numeric integration needs at least 1000 steps, got {steps}"
        )));
    }
    let t_s = sensor.sensing_time();
    let h = t_s / steps as f64;
    let omega = 2.0 * PI * noise.f_e;
    let current = |t: f64| (omega * t + noise.phi0).cos();
    let mut acc = 0.5 * (current(0.0) + current(t_s));
    for i in 1..steps {
        acc += current(i as f64 * h);
    }
    let integral = acc * h;
    Ok(-(omega * sensor.c_m * noise.v_n / sensor.c_s) * integral)
}

/// Deviation summed over `m_cycles` consecutive windows, with the phase of
/// cycle `m` advanced to `φ0 + 2π m f_E / f_sw`.
pub fn accumulate_m_cycles(q: &SusceptibilityQuery) -> Result<f64> {
    if q.m_cycles == 0 {
        return Err(invalid("m_cycles", "must be >= 1"));
    }
    q.sensor.validate()?;
    q.noise.validate()?;
    Ok(accumulate(&q.sensor, &q.noise, q.m_cycles))
}

pub(crate) fn accumulate(sensor: &SensorParams, noise: &NoiseInput, m_cycles: u32) -> f64 {
    let step = 2.0 * PI * noise.f_e / sensor.f_sw;
    (0..m_cycles)
        .map(|m| {
            let phi = (noise.phi0 + step * m as f64).rem_euclid(2.0 * PI);
            window_term(sensor, noise.v_n, noise.f_e, phi)
        })
        .sum()
}

fn is_harmonic(f: f64, f_sw: f64) -> bool {
    let ratio = f / f_sw;
    (ratio - ratio.round()).abs() <= INTEGER_TOL * ratio.abs().max(1.0) && ratio.round() >= 1.0
}

/// Enumerates the zero-coupling set `k f_sw / D_s` and the maximal-coupling
/// set `(1/4 + k) f_sw / D_s`, `(3/4 + k) f_sw / D_s` restricted to harmonics
/// of `f_sw`, inside `band`.
pub fn predict_frequency_sets(f_sw: f64, d_s: f64, band: Band) -> Result<FrequencySets> {
    ensure_positive("f_sw", f_sw)?;
    if !(d_s > 0.0 && d_s < 1.0) {
        return Err(invalid("d_s", format!("must lie in (0, 1), got {d_s}")));
    }
    let mut sets = FrequencySets {
        f_emax: Vec::new(),
        f_emin: Vec::new(),
        band,
    };
    if band.is_empty() {
        return Ok(sets);
    }
    band.validate()?;
    let period = f_sw / d_s;
    let mut k = 0u64;
    loop {
        let base = k as f64 * period;
        if base > band.high * (1.0 + 1e-12) {
            break;
        }
        if k >= 1 && band.contains(base) {
            sets.f_emin.push(base);
        }
        for offset in [0.25, 0.75] {
            let f = base + offset * period;
            if band.contains(f) && is_harmonic(f, f_sw) {
                sets.f_emax.push(f);
            }
        }
        k += 1;
    }
    sets.f_emax.sort_by(f64::total_cmp);
    Ok(sets)
}

/// Switching frequency and sensing duty cycle recovered from observations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SensorTiming {
    pub f_sw: f64,
    pub d_s: f64,
}

/// Recovers `(f_sw, D_s)` from frequencies of maximal interference.
///
/// Every maximum is an odd multiple of `u = f_sw / (4 D_s)`; the largest `u`
/// consistent with all observations is used. Each maximum must also be a
/// harmonic of `f_sw`, which leaves `f_sw = u / h`, `D_s = 1 / (4h)` for an
/// integer `h`. The smallest admissible `h >= min_harmonic` (the largest
/// switching frequency) is returned.
pub fn infer_sensor_timing_with(observed_maxima: &[f64], min_harmonic: u32) -> Result<SensorTiming> {
    let mut obs: Vec<f64> = observed_maxima.to_vec();
    if obs.iter().any(|f| !(f.is_finite() && *f > 0.0)) {
        return Err(invalid("observed_maxima", "frequencies must be finite and > 0"));
    }
    obs.sort_by(f64::total_cmp);
    obs.dedup_by(|a, b| (*a - *b).abs() <= INTEGER_TOL * b.abs());
    if obs.len() < 2 {
        return Err(Error::Precondition(
            "at least two distinct interference maxima are required".into(),
        ));
    }
    let max_odd = 4 * MAX_HARMONIC_INDEX + 3;
    let odd_multiple = |f: f64, u: f64| -> Option<u32> {
        let r = f / u;
        let n = r.round();
        ((r - n).abs() <= 1e-6 * r.max(1.0) && n >= 1.0 && n as u32 % 2 == 1 && n as u32 <= max_odd)
            .then_some(n as u32)
    };
    let unit = (0..)
        .map(|i| 2 * i + 1)
        .take_while(|a| *a <= max_odd)
        .map(|a| obs[0] / a as f64)
        .find(|u| obs.iter().all(|f| odd_multiple(*f, *u).is_some()))
        .ok_or_else(|| {
            Error::InferenceFailure(format!(
                "no common quarter-period explains maxima {obs:?} with k <= {MAX_HARMONIC_INDEX}"
            ))
        })?;

    let highest = *obs.last().unwrap();
    for h in min_harmonic.max(1)..=MAX_HARMONIC_INDEX {
        let f_sw = unit / h as f64;
        let d_s = 1.0 / (4.0 * h as f64);
        if highest / f_sw > MAX_HARMONIC_INDEX as f64 + 1e-6 {
            break;
        }
        let sets = predict_frequency_sets(f_sw, d_s, Band::new(obs[0] * (1.0 - 1e-9), highest * (1.0 + 1e-9)))?;
        let all_predicted = obs
            .iter()
            .all(|f| sets.f_emax.iter().any(|g| (f - g).abs() <= 1e-6 * f));
        if all_predicted {
            return Ok(SensorTiming { f_sw, d_s });
        }
    }
    Err(Error::InferenceFailure(format!(
        "maxima {obs:?} are not harmonics of any switching frequency with n <= {MAX_HARMONIC_INDEX}"
    )))
}

/// [`infer_sensor_timing_with`] requiring the lowest maximum to be at least
/// the second harmonic of the switching frequency.
pub fn infer_sensor_timing(observed_maxima: &[f64]) -> Result<SensorTiming> {
    infer_sensor_timing_with(observed_maxima, 2)
}

/// How the unknown interference phase is treated in a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PhasePolicy {
    /// Use the phase that maximises the accumulated deviation over `samples`
    /// evenly spaced values.
    WorstCase { samples: usize },
    Fixed { phi0: f64 },
}

impl Default for PhasePolicy {
    fn default() -> Self {
        PhasePolicy::WorstCase { samples: 64 }
    }
}

/// Band-stop mask modelling controller-internal filtering.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Notch {
    pub center_hz: f64,
    pub half_width_hz: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub band: Band,
    pub step_hz: f64,
    pub e_max_cap: f64,
    /// Windows accumulated per threshold comparison; `None` uses the sensor's
    /// `n_cycles`.
    pub m_cycles: Option<u32>,
    pub phase: PhasePolicy,
    pub notches: Vec<Notch>,
}

impl SweepConfig {
    pub fn new(band: Band, step_hz: f64) -> Self {
        Self {
            band,
            step_hz,
            e_max_cap: DEFAULT_FIELD_CAP,
            m_cycles: None,
            phase: PhasePolicy::default(),
            notches: Vec::new(),
        }
    }
}

/// One row of a minimum-field sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepPoint {
    pub frequency_hz: f64,
    /// Smallest field that produces a ghost touch, or the cap when none does.
    pub min_e_field: f64,
    pub capped: bool,
    pub worst_phase: f64,
}

/// Phase and accumulated deviation per unit of field strength.
fn unit_response(sensor: &SensorParams, geometry: &ElectrodeGeometry, f: f64, m: u32, phase: PhasePolicy) -> (f64, f64) {
    let eval = |phi: f64| accumulate(sensor, &NoiseInput::new(geometry.gap, f, phi), m).abs();
    match phase {
        PhasePolicy::Fixed { phi0 } => (phi0, eval(phi0)),
        PhasePolicy::WorstCase { samples } => {
            let samples = samples.max(1);
            (0..samples)
                .map(|j| 2.0 * PI * j as f64 / samples as f64)
                .map(|phi| (phi, eval(phi)))
                .fold((0.0, f64::NEG_INFINITY), |best, cur| if cur.1 > best.1 { cur } else { best })
        }
    }
}

/// Minimum ghost-touch field at each frequency of the band.
///
/// The field induces `V_n = E · d` across the electrode pair; the smallest
/// `E` whose accumulated deviation reaches `v_th_n` is found by bisection
/// on `[0, e_max_cap]`.
pub fn sweep_min_field(sensor: &SensorParams, geometry: &ElectrodeGeometry, cfg: &SweepConfig) -> Result<Vec<SweepPoint>> {
    sensor.validate()?;
    geometry.validate()?;
    ensure_positive("step_hz", cfg.step_hz)?;
    ensure_positive("e_max_cap", cfg.e_max_cap)?;
    if cfg.band.is_empty() {
        return Ok(Vec::new());
    }
    cfg.band.validate()?;
    let m = cfg.m_cycles.unwrap_or(sensor.n_cycles);
    if m == 0 {
        return Err(invalid("m_cycles", "must be >= 1"));
    }
    let threshold = sensor.threshold_n();
    let count = ((cfg.band.high - cfg.band.low) / cfg.step_hz + 1e-9).floor() as usize + 1;

    let points = (0..count)
        .map(|i| {
            let f = cfg.band.low + i as f64 * cfg.step_hz;
            let (phi, _) = unit_response(sensor, geometry, f, m, cfg.phase);
            let masked = cfg
                .notches
                .iter()
                .any(|n| (f - n.center_hz).abs() <= n.half_width_hz);
            let response = |e: f64| accumulate(sensor, &NoiseInput::new(e * geometry.gap, f, phi), m);
            let fires = |e: f64| exceeds_threshold(response(e), threshold);
            if masked || !fires(cfg.e_max_cap) {
                return SweepPoint {
                    frequency_hz: f,
                    min_e_field: cfg.e_max_cap,
                    capped: true,
                    worst_phase: phi,
                };
            }
            let (mut lo, mut hi) = (0.0, cfg.e_max_cap);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if fires(mid) {
                    hi = mid;
                } else {
                    lo = mid;
                }
                if hi - lo <= 1e-13 * cfg.e_max_cap {
                    break;
                }
            }
            SweepPoint {
                frequency_hz: f,
                min_e_field: hi,
                capped: false,
                worst_phase: phi,
            }
        })
        .collect();
    Ok(points)
}

/// Frequencies of strict local minima (plateaus count once, at their first
/// point) among uncapped sweep rows.
pub fn local_minima(points: &[SweepPoint]) -> Vec<f64> {
    let mut out = Vec::new();
    let n = points.len();
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && points[j + 1].min_e_field == points[i].min_e_field {
            j += 1;
        }
        let v = points[i].min_e_field;
        let left_higher = i == 0 || points[i - 1].min_e_field > v;
        let right_higher = j + 1 == n || points[j + 1].min_e_field > v;
        if !points[i].capped && left_higher && right_higher && n > 1 {
            out.push(points[i].frequency_hz);
        }
        i = j + 1;
    }
    out
}

/// Header row of the sweep CSV.
pub const SWEEP_CSV_HEADER: &str = "frequency_hz,min_e_field_v_per_m,capped,worst_phase_rad";

pub fn write_sweep_csv<W: Write>(mut out: W, points: &[SweepPoint]) -> Result<()> {
    writeln!(out, "{SWEEP_CSV_HEADER}")?;
    for p in points {
        writeln!(
            out,
            "{},{},{},{}",
            p.frequency_hz, p.min_e_field, p.capped, p.worst_phase
        )?;
    }
    Ok(())
}
