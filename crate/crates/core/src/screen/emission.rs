//! Synthetic TX emission observed by a probe antenna above the panel.

use std::f64::consts::PI;
use std::io::{BufRead, Write};

use rand::Rng;
use rand_distr::{Distribution, Normal};

use super::driving::DrivingKind;
use super::ScreenModel;
use crate::error::{ensure_positive, invalid, Error, Result};
use crate::geometry::Point;

#[derive(Debug, Clone, PartialEq)]
pub struct EmissionTrace {
    pub sample_rate_hz: u64,
    /// Probe position in antenna coordinates.
    pub antenna: Point,
    /// Volts.
    pub samples: Vec<f64>,
}

impl EmissionTrace {
    pub fn dt(&self) -> f64 {
        1.0 / self.sample_rate_hz as f64
    }

    pub fn duration(&self) -> f64 {
        self.samples.len() as f64 * self.dt()
    }

    pub fn rms(&self) -> f64 {
        if self.samples.is_empty() {
            return 0.0;
        }
        (self.samples.iter().map(|v| v * v).sum::<f64>() / self.samples.len() as f64).sqrt()
    }

    pub fn write_to<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "sample_rate_hz={}", self.sample_rate_hz)?;
        writeln!(out, "antenna_x_m={}", self.antenna.x)?;
        writeln!(out, "antenna_y_m={}", self.antenna.y)?;
        for s in &self.samples {
            writeln!(out, "{s}")?;
        }
        Ok(())
    }

    pub fn read_from<R: BufRead>(input: R) -> Result<Self> {
        let bad = |reason: String| Error::Format { what: "emission trace", reason };
        let mut lines = input.lines();
        let mut header = |key: &str| -> Result<String> {
            let line = lines.next().ok_or_else(|| bad(format!("missing `{key}` header")))??;
            line.strip_prefix(key)
                .and_then(|v| v.strip_prefix('='))
                .map(str::to_owned)
                .ok_or_else(|| bad(format!("expected `{key}=`, found `{line}`")))
        };
        let rate = header("sample_rate_hz")?;
        let x = header("antenna_x_m")?;
        let y = header("antenna_y_m")?;
        let sample_rate_hz: u64 = rate.trim().parse().map_err(|e| bad(format!("sample_rate_hz: {e}")))?;
        if sample_rate_hz == 0 {
            return Err(bad("sample_rate_hz must be > 0".into()));
        }
        let parse = |s: &str, what: &str| s.trim().parse::<f64>().map_err(|e| bad(format!("{what}: {e}")));
        let antenna = Point::new(parse(&x, "antenna_x_m")?, parse(&y, "antenna_y_m")?);
        let mut samples = Vec::new();
        for (i, line) in lines.enumerate() {
            let line = line?;
            if line.is_empty() {
                continue;
            }
            samples.push(parse(&line, &format!("sample {i}"))?);
        }
        Ok(Self { sample_rate_hz, antenna, samples })
    }
}

/// Acquisition and impairment settings for synthetic traces.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceSettings {
    pub sample_rate_hz: u64,
    pub duration: f64,
    /// Additive white gaussian noise (V rms).
    pub noise_rms: f64,
    /// Half-width of the uniform offset applied to each slot boundary, as a
    /// fraction of the slot duration.
    pub jitter: f64,
}

impl TraceSettings {
    /// 1 MSa/s over two frames of `model`, noiseless.
    pub fn for_model(model: &ScreenModel) -> Self {
        Self {
            sample_rate_hz: 1_000_000,
            duration: 2.0 * model.driving.frame_duration(model.rows),
            noise_rms: 0.0,
            jitter: 0.0,
        }
    }
}

/// Probe gain relative to an antenna directly above a line: the line-coupling
/// profile of every TX line, scaled down outside the panel.
pub fn line_couplings(model: &ScreenModel, antenna: Point) -> Vec<f64> {
    let s = model.pose.to_screen(antenna);
    let gain = if model.contains(s) { 1.0 } else { model.boundary_factor };
    let width = model.coupling_width * model.pitch;
    (0..model.rows)
        .map(|j| gain * (-0.5 * ((s.y - model.line_center(j)) / width).powi(2)).exp())
        .collect()
}

/// Simulated probe voltage at `antenna` while the panel scans.
///
/// Each frame is `gap_bits` silent slots followed by the payload: code bits
/// for PDM (all lines on during bit 0 of a Walsh–Hadamard family), one slot
/// per line for SDM. The carrier envelope in a slot is the coupling-weighted
/// sum of the lines that are on.
pub fn emission_trace<R: Rng + ?Sized>(
    model: &ScreenModel,
    antenna: Point,
    settings: &TraceSettings,
    rng: &mut R,
) -> Result<EmissionTrace> {
    model.validate()?;
    let drv = &model.driving;
    let fs = settings.sample_rate_hz as f64;
    if fs < 2.0 * drv.carrier_hz {
        return Err(invalid(
            "sample_rate_hz",
            format!("{fs} Sa/s undersamples the {} Hz carrier", drv.carrier_hz),
        ));
    }
    ensure_positive("duration", settings.duration)?;
    if !(settings.jitter >= 0.0 && settings.jitter < 0.5) {
        return Err(invalid("jitter", "must lie in [0, 0.5)"));
    }
    if !(settings.noise_rms >= 0.0 && settings.noise_rms.is_finite()) {
        return Err(invalid("noise_rms", "must be finite and >= 0"));
    }

    let w = line_couplings(model, antenna);
    let slots = drv.payload_slots(model.rows);
    let envelope: Vec<f64> = (0..slots)
        .map(|b| drv.amplitude * (0..model.rows).map(|j| w[j] * drv.excitation(j, b)).sum::<f64>())
        .collect();

    let tb = drv.bit_duration;
    let frame = drv.frame_duration(model.rows);
    let n = (settings.duration * fs).round() as usize;
    let frames = (settings.duration / frame).ceil() as usize + 1;
    // Boundaries `k = 0..=slots` of every frame, each jittered independently.
    let mut bounds = Vec::with_capacity(frames);
    for f in 0..frames {
        let start = f as f64 * frame + drv.gap_bits as f64 * tb;
        let b: Vec<f64> = (0..=slots)
            .map(|k| {
                let j = if settings.jitter > 0.0 {
                    rng.gen_range(-settings.jitter..=settings.jitter)
                } else {
                    0.0
                };
                start + (k as f64 + j) * tb
            })
            .collect();
        bounds.push(b);
    }
    let noise = (settings.noise_rms > 0.0).then(|| Normal::new(0.0, settings.noise_rms).unwrap());

    let mut samples = Vec::with_capacity(n);
    for i in 0..n {
        let t = i as f64 / fs;
        let f = ((t / frame) as usize).min(frames - 1);
        let b = &bounds[f];
        let env = if t < b[0] || t >= b[slots] {
            0.0
        } else {
            let k = b.partition_point(|&x| x <= t) - 1;
            envelope[k.min(slots - 1)]
        };
        let mut v = env * (2.0 * PI * drv.carrier_hz * t).sin();
        if let Some(d) = &noise {
            v += d.sample(rng);
        }
        samples.push(v);
    }
    Ok(EmissionTrace {
        sample_rate_hz: settings.sample_rate_hz,
        antenna,
        samples,
    })
}

/// Time of the first payload slot of the first frame.
pub fn payload_start(model: &ScreenModel) -> f64 {
    model.driving.gap_bits as f64 * model.driving.bit_duration
}

/// Expected per-bit magnitudes for an antenna exactly above line `row` with
/// no neighbour coupling: the line's unipolar code word.
pub fn code_magnitudes(model: &ScreenModel, row: usize) -> Option<Vec<f64>> {
    match &model.driving.kind {
        DrivingKind::Pdm(c) => Some((0..c.code_len()).map(|b| c.excitation(row, b)).collect()),
        DrivingKind::Sdm => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::SensorParams;
    use crate::screen::DrivingScheme;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn panel() -> ScreenModel {
        ScreenModel::new(16, 24, 4e-3, SensorParams::chromebook()).unwrap()
    }

    #[test]
    fn file_round_trip() {
        let m = panel();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut s = TraceSettings::for_model(&m);
        s.noise_rms = 0.01;
        let t = emission_trace(&m, Point::new(0.01, 0.02), &s, &mut rng).unwrap();
        let mut buf = Vec::new();
        t.write_to(&mut buf).unwrap();
        let back = EmissionTrace::read_from(buf.as_slice()).unwrap();
        assert_eq!(back, t);
        let mut again = Vec::new();
        back.write_to(&mut again).unwrap();
        assert_eq!(buf, again);
        assert!(EmissionTrace::read_from("antenna_x_m=0\n".as_bytes()).is_err());
    }

    #[test]
    fn undersampling_rejected() {
        let m = panel();
        let mut s = TraceSettings::for_model(&m);
        s.sample_rate_hz = 150_000;
        assert!(emission_trace(&m, Point::new(0.01, 0.01), &s, &mut ChaCha8Rng::seed_from_u64(0)).is_err());
    }

    #[test]
    fn sdm_burst_onset_tracks_line() {
        let mut m = panel();
        m.driving = DrivingScheme::sdm();
        let s = TraceSettings::for_model(&m);
        for r in [0, 3, 9, 15] {
            let a = Point::new(0.05, m.line_center(r));
            let t = emission_trace(&m, a, &s, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
            let peak = t.samples.iter().fold(0.0f64, |x, v| x.max(v.abs()));
            let first = t.samples.iter().position(|v| v.abs() >= 0.5 * peak).unwrap();
            let onset = first as f64 * t.dt() - payload_start(&m);
            // A crossing lands within the first carrier half-period of the slot.
            let slot = m.driving.bit_duration;
            assert!(onset >= r as f64 * slot - 1e-12 && onset < r as f64 * slot + 0.5 / m.driving.carrier_hz);
        }
    }

    #[test]
    fn off_screen_attenuated() {
        let m = panel();
        let s = TraceSettings::for_model(&m);
        let on = emission_trace(&m, Point::new(1e-3, m.line_center(5)), &s, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
        let off = emission_trace(&m, Point::new(-1e-3, m.line_center(5)), &s, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
        let ratio = off.rms() / on.rms();
        assert!(ratio <= 0.1 + 1e-12, "{ratio}");
    }
}
