//! Charge-transfer (QT) sensor model.
//!
//! A QT sensor charges the mutual capacitance `C_M` from `V_in` through `R_in`
//! (switch S1), dumps the stored charge into an integrating capacitor `C_s`
//! through `R_s` (switch S2) and periodically resets `C_s` (switch S3). A touch
//! changes `C_M` by `ΔC`; interference appears as a voltage source at the
//! sensor input whose displacement current is integrated while S2 is closed.
//!
//! Two views are provided: closed-form relations for a single transfer, and a
//! fixed-step time-domain simulation that accumulates the baseline-calibrated
//! deviation over a multi-cycle window and compares it against `v_th_n`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{ensure_positive, invalid, Error, Result};

/// Relative slack used when comparing accumulated deviations to a threshold.
///
/// Sums of per-cycle deviations carry rounding error; a sum that equals the
/// threshold analytically must still count as a crossing.
pub const THRESHOLD_REL_EPS: f64 = 1e-9;

/// Circuit constants of one QT sensor channel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SensorParams {
    /// Excitation voltage (V).
    pub v_in: f64,
    /// Charging resistance (Ω).
    pub r_in: f64,
    /// Transfer resistance (Ω).
    pub r_s: f64,
    /// Mutual capacitance of the electrode pair (F).
    pub c_m: f64,
    /// Integrating capacitor (F).
    pub c_s: f64,
    /// Capacitance change produced by a touch (F).
    pub delta_c: f64,
    /// Single-cycle threshold (V).
    pub v_th: f64,
    /// Multi-cycle threshold (V). `None` means `n_cycles * v_th`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v_th_n: Option<f64>,
    /// Switch-cycle frequency (Hz).
    pub f_sw: f64,
    /// Fraction of each cycle spent sensing (S2 closed).
    pub d_s: f64,
    /// Cycles accumulated before each threshold comparison.
    pub n_cycles: u32,
}

impl SensorParams {
    /// Parameters used for the single-sensor waveform study: 5 V excitation,
    /// 1 Ω resistors, 3 pF / 10 pF capacitors, 0.5 pF touch, 2.75 V threshold,
    /// 100 kHz switching.
    ///
    /// The duty cycle and window length are not part of that parameter set;
    /// `d_s = 0.5` and a 16-cycle window are used, with the threshold applied
    /// to the accumulated deviation directly (`v_th_n = v_th`).
    pub fn table1() -> Self {
        Self {
            v_in: 5.0,
            r_in: 1.0,
            r_s: 1.0,
            c_m: 3e-12,
            c_s: 10e-12,
            delta_c: 0.5e-12,
            v_th: 2.75,
            v_th_n: Some(2.75),
            f_sw: 100e3,
            d_s: 0.5,
            n_cycles: 16,
        }
    }

    /// Laptop touchscreen channel: 70 kHz switching at 12.5 % sensing duty,
    /// 0.1 pF minimum detectable change, 8-cycle accumulation.
    pub fn chromebook() -> Self {
        let mut p = Self {
            v_in: 5.0,
            r_in: 1.0,
            r_s: 1.0,
            c_m: 3e-12,
            c_s: 10e-12,
            delta_c: 0.1e-12,
            v_th: 0.0,
            v_th_n: None,
            f_sw: 70e3,
            d_s: 0.125,
            n_cycles: 8,
        };
        p.v_th = p.delta_c / p.c_s * p.v_in;
        p
    }

    pub fn validate(&self) -> Result<()> {
        ensure_positive("v_in", self.v_in)?;
        ensure_positive("r_in", self.r_in)?;
        ensure_positive("r_s", self.r_s)?;
        ensure_positive("c_m", self.c_m)?;
        ensure_positive("c_s", self.c_s)?;
        ensure_positive("f_sw", self.f_sw)?;
        ensure_positive("v_th", self.v_th)?;
        if !self.delta_c.is_finite() || self.delta_c < 0.0 {
            return Err(invalid("delta_c", "must be finite and >= 0"));
        }
        if !(self.d_s > 0.0 && self.d_s < 1.0) {
            return Err(invalid("d_s", format!("must lie in (0, 1), got {}", self.d_s)));
        }
        if self.n_cycles == 0 {
            return Err(invalid("n_cycles", "must be >= 1"));
        }
        if let Some(v) = self.v_th_n {
            ensure_positive("v_th_n", v)?;
        }
        Ok(())
    }

    /// Threshold applied to the accumulated deviation of one window.
    pub fn threshold_n(&self) -> f64 {
        self.v_th_n
            .unwrap_or(self.n_cycles as f64 * self.v_th)
    }

    /// Sensing time `T_s = D_s / f_sw`.
    pub fn sensing_time(&self) -> f64 {
        self.d_s / self.f_sw
    }

    pub fn period(&self) -> f64 {
        1.0 / self.f_sw
    }

    /// `C_M · V_n / C_s`, the amplitude scale of interference-induced deviations.
    pub fn interference_scale(&self, v_n: f64) -> f64 {
        self.c_m * v_n / self.c_s
    }
}

/// Open/close interval of a switch as fractions `[start, end)` of one cycle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub start: f64,
    pub end: f64,
}

impl Interval {
    pub fn new(start: f64, end: f64) -> Self {
        Self { start, end }
    }

    fn contains(&self, phase: f64) -> bool {
        phase >= self.start && phase < self.end
    }

    fn overlaps(&self, other: &Interval) -> bool {
        self.start < other.end && other.start < self.end
    }
}

/// Periodic control waveform for S1 (charge), S2 (sense) and S3 (reset).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SwitchSchedule {
    pub s1: Interval,
    pub s2: Interval,
    /// Active only in the first cycle of each accumulation window.
    pub s3: Interval,
    /// Window length in cycles; `C_s` is reset once per window.
    pub reset_every: u32,
}

/// Instantaneous switch configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SwitchState {
    pub s1: bool,
    pub s2: bool,
    pub s3: bool,
    pub cycle: u64,
}

impl SwitchSchedule {
    /// S1 closed for the first `1 - d_s` of the cycle, S2 for the final `d_s`,
    /// S3 pulsing at the start of each window.
    pub fn for_sensor(p: &SensorParams) -> Self {
        let charge_end = 1.0 - p.d_s;
        Self {
            s1: Interval::new(0.0, charge_end),
            s2: Interval::new(charge_end, 1.0),
            s3: Interval::new(0.0, (0.05f64).min(charge_end / 2.0)),
            reset_every: p.n_cycles,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, iv) in [("s1", self.s1), ("s2", self.s2), ("s3", self.s3)] {
            if !(0.0 <= iv.start && iv.start < iv.end && iv.end <= 1.0) {
                return Err(invalid(name, format!("interval [{}, {}) outside one cycle", iv.start, iv.end)));
            }
        }
        if self.s1.overlaps(&self.s2) {
            return Err(invalid("s2", "S1 and S2 must never be closed together"));
        }
        if self.s3.overlaps(&self.s2) {
            return Err(invalid("s3", "S3 may only close while S2 is open"));
        }
        if self.reset_every == 0 {
            return Err(invalid("reset_every", "must be >= 1"));
        }
        Ok(())
    }

    pub fn state_at(&self, t: f64, f_sw: f64) -> SwitchState {
        let x = t * f_sw;
        let cycle = x.floor().max(0.0);
        let phase = x - cycle;
        let cycle = cycle as u64;
        SwitchState {
            s1: self.s1.contains(phase),
            s2: self.s2.contains(phase),
            s3: cycle % self.reset_every as u64 == 0 && self.s3.contains(phase),
            cycle,
        }
    }

    /// Time at which S2 first closes; interference phase is referenced to it.
    pub fn sense_origin(&self, f_sw: f64) -> f64 {
        self.s2.start / f_sw
    }
}

/// Sinusoidal interference voltage at the sensor input.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseInput {
    /// Amplitude (V).
    pub v_n: f64,
    /// Interference frequency (Hz).
    pub f_e: f64,
    /// Phase of the noise current relative to the closing edge of S2 (rad).
    pub phi0: f64,
}

impl NoiseInput {
    pub fn new(v_n: f64, f_e: f64, phi0: f64) -> Self {
        Self { v_n, f_e, phi0 }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.v_n.is_finite() || self.v_n < 0.0 {
            return Err(invalid("v_n", "must be finite and >= 0"));
        }
        ensure_positive("f_e", self.f_e)?;
        if !self.phi0.is_finite() {
            return Err(invalid("phi0", "must be finite"));
        }
        Ok(())
    }

    /// Source voltage at time `t` after the phase reference, chosen so the
    /// displacement current `C_M dV/dt` is `2π f_E C_M V_n cos(2π f_E t + φ0)`.
    pub fn voltage(&self, t: f64) -> f64 {
        self.v_n * (2.0 * PI * self.f_e * t + self.phi0).sin()
    }

    /// `dV/dt` at time `t` after the phase reference.
    pub fn slope(&self, t: f64) -> f64 {
        2.0 * PI * self.f_e * self.v_n * (2.0 * PI * self.f_e * t + self.phi0).cos()
    }
}

/// Voltage across `C_M` after charging for `t` seconds.
pub fn charge_voltage(p: &SensorParams, t: f64) -> f64 {
    p.v_in * (1.0 - (-t / (p.r_in * p.c_m)).exp())
}

/// Integrator output after a complete transfer from a capacitor of
/// `C_M + delta_c_effective` charged to `v_c`.
pub fn transfer_output(p: &SensorParams, v_c: f64, delta_c_effective: f64) -> f64 {
    -((p.c_m + delta_c_effective) / p.c_s) * v_c
}

/// Output deviation `V_T` caused by a capacitance change alone.
pub fn transfer_deviation(p: &SensorParams, v_c: f64, delta_c: f64) -> f64 {
    -(delta_c / p.c_s) * v_c
}

/// Applies the multi-cycle touch criterion `|Σ v_T| >= v_th_n` to one window.
pub fn detect_touch(deviations: &[f64], p: &SensorParams) -> Result<bool> {
    if deviations.len() != p.n_cycles as usize {
        return Err(Error::Precondition(format!(
            "expected {} per-cycle deviations, got {}",
            p.n_cycles,
            deviations.len()
        )));
    }
    let sum: f64 = deviations.iter().sum();
    Ok(exceeds_threshold(sum, p.threshold_n()))
}

pub(crate) fn exceeds_threshold(value: f64, threshold: f64) -> bool {
    value.abs() >= threshold * (1.0 - THRESHOLD_REL_EPS)
}

/// Capacitance change applied by a finger over time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TouchProfile {
    None,
    Constant { delta_c: f64 },
    Window { start: f64, end: f64, delta_c: f64 },
}

impl TouchProfile {
    pub fn delta_c_at(&self, t: f64) -> f64 {
        match *self {
            TouchProfile::None => 0.0,
            TouchProfile::Constant { delta_c } => delta_c,
            TouchProfile::Window { start, end, delta_c } => {
                if t >= start && t < end {
                    delta_c
                } else {
                    0.0
                }
            }
        }
    }
}

/// Step size and span of a time-domain run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimOptions {
    pub dt: f64,
    pub duration: f64,
    /// Keep every n-th sample in the returned series (the per-cycle records
    /// are always complete).
    pub record_every: usize,
}

impl SimOptions {
    /// `dt = 1/(1000 f_sw)` over `cycles` switch cycles.
    pub fn for_cycles(p: &SensorParams, cycles: u32) -> Self {
        Self {
            dt: 1.0 / (1000.0 * p.f_sw),
            duration: cycles as f64 / p.f_sw,
            record_every: 1,
        }
    }
}

/// One sample of the simulated sensor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SensorState {
    pub time: f64,
    /// Voltage across `C_M`.
    pub v_c: f64,
    /// Integrator output.
    pub v_o: f64,
    /// Baseline-calibrated deviation accumulated in the current window.
    pub sum_v_t: f64,
    pub cycle: u64,
}

/// Summary of one completed switch cycle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CycleRecord {
    /// 1-based cycle count since the start of the run.
    pub cycle: u64,
    /// 1-based position inside the accumulation window.
    pub window_cycle: u32,
    pub end_time: f64,
    /// Deviation contributed by this cycle.
    pub v_t: f64,
    /// Deviation accumulated in the window so far.
    pub sum_v_t: f64,
    pub detected: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SensorTrace {
    pub samples: Vec<SensorState>,
    pub cycles: Vec<CycleRecord>,
}

impl SensorTrace {
    /// First cycle at which the accumulated deviation met the threshold.
    pub fn first_crossing(&self) -> Option<&CycleRecord> {
        self.cycles.iter().find(|c| c.detected)
    }

    pub fn max_abs_deviation(&self) -> f64 {
        self.samples
            .iter()
            .map(|s| s.sum_v_t.abs())
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct Channel {
    q: f64,
    v_o: f64,
}

impl Channel {
    /// Advances by `dt`; returns the capacitance in use.
    #[allow(clippy::too_many_arguments)]
    fn step(
        &mut self,
        p: &SensorParams,
        sw: SwitchState,
        dc: f64,
        dt: f64,
        noise: Option<(&NoiseInput, f64, f64)>,
    ) -> f64 {
        let c_eff = p.c_m + dc;
        if sw.s3 {
            self.v_o = 0.0;
        }
        if sw.s1 {
            // Exact discretisation of the RC charge; R_in·C_M is far below any
            // practical step.
            let target = c_eff * p.v_in;
            let decay = (-dt / (p.r_in * c_eff)).exp();
            self.q = target + (self.q - target) * decay;
        } else if sw.s2 {
            let decay = (-dt / (p.r_s * c_eff)).exp();
            let remaining = self.q * decay;
            self.v_o -= (self.q - remaining) / p.c_s;
            self.q = remaining;
            if let Some((n, t0, t1)) = noise {
                // Trapezoidal integral of the displacement current.
                let i0 = p.c_m * n.slope(t0);
                let i1 = p.c_m * n.slope(t1);
                self.v_o -= 0.5 * dt * (i0 + i1) / p.c_s;
            }
        }
        c_eff
    }
}

/// Time-domain simulation of the sensor under an optional touch and an
/// optional interference source.
///
/// A noise-free, touch-free baseline is simulated on the same time grid and
/// subtracted, so `sum_v_t` is the deviation the controller would compare
/// against `v_th_n`.
pub fn simulate_trace(
    p: &SensorParams,
    sched: &SwitchSchedule,
    touch: TouchProfile,
    noise: Option<NoiseInput>,
    opts: SimOptions,
) -> Result<SensorTrace> {
    p.validate()?;
    sched.validate()?;
    if let Some(n) = &noise {
        n.validate()?;
    }
    ensure_positive("dt", opts.dt)?;
    let max_dt = 1.0 / (100.0 * p.f_sw);
    if opts.dt > max_dt * (1.0 + 1e-12) {
        return Err(Error::Precondition(format!(
            "dt = {} exceeds the resolution floor 1/(100 f_sw) = {}",
            opts.dt, max_dt
        )));
    }
    let min_duration = sched.reset_every as f64 / p.f_sw;
    if !(opts.duration >= min_duration * (1.0 - 1e-12)) {
        return Err(Error::Precondition(format!(
            "duration = {} shorter than one {}-cycle window ({} s)",
            opts.duration, sched.reset_every, min_duration
        )));
    }
    let record_every = opts.record_every.max(1);
    let steps = (opts.duration / opts.dt).round() as u64;
    let origin = sched.sense_origin(p.f_sw);
    let threshold = p.threshold_n();

    let mut live = Channel::default();
    let mut base = Channel::default();
    let mut samples = Vec::with_capacity((steps as usize) / record_every + 1);
    let mut cycles = Vec::new();
    let mut prev_sum = 0.0;

    for i in 0..steps {
        let t0 = i as f64 * opts.dt;
        let t1 = (i + 1) as f64 * opts.dt;
        let mid = 0.5 * (t0 + t1);
        let sw = sched.state_at(mid, p.f_sw);
        let dc = touch.delta_c_at(mid);
        let noise_args = noise.as_ref().map(|n| (n, t0 - origin, t1 - origin));
        let c_eff = live.step(p, sw, dc, opts.dt, noise_args);
        base.step(p, sw, 0.0, opts.dt, None);

        let sum_v_t = live.v_o - base.v_o;
        if i as usize % record_every == 0 || i + 1 == steps {
            samples.push(SensorState {
                time: t1,
                v_c: live.q / c_eff,
                v_o: live.v_o,
                sum_v_t,
                cycle: sw.cycle,
            });
        }

        let next_cycle = sched.state_at(t1 + 0.5 * opts.dt, p.f_sw).cycle;
        if next_cycle != sw.cycle {
            let window_cycle = (sw.cycle % sched.reset_every as u64) as u32 + 1;
            if window_cycle == 1 {
                prev_sum = 0.0;
            }
            cycles.push(CycleRecord {
                cycle: sw.cycle + 1,
                window_cycle,
                end_time: t1,
                v_t: sum_v_t - prev_sum,
                sum_v_t,
                detected: exceeds_threshold(sum_v_t, threshold),
            });
            prev_sum = sum_v_t;
        }
    }
    Ok(SensorTrace { samples, cycles })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    /// Integrates `I = -C_M dV_c/dt = -C_s dV_o/dt` with `I = V_c / R_s`
    /// using small explicit Euler steps until the charge is exhausted.
    fn transient_transfer(c_m: f64, c_s: f64, r_s: f64, v_c0: f64) -> f64 {
        let tau = r_s * c_m;
        let dt = tau / 20_000.0;
        let mut v_c = v_c0;
        let mut v_o = 0.0;
        let mut t = 0.0;
        while t < 40.0 * tau {
            let i = v_c / r_s;
            v_c -= i / c_m * dt;
            v_o -= i / c_s * dt;
            t += dt;
        }
        v_o
    }

    #[test]
    fn charge_voltage_limits() {
        let p = SensorParams::table1();
        assert_eq!(charge_voltage(&p, 0.0), 0.0);
        let tau = p.r_in * p.c_m;
        assert!((charge_voltage(&p, 100.0 * tau) - 5.0).abs() < 1e-9);
        // 5 (1 - e^-1), evaluated at 30 digits.
        assert_relative_eq!(charge_voltage(&p, tau), 3.160_602_794_142_788_4, max_relative = 1e-14);
    }

    #[test]
    fn transfer_matches_transient_integration() {
        let p = SensorParams::table1();
        let oracle = transient_transfer(3e-12, 10e-12, 1.0, 5.0);
        assert_relative_eq!(oracle, -1.5, max_relative = 1e-3);
        assert_relative_eq!(transfer_output(&p, 5.0, 0.0), oracle, max_relative = 1e-3);

        let touched = transient_transfer(3.5e-12, 10e-12, 1.0, 5.0);
        assert_relative_eq!(transfer_output(&p, 5.0, 0.5e-12), touched, max_relative = 1e-3);
        assert_relative_eq!(transfer_output(&p, 5.0, 0.5e-12), -1.75, max_relative = 1e-12);
        assert_relative_eq!(transfer_deviation(&p, 5.0, 0.5e-12), -0.25, max_relative = 1e-12);
        assert_eq!(transfer_output(&p, 0.0, 0.5e-12), 0.0);
    }

    #[test]
    fn deviation_linear_in_delta_c() {
        let p = SensorParams::table1();
        let base = transient_transfer(p.c_m, p.c_s, p.r_s, 5.0);
        for k in 0..7 {
            let dc = 1e-15 * 10f64.powf(k as f64 * 0.5);
            let model = transfer_deviation(&p, 5.0, dc);
            let oracle = transient_transfer(p.c_m + dc, p.c_s, p.r_s, 5.0) - base;
            assert!(((model - oracle) / oracle).abs() < 1e-6, "dc={dc}: {model} vs {oracle}");
            assert_eq!(transfer_deviation(&p, 5.0, -dc), -model);
        }
    }

    #[test]
    fn detect_touch_boundary_is_inclusive() {
        let mut p = SensorParams::table1();
        p.n_cycles = 11;
        p.v_th_n = Some(2.75);
        assert!(!detect_touch(&[0.0; 11], &p).unwrap());
        assert!(detect_touch(&[0.25; 11], &p).unwrap());
        assert!(detect_touch(&[-0.25; 11], &p).unwrap());
        let mut ten = vec![0.25; 10];
        ten.push(0.0);
        assert!(!detect_touch(&ten, &p).unwrap());
        assert!(detect_touch(&[0.25; 10], &p).is_err());
    }

    #[test]
    fn default_threshold_scales_with_window() {
        let mut p = SensorParams::table1();
        p.v_th_n = None;
        p.n_cycles = 4;
        assert_eq!(p.threshold_n(), 11.0);
    }

    #[test]
    fn schedule_invariants() {
        let p = SensorParams::table1();
        let s = SwitchSchedule::for_sensor(&p);
        s.validate().unwrap();
        for k in 0..2000 {
            let t = k as f64 * 1e-8;
            let st = s.state_at(t, p.f_sw);
            assert!(!(st.s1 && st.s2));
            assert!(!(st.s3 && st.s2));
        }
        let mut bad = s.clone();
        bad.s2 = Interval::new(0.4, 1.0);
        assert!(bad.validate().is_err());
    }

    #[test]
    fn baseline_stays_flat() {
        let p = SensorParams::table1();
        let s = SwitchSchedule::for_sensor(&p);
        let tr = simulate_trace(&p, &s, TouchProfile::None, None, SimOptions::for_cycles(&p, 32)).unwrap();
        assert!(tr.max_abs_deviation() < 1e-9);
        assert!(tr.first_crossing().is_none());
        assert_eq!(tr.cycles.len(), 32);
    }

    #[test]
    fn finger_crosses_at_cycle_eleven() {
        let p = SensorParams::table1();
        let s = SwitchSchedule::for_sensor(&p);
        let tr = simulate_trace(
            &p,
            &s,
            TouchProfile::Constant { delta_c: 0.5e-12 },
            None,
            SimOptions::for_cycles(&p, 16),
        )
        .unwrap();
        let first = tr.first_crossing().unwrap();
        // ceil(2.75 / 0.25) = 11
        assert_eq!(first.cycle, 11);
        for c in &tr.cycles {
            assert_relative_eq!(c.v_t, -0.25, max_relative = 1e-9);
        }
    }

    #[test]
    fn identical_cycles_sum_to_n_times_v_t() {
        let p = SensorParams::table1();
        let s = SwitchSchedule::for_sensor(&p);
        let tr = simulate_trace(
            &p,
            &s,
            TouchProfile::Constant { delta_c: 0.2e-12 },
            None,
            SimOptions::for_cycles(&p, 16),
        )
        .unwrap();
        let last = tr.cycles.last().unwrap();
        assert_eq!(last.window_cycle, 16);
        assert_relative_eq!(last.sum_v_t, 16.0 * tr.cycles[0].v_t, max_relative = 1e-12);
    }

    #[test]
    fn interference_alone_causes_ghost_touch() {
        let p = SensorParams::table1();
        let s = SwitchSchedule::for_sensor(&p);
        let noise = NoiseInput::new(0.8, 100e3, PI / 2.0);
        let tr = simulate_trace(&p, &s, TouchProfile::None, Some(noise), SimOptions::for_cycles(&p, 200)).unwrap();
        let first = tr.first_crossing().expect("ghost touch expected");
        assert!(first.cycle < 200);
        // Closed form -(C_M V_n / C_s)(sin(π + φ0) - sin φ0) = 0.48 V per cycle;
        // the default step leaves a trapezoidal error of order (ω dt)^2 / 12.
        let per_cycle = -(p.c_m * 0.8 / p.c_s) * ((PI + PI / 2.0).sin() - (PI / 2.0).sin());
        for c in tr.cycles.iter().take(16) {
            assert!((c.v_t - per_cycle).abs() < 1e-5 * per_cycle.abs());
        }
    }

    #[test]
    fn halving_dt_keeps_crossing_cycle() {
        let p = SensorParams::table1();
        let s = SwitchSchedule::for_sensor(&p);
        let noise = NoiseInput::new(0.8, 100e3, 1.0);
        let mut opts = SimOptions::for_cycles(&p, 64);
        let a = simulate_trace(&p, &s, TouchProfile::None, Some(noise), opts).unwrap();
        opts.dt /= 2.0;
        let b = simulate_trace(&p, &s, TouchProfile::None, Some(noise), opts).unwrap();
        let ta = a.first_crossing().unwrap().end_time;
        let tb = b.first_crossing().unwrap().end_time;
        assert!((ta - tb).abs() < p.period());
    }

    #[test]
    fn rejects_coarse_step_and_short_run() {
        let p = SensorParams::table1();
        let s = SwitchSchedule::for_sensor(&p);
        let mut opts = SimOptions::for_cycles(&p, 16);
        opts.dt = 1.0 / (50.0 * p.f_sw);
        assert!(simulate_trace(&p, &s, TouchProfile::None, None, opts).is_err());
        let mut opts = SimOptions::for_cycles(&p, 16);
        opts.duration = 5.0 / p.f_sw;
        assert!(simulate_trace(&p, &s, TouchProfile::None, None, opts).is_err());
    }
}
