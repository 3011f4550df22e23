//! Closed-loop attack campaigns: locate, plan, inject, detect.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, LogNormal, Normal};
use serde::{Deserialize, Serialize};

use super::array::AntennaArray;
use super::detector::{detect_injection, Detection, MonitorStream};
use super::gesture::{plan_gesture, GestureSpec, ScreenBounds, TAP_DURATION};
use super::profiles::DeviceProfile;
use super::stats::quartile_deviation;
use crate::error::{ensure_positive, invalid, Error, Result};
use crate::field::{critical_field, Tabletop};
use crate::geometry::{Point, ScreenPose};
use crate::locator::scenario::{anchor_pose, ScenarioSpec};
use crate::locator::LineClassifier;
use crate::rng::{stream, stream_id, SimRng};
use crate::screen::{
    run_scan_schedule, scan_frame, FootprintProfile, IemiFootprint, ScanEvent, ScreenModel, TouchPoint, TraceSettings,
};

/// 264 ppi.
pub const DEFAULT_PIXELS_PER_METER: f64 = 264.0 / 0.0254;

const FAMILY_TRAINING: u32 = 0;
const FAMILY_POSE: u32 = 1;
const FAMILY_LOCATE: u32 = 2;
const FAMILY_INJECT: u32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LocalizationMode {
    /// Plan with the true pose.
    Known,
    /// Plan with the pose recovered from emission traces.
    Located,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PanelSpec {
    pub rows: usize,
    pub cols: usize,
    pub pitch: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CampaignConfig {
    pub profile: DeviceProfile,
    pub panel: PanelSpec,
    /// Attack array spacing (m).
    pub spacing: f64,
    /// Field produced at the antenna face (V/m).
    pub source_field: f64,
    pub tabletop: Option<Tabletop>,
    pub footprint: FootprintProfile,
    /// Standard deviation of the footprint center around the antenna (m).
    pub position_jitter: f64,
    /// Log-normal sigma of the per-trial field amplitude.
    pub amplitude_jitter: f64,
    pub trials: u32,
    pub seed: u64,
    pub localization: LocalizationMode,
    /// Largest |θ| of the random per-trial pose (rad).
    pub max_rotation: f64,
    /// Largest offset of the panel center from the array center (m).
    pub max_offset: f64,
    /// Screen point to tap; `None` taps the center node.
    pub target: Option<Point>,
    pub pixels_per_meter: f64,
    /// Probe lattice used in located mode (m).
    pub locator_spacing: f64,
    pub injection_duration: f64,
}

impl CampaignConfig {
    /// Ideal attack: true pose, 2 mm array, no jitter, the profile's field
    /// and a footprint that covers only the node under the antenna.
    pub fn perfect(profile: DeviceProfile) -> Self {
        let pitch = 5e-3;
        Self {
            source_field: profile.e_field_v_per_m,
            profile,
            panel: PanelSpec { rows: 30, cols: 40, pitch },
            spacing: 2e-3,
            tabletop: None,
            footprint: FootprintProfile::Disc { radius: 0.7 * pitch },
            position_jitter: 0.0,
            amplitude_jitter: 0.0,
            trials: 50,
            seed: 1,
            localization: LocalizationMode::Known,
            max_rotation: 5f64.to_radians(),
            max_offset: 0.01,
            target: None,
            pixels_per_meter: DEFAULT_PIXELS_PER_METER,
            locator_spacing: 0.012,
            injection_duration: TAP_DURATION,
        }
    }

    /// Realistic attack through a tabletop: the laptop panel is located from
    /// its emissions, then tapped through a 5 mm array with a Gaussian
    /// footprint, positioning and amplitude jitter.
    pub fn through_table(profile: DeviceProfile, tabletop: Tabletop, source_field: f64) -> Self {
        let pitch = 4e-3;
        Self {
            source_field,
            panel: PanelSpec { rows: 16, cols: 24, pitch },
            spacing: 5e-3,
            tabletop: Some(tabletop),
            footprint: FootprintProfile::Gaussian { sigma: 0.75 * pitch },
            position_jitter: 1e-3,
            amplitude_jitter: 0.2,
            trials: 100,
            localization: LocalizationMode::Located,
            ..Self::perfect(profile)
        }
    }

    pub fn model(&self) -> Result<ScreenModel> {
        ScreenModel::new(self.panel.rows, self.panel.cols, self.panel.pitch, self.profile.sensor())
    }

    /// Field at which injected charge matches a real touch on this panel.
    pub fn critical_field(&self) -> Result<f64> {
        let m = self.model()?;
        critical_field(m.sensor.delta_c * m.sensor.v_in, &m.electrode)
    }

    /// Field reaching the panel before amplitude jitter.
    pub fn screen_field(&self) -> Result<f64> {
        let a = match &self.tabletop {
            Some(t) => t.attenuation()?,
            None => 1.0,
        };
        Ok(self.source_field * a)
    }

    pub fn validate(&self) -> Result<()> {
        ensure_positive("spacing", self.spacing)?;
        ensure_positive("pixels_per_meter", self.pixels_per_meter)?;
        ensure_positive("injection_duration", self.injection_duration)?;
        ensure_positive("locator_spacing", self.locator_spacing)?;
        for (name, v) in [
            ("source_field", self.source_field),
            ("position_jitter", self.position_jitter),
            ("amplitude_jitter", self.amplitude_jitter),
            ("max_rotation", self.max_rotation),
            ("max_offset", self.max_offset),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(invalid(name, "must be finite and >= 0"));
            }
        }
        if self.trials == 0 {
            return Err(invalid("trials", "must be >= 1"));
        }
        self.screen_field().map(|_| ())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialRecord {
    pub index: u32,
    pub pose: ScreenPose,
    /// Pose the plan was made with.
    pub planned_pose: Option<ScreenPose>,
    pub target: Point,
    pub antenna: Option<usize>,
    pub attempts: u32,
    pub detection: Detection,
    /// Frames in which the panel reported the injected touch.
    pub touch_frames: u32,
    pub detected: Option<Point>,
    /// Detected minus intended position (px).
    pub offset_px: Option<[f64; 2]>,
    pub success: bool,
    /// Simulated time spent on this trial (s).
    pub elapsed_s: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CampaignSummary {
    pub trials: u32,
    pub successes: u32,
    pub success_rate: f64,
    /// Quartile deviations of detected offsets (px); `None` when nothing
    /// was detected.
    pub qd_x_px: Option<f64>,
    pub qd_y_px: Option<f64>,
    pub critical_field: f64,
    pub screen_field: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InjectionReport {
    pub config: CampaignConfig,
    pub trials: Vec<TrialRecord>,
    pub summary: CampaignSummary,
}

/// Runs `cfg.trials` taps at the target, each with a fresh random pose.
///
/// Every trial draws from its own random streams, so two campaigns that
/// differ only in physical parameters see the same poses and jitter.
pub fn execute_campaign(cfg: &CampaignConfig) -> Result<InjectionReport> {
    cfg.validate()?;
    let model = cfg.model()?;
    let array = AntennaArray::standard(cfg.spacing)?;
    let target = match cfg.target {
        Some(t) => t,
        None => model.node_center(model.rows / 2, model.cols / 2),
    };
    if !model.contains(target) {
        return Err(invalid("target", "must lie on the panel"));
    }
    let locator = match cfg.localization {
        LocalizationMode::Known => None,
        LocalizationMode::Located => {
            let spec = locator_spec(cfg, &model);
            let clf = spec.train(&mut stream(cfg.seed, stream_id(FAMILY_TRAINING, 0)))?;
            Some((spec, clf))
        }
    };
    let e_crit = cfg.critical_field()?;
    let e_screen = cfg.screen_field()?;

    let trials = (0..cfg.trials)
        .map(|i| run_trial(cfg, &model, &array, locator.as_ref(), target, e_screen, i))
        .collect::<Result<Vec<_>>>()?;

    let successes = trials.iter().filter(|t| t.success).count() as u32;
    let xs: Vec<f64> = trials.iter().filter_map(|t| t.offset_px.map(|o| o[0])).collect();
    let ys: Vec<f64> = trials.iter().filter_map(|t| t.offset_px.map(|o| o[1])).collect();
    let summary = CampaignSummary {
        trials: cfg.trials,
        successes,
        success_rate: successes as f64 / cfg.trials as f64,
        qd_x_px: quartile_deviation(&xs),
        qd_y_px: quartile_deviation(&ys),
        critical_field: e_crit,
        screen_field: e_screen,
    };
    Ok(InjectionReport { config: cfg.clone(), trials, summary })
}

fn locator_spec(cfg: &CampaignConfig, model: &ScreenModel) -> ScenarioSpec {
    let settings = TraceSettings::for_model(model);
    ScenarioSpec {
        model: model.clone(),
        spacing: cfg.locator_spacing,
        settings,
        max_rotation: cfg.max_rotation,
        max_edge_offset: 0.3,
        k: 3,
        training_step: model.pitch / 4.0,
    }
    .with_calibrated_noise()
}

fn run_trial(
    cfg: &CampaignConfig,
    model: &ScreenModel,
    array: &AntennaArray,
    locator: Option<&(ScenarioSpec, LineClassifier)>,
    target: Point,
    e_screen: f64,
    index: u32,
) -> Result<TrialRecord> {
    let mut pose_rng = stream(cfg.seed, stream_id(FAMILY_POSE, index));
    let pose = match locator {
        Some((spec, _)) => spec.random_pose(&mut pose_rng),
        None => centered_pose(cfg, model, array, &mut pose_rng),
    };
    let mut rec = TrialRecord {
        index,
        pose,
        planned_pose: None,
        target,
        antenna: None,
        attempts: 0,
        detection: Detection::None,
        touch_frames: 0,
        detected: None,
        offset_px: None,
        success: false,
        elapsed_s: 0.0,
        failure: None,
    };

    let planned = match locator {
        None => pose,
        Some((spec, clf)) => {
            let mut rng = stream(cfg.seed, stream_id(FAMILY_LOCATE, index));
            match spec.run(clf, pose, 12, &mut rng) {
                Ok((report, _)) => report.pose,
                Err(e) => return Ok(failed(rec, e)),
            }
        }
    };
    rec.planned_pose = Some(planned);

    let bounds = ScreenBounds { width: model.width(), height: model.height() };
    let gesture = GestureSpec { duration: cfg.injection_duration, ..GestureSpec::tap(target) };
    let plan = match plan_gesture(&gesture, &cfg.profile, &planned, array, bounds, model.electrode.gap) {
        Ok(p) => p,
        Err(e @ Error::CoverageGap(_)) => return Ok(failed(rec, e)),
        Err(e) => return Err(e),
    };
    let step = &plan.steps[0];
    rec.antenna = Some(step.antenna);

    let mut victim = model.clone();
    victim.pose = pose;
    let mut rng = stream(cfg.seed, stream_id(FAMILY_INJECT, index));
    let position_noise = Normal::new(0.0, cfg.position_jitter).map_err(|e| invalid("position_jitter", e.to_string()))?;
    let amplitude_noise = LogNormal::new(0.0, cfg.amplitude_jitter).map_err(|e| invalid("amplitude_jitter", e.to_string()))?;

    for attempt in 0..=plan.max_retries {
        rec.attempts = attempt + 1;
        let a = array.positions[step.antenna];
        let fp = IemiFootprint {
            center: Point::new(a.x + position_noise.sample(&mut rng), a.y + position_noise.sample(&mut rng)),
            profile: cfg.footprint,
            peak_e_z: e_screen * amplitude_noise.sample(&mut rng),
            f_e: step.noise.f_e,
            phi0: 0.0,
        };
        let outcome = inject(&victim, &fp, step.duration, target, &mut rng)?;
        rec.elapsed_s += outcome.end;
        rec.detection = outcome.detection;
        rec.touch_frames = outcome.touch_frames;
        rec.detected = outcome.first_touch.map(|t| t.position);
        if rec.detection != Detection::Indeterminate {
            break;
        }
    }

    if let Some(d) = rec.detected {
        rec.offset_px = Some([(d.x - target.x) * cfg.pixels_per_meter, (d.y - target.y) * cfg.pixels_per_meter]);
    }
    rec.success = rec.detection == Detection::Registered
        && rec.detected.is_some_and(|d| d.distance(&target) <= model.pitch * (1.0 + 1e-9));
    Ok(rec)
}

fn failed(mut rec: TrialRecord, e: Error) -> TrialRecord {
    rec.failure = Some(e.to_string());
    rec
}

/// Pose putting the panel center over the array center, displaced and
/// rotated at random.
fn centered_pose(cfg: &CampaignConfig, model: &ScreenModel, array: &AntennaArray, rng: &mut SimRng) -> ScreenPose {
    let theta = if cfg.max_rotation > 0.0 { rng.gen_range(-cfg.max_rotation..=cfg.max_rotation) } else { 0.0 };
    let (dx, dy) = if cfg.max_offset > 0.0 {
        (rng.gen_range(-cfg.max_offset..=cfg.max_offset), rng.gen_range(-cfg.max_offset..=cfg.max_offset))
    } else {
        (0.0, 0.0)
    };
    let anchor = Point::new(0.5 * array.extent.0 + dx, 0.5 * array.extent.1 + dy);
    anchor_pose(theta, anchor, Point::new(0.5 * model.width(), 0.5 * model.height()))
}

struct InjectionOutcome {
    detection: Detection,
    touch_frames: u32,
    first_touch: Option<TouchPoint>,
    end: f64,
}

/// Drives `fp` for `duration` while the panel scans, then watches the scan
/// rhythm until it settles.
///
/// The source oscillator is not locked to the panel clock, so each frame
/// sees an independent interference phase.
fn inject(victim: &ScreenModel, fp: &IemiFootprint, duration: f64, target: Point, rng: &mut SimRng) -> Result<InjectionOutcome> {
    let c = &victim.scan;
    let on = rng.gen_range(0.02..0.02 + 1.0 / c.reduced_rate_hz);
    let off = on + duration;
    let end = off + c.dwell_registered_s + 0.2;
    let mut touch_frames = 0;
    let mut first_touch: Option<TouchPoint> = None;
    let mut failure = None;
    let mut frame_index = 0u64;
    let pulses = run_scan_schedule(c, 0.0, end, |t| {
        frame_index += 1;
        if t < on || t > off || failure.is_some() {
            return ScanEvent::None;
        }
        let src = IemiFootprint { phi0: rng.gen_range(0.0..2.0 * PI), ..*fp };
        match scan_frame(victim, frame_index, t, &[], &[src]) {
            Ok(frame) if !frame.touches.is_empty() => {
                touch_frames += 1;
                if first_touch.is_none() {
                    first_touch = frame
                        .touches
                        .into_iter()
                        .min_by(|a, b| a.position.distance(&target).total_cmp(&b.position.distance(&target)));
                }
                ScanEvent::TouchRegistered
            }
            Ok(frame) if frame.peak_ratio >= c.wake_fraction => ScanEvent::TouchRejected,
            Ok(_) => ScanEvent::None,
            Err(e) => {
                failure = Some(e);
                ScanEvent::None
            }
        }
    })?;
    if let Some(e) = failure {
        return Err(e);
    }
    let detection = detect_injection(&MonitorStream::from_schedule(&pulses, off), c);
    Ok(InjectionOutcome { detection, touch_frames, first_touch, end })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::attacker::profiles::device_profile;

    fn ipad() -> DeviceProfile {
        device_profile("ipad_pro").unwrap()
    }

    #[test]
    fn perfect_conditions_always_hit() {
        let cfg = CampaignConfig { trials: 10, ..CampaignConfig::perfect(ipad()) };
        let r = execute_campaign(&cfg).unwrap();
        assert_eq!(r.summary.success_rate, 1.0);
        assert_eq!(r.summary.qd_x_px, Some(0.0));
        assert_eq!(r.summary.qd_y_px, Some(0.0));
    }

    #[test]
    fn sub_critical_never_hits() {
        let mut cfg = CampaignConfig { trials: 10, ..CampaignConfig::perfect(ipad()) };
        cfg.source_field = 0.6 * cfg.critical_field().unwrap();
        let r = execute_campaign(&cfg).unwrap();
        assert_eq!(r.summary.successes, 0);
        assert!(r.trials.iter().all(|t| t.touch_frames == 0));
    }

    #[test]
    fn same_seed_same_report() {
        let cfg = CampaignConfig { trials: 4, ..CampaignConfig::perfect(ipad()) };
        let a = serde_json::to_string(&execute_campaign(&cfg).unwrap()).unwrap();
        let b = serde_json::to_string(&execute_campaign(&cfg).unwrap()).unwrap();
        assert_eq!(a, b);
    }
}
