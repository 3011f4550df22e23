//! Config-driven experiments behind the command line tool.
//!
//! Each command renders its complete output in memory so that callers
//! decide where it goes. Text outputs start with a `# config_sha256=` line
//! and JSON outputs carry a `config_sha256` field.

use std::fs;
use std::io::{BufReader, Cursor};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::attacker::{
    detect_injection, execute_campaign, measure_dwell, simulate_episode, Detection, InjectionReport, MonitorStream,
};
use crate::attacker::detector::expected_detection;
use crate::circuit::{simulate_trace, NoiseInput, SimOptions, SwitchSchedule, TouchProfile};
use crate::config::{ExperimentConfig, PoseChoice};
use crate::error::{Error, Result};
use crate::field::{critical_field, plate_voltage_for_field, ElectrodeGeometry};
use crate::geometry::{Point, ScreenPose};
use crate::locator::scenario::{probe_layout, ScenarioSpec};
use crate::locator::{locate_screen, LineClassifier, LocateReport, LocateSettings};
use crate::rng::{stream, stream_id};
use crate::screen::{EmissionTrace, ScanConstants, ScanEvent, TraceSettings};
use crate::susceptibility::{
    infer_sensor_timing_with, predict_frequency_sets, sweep_min_field, write_sweep_csv, Band, FrequencySets,
    SensorTiming,
};

pub const CLASSIFIER_FILE: &str = "classifier.txt";
pub const TRUTH_FILE: &str = "truth.json";

const FAMILY_TRAINING: u32 = 0;
const FAMILY_POSE: u32 = 1;
const FAMILY_TRACES: u32 = 2;
const FAMILY_EPISODES: u32 = 4;

#[derive(Debug, Serialize)]
struct Envelope<'a, T: Serialize> {
    command: &'a str,
    config_sha256: String,
    seed: u64,
    result: T,
}

fn to_json<T: Serialize>(command: &str, cfg: &ExperimentConfig, result: T) -> Result<String> {
    let env = Envelope { command, config_sha256: cfg.hash(), seed: cfg.seed, result };
    let mut s = serde_json::to_string_pretty(&env)?;
    s.push('\n');
    Ok(s)
}

fn hash_line(cfg: &ExperimentConfig) -> String {
    format!("# config_sha256={}\n", cfg.hash())
}

/// Drops leading `#` comment lines.
fn strip_comments(text: &str) -> &str {
    let mut rest = text;
    while rest.starts_with('#') {
        rest = rest.find('\n').map_or("", |i| &rest[i + 1..]);
    }
    rest
}

/// Time-domain sensor waveform as CSV: `time_s,v_o_v,sum_v_t_v`.
pub fn simulate_sensor(cfg: &ExperimentConfig) -> Result<String> {
    let p = cfg.sensor_params()?;
    let s = &cfg.simulation;
    let mut opts = SimOptions::for_cycles(&p, p.n_cycles);
    if let Some(d) = s.duration_s {
        if !(d.is_finite() && d > 0.0) {
            return Err(Error::Config(format!("simulation.duration_s must be > 0, got {d}")));
        }
        opts.duration = d;
    }
    if let Some(dt) = s.dt_s {
        opts.dt = dt;
    }
    opts.record_every = s.record_every;
    let touch = match (s.touch_delta_c_f, s.touch_start_s, s.touch_end_s) {
        (None, _, _) => TouchProfile::None,
        (Some(delta_c), None, None) => TouchProfile::Constant { delta_c },
        (Some(delta_c), start, end) => TouchProfile::Window {
            start: start.unwrap_or(0.0),
            end: end.unwrap_or(f64::INFINITY),
            delta_c,
        },
    };
    let noise = s.noise_v_n_v.map(|v| NoiseInput::new(v, s.noise_f_e_hz, s.noise_phi0_rad));
    let trace = simulate_trace(&p, &SwitchSchedule::for_sensor(&p), touch, noise, opts)?;
    let mut out = hash_line(cfg);
    out.push_str("time_s,v_o_v,sum_v_t_v\n");
    for st in &trace.samples {
        out.push_str(&format!("{},{},{}\n", st.time, st.v_o, st.sum_v_t));
    }
    Ok(out)
}

/// Minimum ghost-touch field per frequency as CSV.
pub fn sweep(cfg: &ExperimentConfig) -> Result<String> {
    let points = sweep_min_field(&cfg.sensor_params()?, &cfg.electrode()?, &cfg.sweep_config())?;
    let mut buf = hash_line(cfg).into_bytes();
    write_sweep_csv(&mut buf, &points)?;
    Ok(String::from_utf8(buf).expect("csv is utf-8"))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CriticalFieldResult {
    pub e_crit_v_per_m: f64,
    pub v_e_v: f64,
    pub delta_c_f: f64,
    pub v_c_v: f64,
    pub area_m2: f64,
    pub eps_r: f64,
    pub plate_gap_m: f64,
    pub screen_thickness_m: f64,
}

pub fn critical_field_result(cfg: &ExperimentConfig) -> Result<CriticalFieldResult> {
    let c = &cfg.critical_field;
    // Only `ε r A` enters the critical field; the gap is a placeholder.
    let g = ElectrodeGeometry::new(c.area_m2, 1.0, c.eps_r)?;
    let e = critical_field(c.delta_c_f * c.v_c_v, &g)?;
    crate::error::ensure_positive("plate_gap_m", c.plate_gap_m)?;
    crate::error::ensure_positive("screen_thickness_m", c.screen_thickness_m)?;
    Ok(CriticalFieldResult {
        e_crit_v_per_m: e,
        v_e_v: plate_voltage_for_field(e, c.plate_gap_m, c.screen_thickness_m),
        delta_c_f: c.delta_c_f,
        v_c_v: c.v_c_v,
        area_m2: c.area_m2,
        eps_r: c.eps_r,
        plate_gap_m: c.plate_gap_m,
        screen_thickness_m: c.screen_thickness_m,
    })
}

pub fn critical_field_cmd(cfg: &ExperimentConfig) -> Result<String> {
    to_json("critical-field", cfg, critical_field_result(cfg)?)
}

pub fn frequency_sets(cfg: &ExperimentConfig) -> Result<FrequencySets> {
    let p = cfg.sensor_params()?;
    let b = &cfg.frequencies;
    predict_frequency_sets(p.f_sw, p.d_s, Band::new(b.band_low_hz, b.band_high_hz))
}

pub fn predict_frequencies(cfg: &ExperimentConfig) -> Result<String> {
    to_json("predict-frequencies", cfg, frequency_sets(cfg)?)
}

pub fn timing(cfg: &ExperimentConfig) -> Result<SensorTiming> {
    infer_sensor_timing_with(&cfg.timing.maxima_hz, cfg.timing.min_harmonic)
}

pub fn infer_timing(cfg: &ExperimentConfig) -> Result<String> {
    to_json("infer-timing", cfg, timing(cfg)?)
}

/// Localization scenario described by the `[screen]` and `[locator]` tables.
pub fn scenario(cfg: &ExperimentConfig) -> Result<ScenarioSpec> {
    let model = cfg.screen_model()?;
    let l = &cfg.locator;
    let mut settings = TraceSettings::for_model(&model);
    settings.noise_rms = l.noise_rms_v;
    settings.jitter = l.jitter;
    Ok(ScenarioSpec {
        model,
        spacing: l.spacing_m,
        settings,
        max_rotation: l.max_rotation_deg.to_radians(),
        max_edge_offset: 0.3,
        k: l.k,
        training_step: l.training_step_m,
    })
}

fn train(cfg: &ExperimentConfig, spec: &ScenarioSpec) -> Result<LineClassifier> {
    spec.train(&mut stream(cfg.seed, stream_id(FAMILY_TRAINING, 0)))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceTruth {
    pub pose: ScreenPose,
    pub antennas: Vec<Point>,
    pub files: Vec<String>,
}

/// Writes one trace file per probe antenna, the trained classifier and the
/// ground-truth pose into `dir`.
pub fn gen_traces(cfg: &ExperimentConfig, dir: &Path) -> Result<TraceTruth> {
    let spec = scenario(cfg)?;
    let pose = match cfg.locator.pose {
        PoseChoice::Random => spec.random_pose(&mut stream(cfg.seed, stream_id(FAMILY_POSE, 0))),
        PoseChoice::Exact => spec.exact_pose(false),
        PoseChoice::ExactFlipped => spec.exact_pose(true),
    };
    let antennas = probe_layout(cfg.locator.antennas, spec.spacing)?;
    let traces = spec.traces(pose, &antennas, &mut stream(cfg.seed, stream_id(FAMILY_TRACES, 0)))?;
    let clf = train(cfg, &spec)?;

    fs::create_dir_all(dir)?;
    let mut files = Vec::new();
    for (i, t) in traces.iter().enumerate() {
        let name = format!("trace_{i:02}.txt");
        let mut buf = hash_line(cfg).into_bytes();
        t.write_to(&mut buf)?;
        fs::write(dir.join(&name), buf)?;
        files.push(name);
    }
    let mut buf = hash_line(cfg).into_bytes();
    clf.save(&mut buf)?;
    fs::write(dir.join(CLASSIFIER_FILE), buf)?;
    let truth = TraceTruth { pose, antennas, files };
    fs::write(dir.join(TRUTH_FILE), to_json("gen-traces", cfg, &truth)?)?;
    Ok(truth)
}

/// Trace files in `dir`, in name order.
pub fn read_traces(dir: &Path) -> Result<Vec<EmissionTrace>> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.file_name()
                .and_then(|n| n.to_str())
                .is_some_and(|n| n.starts_with("trace_") && n.ends_with(".txt"))
        })
        .collect();
    paths.sort();
    paths
        .iter()
        .map(|p| {
            let text = fs::read_to_string(p)?;
            EmissionTrace::read_from(BufReader::new(Cursor::new(strip_comments(&text))))
        })
        .collect()
}

pub fn locate_dir(cfg: &ExperimentConfig, dir: &Path) -> Result<LocateReport> {
    let spec = scenario(cfg)?;
    let traces = read_traces(dir)?;
    let clf_path = dir.join(CLASSIFIER_FILE);
    let clf = if clf_path.exists() {
        let text = fs::read_to_string(&clf_path)?;
        LineClassifier::load(BufReader::new(Cursor::new(strip_comments(&text))))?
    } else {
        train(cfg, &spec)?
    };
    locate_screen(&spec.model, &traces, &clf, &LocateSettings::for_spacing(spec.spacing))
}

/// Pose JSON for the traces in `dir`. The report's wall-clock time is left
/// out so that reruns are byte-identical.
pub fn locate(cfg: &ExperimentConfig, dir: &Path) -> Result<String> {
    let mut report = locate_dir(cfg, dir)?;
    report.elapsed_s = None;
    to_json("locate", cfg, report)
}

pub fn campaign(cfg: &ExperimentConfig) -> Result<InjectionReport> {
    execute_campaign(&cfg.campaign_config()?)
}

pub fn attack(cfg: &ExperimentConfig) -> Result<String> {
    to_json("attack", cfg, campaign(cfg)?)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpisodeRecord {
    pub truth: ScanEvent,
    pub detected: Detection,
    pub dwell_s: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DetectorBenchmark {
    pub episodes: u32,
    pub errors: u32,
    pub records: Vec<EpisodeRecord>,
}

/// Classifies `cfg.detector.episodes` simulated injections, cycling through
/// none, rejected and registered outcomes.
pub fn detector_benchmark(cfg: &ExperimentConfig) -> Result<DetectorBenchmark> {
    let c = ScanConstants::default();
    let kinds = [ScanEvent::None, ScanEvent::TouchRejected, ScanEvent::TouchRegistered];
    let mut records = Vec::with_capacity(cfg.detector.episodes as usize);
    for i in 0..cfg.detector.episodes {
        let truth = kinds[i as usize % kinds.len()];
        let e = simulate_episode(truth, &c, &mut stream(cfg.seed, stream_id(FAMILY_EPISODES, i)))?;
        records.push(EpisodeRecord {
            truth,
            detected: detect_injection(&e.stream, &c),
            dwell_s: measure_dwell(&e.stream, &c),
        });
    }
    let errors = records.iter().filter(|r| r.detected != expected_detection(r.truth)).count() as u32;
    Ok(DetectorBenchmark { episodes: cfg.detector.episodes, errors, records })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StreamDetection {
    pub detected: Detection,
    pub dwell_s: Option<f64>,
}

/// Classifies a recorded monitor stream (JSON `{"pulses": [...], "iemi_off": t}`)
/// or, without one, runs the simulated benchmark.
pub fn detect(cfg: &ExperimentConfig, stream_json: Option<&str>) -> Result<String> {
    match stream_json {
        Some(text) => {
            let s: MonitorStreamFile = serde_json::from_str(text)?;
            let s = MonitorStream { pulses: s.pulses, iemi_off: s.iemi_off };
            let c = ScanConstants::default();
            to_json("detect", cfg, StreamDetection { detected: detect_injection(&s, &c), dwell_s: measure_dwell(&s, &c) })
        }
        None => to_json("detect", cfg, detector_benchmark(cfg)?),
    }
}

#[derive(serde::Deserialize)]
#[serde(deny_unknown_fields)]
struct MonitorStreamFile {
    pulses: Vec<f64>,
    iemi_off: f64,
}
