//! Experiment configuration files.
//!
//! A config is TOML with one table per subsystem. Every key carries its unit
//! in its name and unknown keys are rejected, so a typo never silently falls
//! back to a default.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::attacker::{device_profile, CampaignConfig, LocalizationMode};
use crate::circuit::SensorParams;
use crate::error::{Error, Result};
use crate::field::{ElectrodeGeometry, Tabletop};
use crate::screen::{DrivingScheme, ScreenModel, DEFAULT_NODE_AREA};
use crate::susceptibility::{Band, Notch, PhasePolicy, SweepConfig, DEFAULT_FIELD_CAP};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub sensor: SensorSection,
    pub geometry: GeometrySection,
    pub simulation: SimulationSection,
    pub critical_field: CriticalFieldSection,
    pub frequencies: FrequencySection,
    pub timing: TimingSection,
    pub sweep: SweepSection,
    pub screen: ScreenSection,
    pub locator: LocatorSection,
    pub campaign: CampaignSection,
    pub detector: DetectorSection,
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// SHA-256 of the effective configuration (after defaults and command
    /// line overrides), hex encoded.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(canonical))
    }

    pub fn sensor_params(&self) -> Result<SensorParams> {
        self.sensor.build()
    }

    pub fn electrode(&self) -> Result<ElectrodeGeometry> {
        let s = self.sensor_params()?;
        let g = &self.geometry;
        match g.gap_m {
            Some(gap) => ElectrodeGeometry::new(g.area_m2, gap, g.eps_r),
            None => ElectrodeGeometry::with_capacitance(s.c_m, g.area_m2, g.eps_r),
        }
    }

    pub fn screen_model(&self) -> Result<ScreenModel> {
        let s = &self.screen;
        let mut m = ScreenModel::new(s.rows, s.cols, s.pitch_m, self.sensor_params()?)?;
        m.electrode = self.electrode()?;
        if s.driving == DrivingName::Sdm {
            m.driving = DrivingScheme::sdm();
        }
        m.validate()?;
        Ok(m)
    }

    pub fn sweep_config(&self) -> SweepConfig {
        let s = &self.sweep;
        SweepConfig {
            band: Band::new(s.band_low_hz, s.band_high_hz),
            step_hz: s.step_hz,
            e_max_cap: s.cap_v_per_m,
            m_cycles: s.m_cycles,
            phase: match s.phi0_rad {
                Some(phi0) => PhasePolicy::Fixed { phi0 },
                None => PhasePolicy::WorstCase { samples: s.phase_samples },
            },
            notches: s
                .notches_hz
                .iter()
                .map(|[lo, hi]| Notch { center_hz: 0.5 * (lo + hi), half_width_hz: 0.5 * (hi - lo) })
                .collect(),
        }
    }

    pub fn campaign_config(&self) -> Result<CampaignConfig> {
        let c = &self.campaign;
        let profile = device_profile(&c.profile)?;
        let mut cfg = match c.scenario {
            CampaignScenario::Perfect => CampaignConfig::perfect(profile),
            CampaignScenario::SubCritical => {
                let mut cfg = CampaignConfig::perfect(profile);
                cfg.source_field = SUB_CRITICAL_FACTOR * cfg.critical_field()?;
                cfg
            }
            CampaignScenario::ThroughTable => {
                let table = Tabletop::new(&c.tabletop_material, c.tabletop_thickness_m);
                CampaignConfig::through_table(profile, table, THROUGH_TABLE_SOURCE_FIELD)
            }
        };
        cfg.seed = self.seed;
        if let Some(t) = c.trials {
            cfg.trials = t;
        }
        if let Some(v) = c.source_field_v_per_m {
            cfg.source_field = v;
        }
        if let Some(v) = c.spacing_m {
            cfg.spacing = v;
        }
        if let Some(v) = c.position_jitter_m {
            cfg.position_jitter = v;
        }
        if let Some(v) = c.amplitude_jitter {
            cfg.amplitude_jitter = v;
        }
        if let Some(v) = c.localization {
            cfg.localization = v;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Field of the sub-critical scenario relative to the critical field; below
/// the best-phase threshold for every device preset.
pub const SUB_CRITICAL_FACTOR: f64 = 0.6;
/// Source field of the tabletop scenario (V/m).
pub const THROUGH_TABLE_SOURCE_FIELD: f64 = 3000.0;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SensorPreset {
    Table1,
    #[default]
    Chromebook,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SensorSection {
    pub preset: SensorPreset,
    pub v_in_v: Option<f64>,
    pub r_in_ohm: Option<f64>,
    pub r_s_ohm: Option<f64>,
    pub c_m_f: Option<f64>,
    pub c_s_f: Option<f64>,
    pub delta_c_f: Option<f64>,
    pub v_th_v: Option<f64>,
    pub v_th_n_v: Option<f64>,
    pub f_sw_hz: Option<f64>,
    pub d_s: Option<f64>,
    pub n_cycles: Option<u32>,
}

impl SensorSection {
    pub fn build(&self) -> Result<SensorParams> {
        let mut p = match self.preset {
            SensorPreset::Table1 => SensorParams::table1(),
            SensorPreset::Chromebook => SensorParams::chromebook(),
        };
        let set = |dst: &mut f64, v: Option<f64>| {
            if let Some(v) = v {
                *dst = v;
            }
        };
        set(&mut p.v_in, self.v_in_v);
        set(&mut p.r_in, self.r_in_ohm);
        set(&mut p.r_s, self.r_s_ohm);
        set(&mut p.c_m, self.c_m_f);
        set(&mut p.c_s, self.c_s_f);
        set(&mut p.delta_c, self.delta_c_f);
        set(&mut p.v_th, self.v_th_v);
        set(&mut p.f_sw, self.f_sw_hz);
        set(&mut p.d_s, self.d_s);
        if self.v_th_n_v.is_some() {
            p.v_th_n = self.v_th_n_v;
        }
        if let Some(n) = self.n_cycles {
            p.n_cycles = n;
        }
        p.validate()?;
        Ok(p)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeometrySection {
    pub area_m2: f64,
    pub eps_r: f64,
    /// Electrode gap; derived from the sensor's `C_M` when absent.
    pub gap_m: Option<f64>,
}

impl Default for GeometrySection {
    fn default() -> Self {
        Self { area_m2: DEFAULT_NODE_AREA, eps_r: 1.0, gap_m: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulationSection {
    /// Simulated time; `None` runs one accumulation window.
    pub duration_s: Option<f64>,
    /// Time step; `None` uses 1000 steps per switching cycle.
    pub dt_s: Option<f64>,
    pub record_every: usize,
    pub touch_delta_c_f: Option<f64>,
    pub touch_start_s: Option<f64>,
    pub touch_end_s: Option<f64>,
    pub noise_v_n_v: Option<f64>,
    pub noise_f_e_hz: f64,
    pub noise_phi0_rad: f64,
}

impl Default for SimulationSection {
    fn default() -> Self {
        Self {
            duration_s: None,
            dt_s: None,
            record_every: 10,
            touch_delta_c_f: None,
            touch_start_s: None,
            touch_end_s: None,
            noise_v_n_v: None,
            noise_f_e_hz: 100e3,
            noise_phi0_rad: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CriticalFieldSection {
    pub delta_c_f: f64,
    pub v_c_v: f64,
    pub area_m2: f64,
    pub eps_r: f64,
    pub plate_gap_m: f64,
    pub screen_thickness_m: f64,
}

impl Default for CriticalFieldSection {
    fn default() -> Self {
        Self {
            delta_c_f: 0.1e-12,
            v_c_v: 5.0,
            area_m2: DEFAULT_NODE_AREA,
            eps_r: 1.0,
            plate_gap_m: 0.01,
            screen_thickness_m: 0.005,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FrequencySection {
    pub band_low_hz: f64,
    pub band_high_hz: f64,
}

impl Default for FrequencySection {
    fn default() -> Self {
        Self { band_low_hz: 100e3, band_high_hz: 1.2e6 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TimingSection {
    pub maxima_hz: Vec<f64>,
    pub min_harmonic: u32,
}

impl Default for TimingSection {
    fn default() -> Self {
        Self { maxima_hz: vec![140e3, 420e3], min_harmonic: 2 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSection {
    pub band_low_hz: f64,
    pub band_high_hz: f64,
    pub step_hz: f64,
    pub cap_v_per_m: f64,
    pub m_cycles: Option<u32>,
    pub phase_samples: usize,
    /// Fixed interference phase; `None` takes the worst case.
    pub phi0_rad: Option<f64>,
    /// Excluded `[low, high]` ranges.
    pub notches_hz: Vec<[f64; 2]>,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self {
            band_low_hz: 10e3,
            band_high_hz: 1.2e6,
            step_hz: 10e3,
            cap_v_per_m: DEFAULT_FIELD_CAP,
            m_cycles: None,
            phase_samples: 64,
            phi0_rad: None,
            notches_hz: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DrivingName {
    #[default]
    Pdm,
    Sdm,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScreenSection {
    pub rows: usize,
    pub cols: usize,
    pub pitch_m: f64,
    pub driving: DrivingName,
}

impl Default for ScreenSection {
    fn default() -> Self {
        Self { rows: 16, cols: 24, pitch_m: 4e-3, driving: DrivingName::Pdm }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PoseChoice {
    #[default]
    Random,
    Exact,
    ExactFlipped,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LocatorSection {
    pub k: usize,
    pub noise_rms_v: f64,
    /// Slot-boundary jitter as a fraction of the bit duration.
    pub jitter: f64,
    pub antennas: usize,
    pub spacing_m: f64,
    pub training_step_m: f64,
    pub max_rotation_deg: f64,
    pub pose: PoseChoice,
}

impl Default for LocatorSection {
    fn default() -> Self {
        Self {
            k: 3,
            noise_rms_v: 0.05,
            jitter: 0.05,
            antennas: 12,
            spacing_m: 0.012,
            training_step_m: 1e-3,
            max_rotation_deg: 5.0,
            pose: PoseChoice::Random,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CampaignScenario {
    #[default]
    Perfect,
    SubCritical,
    ThroughTable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CampaignSection {
    pub profile: String,
    pub scenario: CampaignScenario,
    pub trials: Option<u32>,
    pub source_field_v_per_m: Option<f64>,
    pub tabletop_material: String,
    pub tabletop_thickness_m: f64,
    pub spacing_m: Option<f64>,
    pub position_jitter_m: Option<f64>,
    pub amplitude_jitter: Option<f64>,
    pub localization: Option<LocalizationMode>,
}

impl Default for CampaignSection {
    fn default() -> Self {
        Self {
            profile: "ipad_pro".into(),
            scenario: CampaignScenario::Perfect,
            trials: None,
            source_field_v_per_m: None,
            tabletop_material: "acrylic".into(),
            tabletop_thickness_m: 0.01,
            spacing_m: None,
            position_jitter_m: None,
            amplitude_jitter: None,
            localization: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DetectorSection {
    pub episodes: u32,
}

impl Default for DetectorSection {
    fn default() -> Self {
        Self { episodes: 500 }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_uses_defaults() {
        let c = ExperimentConfig::parse("").unwrap();
        assert_eq!(c, ExperimentConfig::default());
        assert_eq!(c.sensor_params().unwrap(), SensorParams::chromebook());
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(ExperimentConfig::parse("[sensor]\nf_sw = 1.0\n").is_err());
        assert!(ExperimentConfig::parse("[sensors]\n").is_err());
    }

    #[test]
    fn overrides_apply_and_hash_changes() {
        let a = ExperimentConfig::parse("seed = 3\n[sensor]\npreset = \"table1\"\nf_sw_hz = 50000.0\n").unwrap();
        let p = a.sensor_params().unwrap();
        assert_eq!(p.f_sw, 50e3);
        assert_eq!(p.c_s, 10e-12);
        let b = ExperimentConfig { seed: 4, ..a.clone() };
        assert_ne!(a.hash(), b.hash());
        assert_eq!(a.hash(), a.clone().hash());
    }
}
