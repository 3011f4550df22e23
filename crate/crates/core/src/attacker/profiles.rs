//! Victim device presets.

use serde::Serialize;

use crate::circuit::SensorParams;
use crate::error::{Error, Result};

const PROFILES_CSV: &str = include_str!("../../data/device_profiles.csv");

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeviceProfile {
    pub name: String,
    pub os: String,
    pub attack_frequency_hz: f64,
    /// Field strength that produced ghost touches on the device (V/m).
    pub e_field_v_per_m: f64,
    /// Measured outcomes, kept for comparison only.
    pub reference_success_rate: f64,
    pub reference_qd_x_px: f64,
    pub reference_qd_y_px: f64,
}

impl DeviceProfile {
    /// Sensor whose first maximal-coupling frequency is the attack frequency:
    /// the laptop channel with `f_sw = f_attack / 2` and `D_s = 1/8`.
    pub fn sensor(&self) -> SensorParams {
        SensorParams {
            f_sw: self.attack_frequency_hz / 2.0,
            d_s: 0.125,
            ..SensorParams::chromebook()
        }
    }
}

pub fn device_profiles() -> Vec<DeviceProfile> {
    parse_profiles(PROFILES_CSV).expect("bundled device profiles are well formed")
}

pub fn device_profile(name: &str) -> Result<DeviceProfile> {
    device_profiles()
        .into_iter()
        .find(|p| p.name == name)
        .ok_or_else(|| Error::Config(format!("unknown device profile `{name}`")))
}

pub fn parse_profiles(text: &str) -> Result<Vec<DeviceProfile>> {
    let bad = |line: usize, reason: String| Error::Format {
        what: "device profile table",
        reason: format!("line {line}: {reason}"),
    };
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate().skip(1) {
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').map(str::trim).collect();
        if f.len() != 7 {
            return Err(bad(i + 1, format!("expected 7 fields, got {}", f.len())));
        }
        let num = |k: usize| f[k].parse::<f64>().map_err(|e| bad(i + 1, format!("`{}`: {e}", f[k])));
        out.push(DeviceProfile {
            name: f[0].to_owned(),
            os: f[1].to_owned(),
            attack_frequency_hz: num(2)?,
            e_field_v_per_m: num(3)?,
            reference_success_rate: num(4)?,
            reference_qd_x_px: num(5)?,
            reference_qd_y_px: num(6)?,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::susceptibility::{predict_frequency_sets, Band};

    #[test]
    fn table_rows() {
        let all = device_profiles();
        assert_eq!(all.len(), 8);
        let ipad = device_profile("ipad_pro").unwrap();
        assert_eq!((ipad.attack_frequency_hz, ipad.e_field_v_per_m), (270e3, 1500.0));
        assert!(device_profile("nokia").is_err());
        for p in &all {
            assert!((80e3..=300e3).contains(&p.attack_frequency_hz));
            assert!((800.0..=1500.0).contains(&p.e_field_v_per_m));
            let s = p.sensor();
            let sets = predict_frequency_sets(s.f_sw, s.d_s, Band::new(1e3, 1e6)).unwrap();
            assert_eq!(sets.f_emax[0], p.attack_frequency_hz);
        }
    }
}
