//! Coupling of an external E field into a touchscreen electrode pair.

use serde::{Deserialize, Serialize};

use crate::circuit::SensorParams;
use crate::error::{ensure_positive, invalid, Error, Result};

/// Vacuum permittivity (F/m).
pub const EPSILON_0: f64 = 8.854_187_812_8e-12;

/// Overlap geometry of a TX/RX electrode pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ElectrodeGeometry {
    /// Overlap area (m²).
    pub area: f64,
    /// Electrode separation (m).
    pub gap: f64,
    /// Relative permittivity of the layer between the electrodes.
    #[serde(default = "default_eps_r")]
    pub eps_r: f64,
}

fn default_eps_r() -> f64 {
    1.0
}

impl ElectrodeGeometry {
    pub fn new(area: f64, gap: f64, eps_r: f64) -> Result<Self> {
        let g = Self { area, gap, eps_r };
        g.validate()?;
        Ok(g)
    }

    /// Geometry with the gap chosen so that the pair has capacitance `c_m`.
    pub fn with_capacitance(c_m: f64, area: f64, eps_r: f64) -> Result<Self> {
        ensure_positive("c_m", c_m)?;
        Self::new(area, EPSILON_0 * eps_r * area / c_m, eps_r)
    }

    pub fn validate(&self) -> Result<()> {
        ensure_positive("area", self.area)?;
        ensure_positive("gap", self.gap)?;
        if !(self.eps_r.is_finite() && self.eps_r >= 1.0) {
            return Err(invalid("eps_r", format!("must be >= 1, got {}", self.eps_r)));
        }
        Ok(())
    }

    /// `ε0 · ε_r · A`
    pub fn permittivity_area(&self) -> f64 {
        EPSILON_0 * self.eps_r * self.area
    }
}

/// Two parallel plates sandwiching a screen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlateSetup {
    /// Distance from each plate to the screen surface (m).
    pub plate_gap: f64,
    /// Screen thickness (m).
    pub screen_thickness: f64,
    /// Voltage across the plates (V).
    pub v_e: f64,
}

impl PlateSetup {
    pub fn validate(&self) -> Result<()> {
        ensure_positive("plate_gap", self.plate_gap)?;
        ensure_positive("screen_thickness", self.screen_thickness)?;
        if !self.v_e.is_finite() {
            return Err(invalid("v_e", "must be finite"));
        }
        Ok(())
    }

    /// Plate-to-plate distance `2d + t`.
    pub fn span(&self) -> f64 {
        2.0 * self.plate_gap + self.screen_thickness
    }
}

/// Field seen by one electrode pair and what it induces.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FieldSample {
    /// Normal component of the external field (V/m).
    pub e_z: f64,
    /// Induced charge (C).
    pub q_n: f64,
    /// Induced voltage across the electrodes (V).
    pub v_n: f64,
}

/// `C_M = ε0 ε_r A / d`
pub fn mutual_capacitance(g: &ElectrodeGeometry) -> f64 {
    g.permittivity_area() / g.gap
}

/// Field needed for the induced charge to match the charge `q_t = ΔC · V_c`
/// moved by a real touch.
pub fn critical_field(q_t: f64, g: &ElectrodeGeometry) -> Result<f64> {
    ensure_positive("q_t", q_t)?;
    g.validate()?;
    Ok(q_t / g.permittivity_area())
}

/// Uniform-field estimate `E_z = V_E / (2d + t)` between two plates.
pub fn plate_field(s: &PlateSetup) -> f64 {
    s.v_e / s.span()
}

/// Plate voltage that produces `e_z` in the given arrangement.
pub fn plate_voltage_for_field(e_z: f64, plate_gap: f64, screen_thickness: f64) -> f64 {
    e_z * (2.0 * plate_gap + screen_thickness)
}

/// A ghost touch is possible once the field reaches the critical value.
pub fn ghost_touch_possible(e_z: f64, e_crit: f64) -> Result<bool> {
    if !(e_z >= 0.0 && e_crit >= 0.0) {
        return Err(Error::Precondition(format!(
            "field strengths must be >= 0 (e_z = {e_z}, e_crit = {e_crit})"
        )));
    }
    Ok(e_z >= e_crit)
}

/// Interference amplitude at the sensor input that matches a real touch:
/// `V_in · ΔC / C_M`.
pub fn noise_input_required(p: &SensorParams) -> f64 {
    p.v_in * p.delta_c / p.c_m
}

/// Voltage and charge induced in an electrode pair by `e_z`.
pub fn induce(e_z: f64, g: &ElectrodeGeometry) -> FieldSample {
    let v_n = e_z * g.gap;
    FieldSample {
        e_z,
        q_n: v_n * mutual_capacitance(g),
        v_n,
    }
}

/// Dielectric or conductive slab placed between an antenna and the screen.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaterialPreset {
    pub name: String,
    pub eps_r_mid: f64,
    pub eps_r_min: f64,
    pub eps_r_max: f64,
    pub conductive: bool,
}

const MATERIALS_CSV: &str = include_str!("../data/materials.csv");

/// Built-in material table.
pub fn material_presets() -> Vec<MaterialPreset> {
    parse_materials(MATERIALS_CSV).expect("bundled material table is well formed")
}

pub fn material(name: &str) -> Result<MaterialPreset> {
    material_presets()
        .into_iter()
        .find(|m| m.name.eq_ignore_ascii_case(name))
        .ok_or_else(|| invalid("material", format!("unknown material preset `{name}`")))
}

/// Parses `name,eps_r_mid,eps_r_min,eps_r_max,conductive` records.
pub fn parse_materials(text: &str) -> Result<Vec<MaterialPreset>> {
    let bad = |reason: String| Error::Format {
        what: "material table",
        reason,
    };
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines.next().ok_or_else(|| bad("empty".into()))?;
    if header.trim() != "name,eps_r_mid,eps_r_min,eps_r_max,conductive" {
        return Err(bad(format!("unexpected header `{header}`")));
    }
    lines
        .map(|line| {
            let cols: Vec<&str> = line.split(',').map(str::trim).collect();
            if cols.len() != 5 {
                return Err(bad(format!("expected 5 columns in `{line}`")));
            }
            let num = |s: &str| s.parse::<f64>().map_err(|e| bad(format!("`{s}`: {e}")));
            let m = MaterialPreset {
                name: cols[0].to_string(),
                eps_r_mid: num(cols[1])?,
                eps_r_min: num(cols[2])?,
                eps_r_max: num(cols[3])?,
                conductive: cols[4]
                    .parse::<bool>()
                    .map_err(|e| bad(format!("`{}`: {e}", cols[4])))?,
            };
            if !(m.eps_r_min <= m.eps_r_mid && m.eps_r_mid <= m.eps_r_max && m.eps_r_min >= 1.0) {
                return Err(bad(format!("inconsistent permittivity range for `{}`", m.name)));
            }
            Ok(m)
        })
        .collect()
}

/// Scalar field attenuation through a tabletop.
///
/// The field reaching the screen is `e_source · factor`, with
/// `factor = (L / (L + thickness))²` for dielectrics and zero for conductors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tabletop {
    pub material: String,
    /// Slab thickness (m).
    pub thickness: f64,
    /// Falloff length `L` (m).
    #[serde(default = "default_falloff")]
    pub falloff_length: f64,
}

fn default_falloff() -> f64 {
    0.02
}

impl Tabletop {
    pub fn new(material: &str, thickness: f64) -> Self {
        Self {
            material: material.to_string(),
            thickness,
            falloff_length: default_falloff(),
        }
    }

    pub fn attenuation(&self) -> Result<f64> {
        if !(self.thickness.is_finite() && self.thickness >= 0.0) {
            return Err(invalid("thickness", "must be >= 0"));
        }
        ensure_positive("falloff_length", self.falloff_length)?;
        let m = material(&self.material)?;
        if m.conductive {
            return Ok(0.0);
        }
        let r = self.falloff_length / (self.falloff_length + self.thickness);
        Ok(r * r)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn plate_8mm() -> ElectrodeGeometry {
        ElectrodeGeometry::new(0.008 * 0.008, 1e-4, 1.0).unwrap()
    }

    #[test]
    fn mutual_capacitance_values() {
        let g = ElectrodeGeometry::new(6.4e-5, 1e-4, 1.0).unwrap();
        // ε0 · 6.4e-5 / 1e-4 at 30 digits
        assert_relative_eq!(mutual_capacitance(&g), 5.666_680_200_192e-12, max_relative = 1e-12);
        let double_a = ElectrodeGeometry { area: 2.0 * g.area, ..g };
        assert_relative_eq!(mutual_capacitance(&double_a), 2.0 * mutual_capacitance(&g), max_relative = 1e-15);
        let double_d = ElectrodeGeometry { gap: 2.0 * g.gap, ..g };
        assert_relative_eq!(mutual_capacitance(&double_d), 0.5 * mutual_capacitance(&g), max_relative = 1e-15);
    }

    #[test]
    fn critical_field_for_laptop_plate() {
        let g = plate_8mm();
        let e = critical_field(0.1e-12 * 5.0, &g).unwrap();
        assert!((e - 883.0).abs() / 883.0 < 0.005, "{e}");
        assert_relative_eq!(e, 882.350_833_885_171, max_relative = 1e-12);
        let e2 = critical_field(0.2e-12 * 5.0, &g).unwrap();
        assert_relative_eq!(e2, 2.0 * e, max_relative = 1e-15);
        let g2 = ElectrodeGeometry { eps_r: 2.0, ..g };
        assert_relative_eq!(critical_field(0.5e-12, &g2).unwrap(), 441.175_416_942_586, max_relative = 1e-12);
        assert!(critical_field(0.0, &g).is_err());
    }

    #[test]
    fn plate_field_values() {
        let s = PlateSetup { plate_gap: 0.01, screen_thickness: 0.005, v_e: 15.0 };
        assert_relative_eq!(plate_field(&s), 600.0, max_relative = 1e-12);
        let s = PlateSetup { v_e: 22.07, ..s };
        assert!((plate_field(&s) - 883.0).abs() < 0.5);
        assert!((plate_voltage_for_field(883.0, 0.01, 0.005) - 22.0).abs() / 22.0 < 0.005);
        let s = PlateSetup { v_e: 0.0, ..s };
        assert_eq!(plate_field(&s), 0.0);
    }

    #[test]
    fn ghost_touch_boundary() {
        assert!(ghost_touch_possible(1200.0, 883.0).unwrap());
        assert!(!ghost_touch_possible(0.0, 883.0).unwrap());
        assert!(ghost_touch_possible(883.0, 883.0).unwrap());
        assert!(ghost_touch_possible(-1.0, 883.0).is_err());
    }

    #[test]
    fn noise_input_requirement() {
        let p = SensorParams::table1();
        let v = noise_input_required(&p);
        assert_relative_eq!(v, 5.0 * 0.5 / 3.0, max_relative = 1e-12);
        assert!((v - 0.8).abs() / v < 0.05);
        let mut q = p.clone();
        q.delta_c = 0.0;
        assert_eq!(noise_input_required(&q), 0.0);
        q.delta_c = q.c_m;
        assert_relative_eq!(noise_input_required(&q), q.v_in, max_relative = 1e-15);
    }

    #[test]
    fn geometry_validation() {
        assert!(ElectrodeGeometry::new(0.0, 1e-4, 1.0).is_err());
        assert!(ElectrodeGeometry::new(1e-4, -1e-4, 1.0).is_err());
        assert!(ElectrodeGeometry::new(1e-4, 1e-4, 0.5).is_err());
        let g = ElectrodeGeometry::with_capacitance(3e-12, 6.4e-5, 1.0).unwrap();
        assert_relative_eq!(mutual_capacitance(&g), 3e-12, max_relative = 1e-14);
    }

    #[test]
    fn material_table_and_attenuation() {
        let all = material_presets();
        assert!(all.iter().any(|m| m.name == "acrylic" && m.eps_r_min == 2.7 && m.eps_r_max == 4.0));
        assert!(material("copper").unwrap().conductive);
        assert_eq!(Tabletop::new("copper", 0.01).attenuation().unwrap(), 0.0);
        let a10 = Tabletop::new("acrylic", 0.010).attenuation().unwrap();
        let a15 = Tabletop::new("acrylic", 0.015).attenuation().unwrap();
        let a20 = Tabletop::new("acrylic", 0.020).attenuation().unwrap();
        assert!(a10 > a15 && a15 > a20 && a20 > 0.0);
        assert_eq!(Tabletop::new("acrylic", 0.0).attenuation().unwrap(), 1.0);
        assert!(Tabletop::new("unobtainium", 0.01).attenuation().is_err());
        assert!(parse_materials("bogus\n").is_err());
    }

    mod props {
        use super::super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn plate_field_round_trip(v in -1e3f64..1e3, d in 1e-4f64..0.1, t in 1e-4f64..0.05) {
                let s = PlateSetup { plate_gap: d, screen_thickness: t, v_e: v };
                let back = plate_field(&s) * s.span();
                prop_assert!((back - v).abs() <= 1e-12 * v.abs().max(1e-300));
            }

            #[test]
            fn critical_field_consistency(q in 1e-15f64..1e-9, a in 1e-6f64..1e-2, eps in 1.0f64..10.0) {
                let g = ElectrodeGeometry::new(a, 1e-4, eps).unwrap();
                let e = critical_field(q, &g).unwrap();
                prop_assert!((e * g.permittivity_area() - q).abs() <= 1e-14 * q);
            }

            #[test]
            fn induced_charge_independent_of_gap(e in 0.0f64..5e3, a in 1e-6f64..1e-3, d in 1e-6f64..1e-2) {
                let g = ElectrodeGeometry::new(a, d, 1.0).unwrap();
                let s = induce(e, &g);
                prop_assert!((s.q_n - g.permittivity_area() * e).abs() <= 1e-12 * (g.permittivity_area() * e).max(1e-300));
                prop_assert!((s.v_n - e * d).abs() <= 1e-15 * (e * d).max(1e-300));
            }
        }
    }
}
