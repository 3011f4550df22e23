//! Field strength needed for a ghost touch, the plate voltage that produces
//! it, and how much a tabletop in between costs.

use iemi_sim::field::{critical_field, ghost_touch_possible, plate_field, plate_voltage_for_field, ElectrodeGeometry, PlateSetup, Tabletop};

fn main() -> iemi_sim::Result<()> {
    // 8 mm square electrode in air; the gap does not enter E_crit.
    let g = ElectrodeGeometry::new(6.4e-5, 1e-3, 1.0)?;
    let q_t = 0.1e-12 * 5.0;
    let e_crit = critical_field(q_t, &g)?;
    let v_e = plate_voltage_for_field(e_crit, 0.01, 0.005);
    println!("E_crit = {e_crit:.1} V/m, plates 1 cm off a 5 mm screen need {v_e:.2} V");

    let plates = PlateSetup { plate_gap: 0.01, screen_thickness: 0.005, v_e: 30.0 };
    let e = plate_field(&plates);
    println!("30 V across the plates: {e:.0} V/m, ghost touch possible: {}", ghost_touch_possible(e, e_crit)?);

    for mm in [0.0, 10.0, 20.0, 30.0] {
        let a = Tabletop::new("acrylic", mm * 1e-3).attenuation()?;
        println!("acrylic {mm:>4} mm: field x {a:.3}, source needed {:.0} V/m", e_crit / a);
    }
    Ok(())
}
