//! Which interference frequencies couple best and worst into a sensor, and
//! the reverse problem of reading the sensor timing off observed maxima.

use iemi_sim::susceptibility::{infer_sensor_timing, predict_frequency_sets, Band};

fn main() -> iemi_sim::Result<()> {
    let sets = predict_frequency_sets(70e3, 0.125, Band::new(100e3, 1.2e6))?;
    println!("strongest: {:?}", sets.f_emax);
    println!("blind:     {:?}", sets.f_emin);

    let timing = infer_sensor_timing(&sets.f_emax)?;
    println!("recovered f_sw = {} Hz, D_s = {}", timing.f_sw, timing.d_s);
    Ok(())
}
