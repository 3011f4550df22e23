//! Time-domain run of one mutual-capacitance channel: idle, touched, and
//! driven by a coupled interference tone.

use std::f64::consts::FRAC_PI_2;

use iemi_sim::circuit::{simulate_trace, NoiseInput, SensorParams, SimOptions, SwitchSchedule, TouchProfile};

fn main() -> iemi_sim::Result<()> {
    let p = SensorParams::table1();
    let sched = SwitchSchedule::for_sensor(&p);
    let opts = SimOptions::for_cycles(&p, p.n_cycles);
    println!("threshold over {} cycles: {:.2} V", p.n_cycles, p.threshold_n());

    let cases = [
        ("idle", TouchProfile::None, None),
        ("finger", TouchProfile::Constant { delta_c: p.delta_c }, None),
        ("tone at f_sw", TouchProfile::None, Some(NoiseInput::new(0.8, p.f_sw, FRAC_PI_2))),
    ];
    for (name, touch, noise) in cases {
        let t = simulate_trace(&p, &sched, touch, noise, opts)?;
        match t.first_crossing() {
            Some(c) => println!("{name:>14}: |sum v_T| peaks at {:.3} V, detected in cycle {}", t.max_abs_deviation(), c.cycle),
            None => println!("{name:>14}: |sum v_T| peaks at {:.3} V, no detection", t.max_abs_deviation()),
        }
    }
    Ok(())
}
