//! Near-field probe traces above a scanning panel. On-screen probes see the
//! driving carrier, off-screen probes only leakage.

use iemi_sim::locator::scenario::{probe_layout, ScenarioSpec};
use iemi_sim::rng::stream;

fn main() -> iemi_sim::Result<()> {
    let spec = ScenarioSpec::laptop()?;
    let pose = spec.exact_pose(false);
    let antennas = probe_layout(12, spec.spacing)?;
    let traces = spec.traces(pose, &antennas, &mut stream(1, 0))?;
    for (a, t) in antennas.iter().zip(&traces) {
        let on = spec.model.contains(pose.to_screen(*a));
        println!("probe ({:.3}, {:.3}) on_screen={on:<5} rms {:.4} V over {:.2} ms", a.x, a.y, t.rms(), t.duration() * 1e3);
    }
    Ok(())
}
