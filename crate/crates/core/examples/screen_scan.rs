//! One frame of a touch panel: a real finger, then an interference footprint
//! strong enough to read as a touch somewhere else.

use iemi_sim::circuit::SensorParams;
use iemi_sim::screen::{scan_frame, FootprintProfile, IemiFootprint, ScreenModel, Touch};
use iemi_sim::Point;

fn main() -> iemi_sim::Result<()> {
    let model = ScreenModel::new(16, 24, 0.004, SensorParams::chromebook())?;
    let finger = Touch { position: model.node_center(4, 6), delta_c: model.sensor.delta_c * 2.0 };
    let f = scan_frame(&model, 0, 0.0, &[finger], &[])?;
    for t in &f.touches {
        println!("finger: {} nodes, centroid ({:.4}, {:.4})", t.nodes.len(), t.position.x, t.position.y);
    }

    let target = Point::new(0.06, 0.03);
    for peak in [500.0, 1500.0, 3000.0] {
        let src = IemiFootprint {
            center: target,
            profile: FootprintProfile::Gaussian { sigma: 0.003 },
            peak_e_z: peak,
            f_e: 2.0 * model.sensor.f_sw,
            phi0: 0.0,
        };
        let f = scan_frame(&model, 1, 0.0, &[], &[src])?;
        let at = f.touches.first().map(|t| format!("({:.4}, {:.4})", t.position.x, t.position.y));
        println!("{peak:>6} V/m: peak ratio {:.2}, touch {}", f.peak_ratio, at.unwrap_or_else(|| "none".into()));
    }
    Ok(())
}
