//! Turns taps, long presses and a swipe into a schedule of antenna
//! activations on a rotated, offset target.

use iemi_sim::attacker::{device_profile, plan_gesture, AntennaArray, GestureSpec, ScreenBounds};
use iemi_sim::{Point, ScreenPose};

fn main() -> iemi_sim::Result<()> {
    let profile = device_profile("ipad_pro")?;
    let array = AntennaArray::standard(0.01)?;
    let pose = ScreenPose::new(10f64.to_radians(), 0.02, -0.01);
    let bounds = ScreenBounds { width: 0.2, height: 0.15 };

    let gestures = [
        GestureSpec::tap(Point::new(0.05, 0.05)),
        GestureSpec::long_press(Point::new(0.12, 0.08)),
        GestureSpec::swipe(vec![Point::new(0.03, 0.10), Point::new(0.15, 0.10), Point::new(0.15, 0.04)]),
    ];
    for g in &gestures {
        let plan = plan_gesture(g, &profile, &pose, &array, bounds, 1.9e-4)?;
        let antennas: Vec<usize> = plan.steps.iter().map(|s| s.antenna).collect();
        println!("{:?}: {} steps over {:.2} s via antennas {antennas:?}", plan.kind, plan.steps.len(), plan.end_time());
    }

    let off = GestureSpec::tap(Point::new(0.25, 0.05));
    println!("off-screen tap: {}", plan_gesture(&off, &profile, &pose, &array, bounds, 1.9e-4).unwrap_err());
    Ok(())
}
