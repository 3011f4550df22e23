//! Tells a registered ghost touch from a rejected one by watching how long
//! the panel stays in full-rate scanning after the interference stops.

use iemi_sim::attacker::detector::expected_detection;
use iemi_sim::attacker::{detect_injection, measure_dwell, simulate_episode};
use iemi_sim::rng::stream;
use iemi_sim::screen::{ScanConstants, ScanEvent};

fn main() -> iemi_sim::Result<()> {
    let c = ScanConstants::default();
    let mut rng = stream(3, 0);
    let mut correct = 0;
    let n = 60;
    for i in 0..n {
        let truth = [ScanEvent::None, ScanEvent::TouchRejected, ScanEvent::TouchRegistered][i % 3];
        let ep = simulate_episode(truth, &c, &mut rng)?;
        let got = detect_injection(&ep.stream, &c);
        correct += (got == expected_detection(truth)) as usize;
        if i < 3 {
            println!("{truth:?}: dwell {:?} s -> {got:?}", measure_dwell(&ep.stream, &c));
        }
    }
    println!("{correct}/{n} episodes classified correctly");
    Ok(())
}
