//! Recovers where a panel sits under a probe lattice from emission traces
//! alone, after training a line classifier on the same model.

use iemi_sim::locator::scenario::ScenarioSpec;
use iemi_sim::rng::stream;

fn main() -> iemi_sim::Result<()> {
    let spec = ScenarioSpec::laptop()?.with_calibrated_noise();
    let clf = spec.train(&mut stream(7, 0))?;
    for trial in 0..5 {
        let truth = spec.random_pose(&mut stream(7, 100 + trial));
        for count in [7, 12] {
            let (report, err) = spec.run(&clf, truth, count, &mut stream(7, 200 + trial))?;
            println!(
                "trial {trial} with {count:>2} probes: theta {:+.2} deg, error {:.2} mm, {} edge pairs",
                report.pose.theta.to_degrees(),
                err * 1e3,
                report.boundary_pairs.len()
            );
        }
    }
    Ok(())
}
