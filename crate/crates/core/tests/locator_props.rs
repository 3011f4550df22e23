use std::io::BufReader;

use iemi_sim::geometry::{Point, ScreenPose};
use iemi_sim::locator::scenario::{probe_layout, ScenarioSpec};
use iemi_sim::locator::{locate_screen, LineClassifier, LocateSettings, TrainingSample, TrainingSet};
use iemi_sim::rng::stream;
use iemi_sim::Error;
use proptest::prelude::*;

fn synthetic_set() -> TrainingSet {
    let samples = (0..12)
        .map(|i| {
            let a = i as f64 * 0.4;
            TrainingSample { features: vec![a.cos().abs() + 0.1, a.sin().abs() + 0.1, 0.3 + 0.05 * i as f64], line: i / 3, position: i as f64 * 1e-3 }
        })
        .collect();
    TrainingSet { samples, step: 1e-3, columns: vec![0.0] }
}

proptest! {
    #[test]
    fn k1_prediction_ignores_query_scale(q in prop::collection::vec(0.01f64..2.0, 3), c in 1e-3f64..1e3) {
        let clf = LineClassifier::train(&synthetic_set(), 1, true).unwrap();
        let scaled: Vec<f64> = q.iter().map(|v| v * c).collect();
        prop_assert_eq!(clf.classify(&q).unwrap(), clf.classify(&scaled).unwrap());
    }
}

#[test]
fn classifier_file_round_trip() {
    let clf = LineClassifier::train(&synthetic_set(), 3, true).unwrap();
    let mut buf = Vec::new();
    clf.save(&mut buf).unwrap();
    let back = LineClassifier::load(BufReader::new(&buf[..])).unwrap();
    assert_eq!(clf, back);
}

#[test]
fn exact_poses_recovered_with_either_layout() {
    let spec = ScenarioSpec::laptop().unwrap();
    let clf = spec.train(&mut stream(21, 0)).unwrap();
    for flipped in [false, true] {
        for count in [7, 12] {
            let (report, err) = spec.run(&clf, spec.exact_pose(flipped), count, &mut stream(21, 1)).unwrap();
            assert!(err < 1e-6, "flipped={flipped} count={count} err={err}");
            assert!(report.pose.is_proper_rotation(1e-12));
        }
    }
}

#[test]
fn antennas_off_the_panel_fail() {
    let spec = ScenarioSpec::laptop().unwrap();
    let clf = spec.train(&mut stream(22, 0)).unwrap();
    // Panel parked far to the right of every probe.
    let pose = ScreenPose::new(0.0, -1.0, 0.0);
    let antennas = probe_layout(12, spec.spacing).unwrap();
    let traces = spec.traces(pose, &antennas, &mut stream(22, 1)).unwrap();
    let r = locate_screen(&spec.model, &traces, &clf, &LocateSettings::for_spacing(spec.spacing));
    assert!(matches!(r, Err(Error::LocateFailure(_))), "{r:?}");
}

#[test]
fn probe_layouts() {
    let seven = probe_layout(7, 0.01).unwrap();
    let twelve = probe_layout(12, 0.01).unwrap();
    assert_eq!(&twelve[..7], &seven[..]);
    assert!(twelve.contains(&Point::new(0.03, 0.02)));
    assert!(probe_layout(9, 0.01).is_err());
}
