use std::f64::consts::PI;

use iemi_sim::circuit::SensorParams;
use iemi_sim::geometry::Point;
use iemi_sim::rng::stream;
use iemi_sim::screen::driving::{decode_pdm, pdm_measure, sdm_scan};
use iemi_sim::screen::{
    emission_trace, node_deviations, run_scan_schedule, scan_frame, CodeMatrix, FootprintProfile, IemiFootprint,
    ScanConstants, ScanEvent, ScreenModel, Touch, TraceSettings,
};
use proptest::prelude::*;

fn laptop() -> ScreenModel {
    ScreenModel::new(16, 24, 4e-3, SensorParams::chromebook()).unwrap()
}

/// Dwell from the end of a constant-outcome injection to the return to
/// reduced scan, read off the controller's own pulse states.
fn dwell(c: &ScanConstants, event: ScanEvent, off: f64) -> f64 {
    let pulses = run_scan_schedule(c, 0.0, off + c.dwell_registered_s + 1.0, |t| {
        if t > 0.05 && t <= off { event } else { ScanEvent::None }
    })
    .unwrap();
    let back = pulses
        .windows(2)
        .find(|w| w[0].time > off && w[0].state == iemi_sim::screen::ScanState::Full && w[1].state == iemi_sim::screen::ScanState::Reduced)
        .map(|w| w[1].time)
        .unwrap();
    back - off
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn sdm_and_pdm_agree(rows in 2usize..20, cols in 2usize..12, seed in any::<u64>()) {
        use rand::Rng;
        let mut rng = stream(seed, 0);
        let field: Vec<f64> = (0..rows * cols).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let codes = CodeMatrix::walsh_hadamard(rows).unwrap();
        let sdm = sdm_scan(rows, cols, &field).unwrap();
        let pdm = decode_pdm(&codes, cols, &pdm_measure(&codes, cols, &field).unwrap()).unwrap();
        for (a, b) in sdm.iter().zip(&pdm) {
            prop_assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn small_footprint_is_local(row in 0usize..16, col in 0usize..24, r in 0.05f64..0.49, e in 100.0f64..3000.0, phi in 0.0f64..6.28) {
        let m = laptop();
        let fp = IemiFootprint {
            center: m.node_center(row, col),
            profile: FootprintProfile::Disc { radius: r * m.pitch },
            peak_e_z: e,
            f_e: 140e3,
            phi0: phi,
        };
        let dev = node_deviations(&m, &[], &[fp]).unwrap();
        for (i, d) in dev.iter().enumerate() {
            if i != row * m.cols + col {
                prop_assert_eq!(*d, 0.0);
            }
        }
    }

    #[test]
    fn frames_are_deterministic(x in 0.0f64..0.096, y in 0.0f64..0.064, e in 500.0f64..3000.0) {
        let m = laptop();
        let touches = [Touch { position: Point::new(0.01, 0.01), delta_c: 0.2e-12 }];
        let fp = IemiFootprint { center: Point::new(x, y), profile: FootprintProfile::Gaussian { sigma: 3e-3 }, peak_e_z: e, f_e: 140e3, phi0: 1.0 };
        let a = scan_frame(&m, 3, 0.25, &touches, &[fp]).unwrap();
        let b = scan_frame(&m, 3, 0.25, &touches, &[fp]).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn registered_dwell_exceeds_rejected(
        reduced in 30.0f64..200.0,
        ratio in 1.5f64..4.0,
        rej in 0.02f64..0.3,
        extra in 0.01f64..0.5,
        off in 0.1f64..0.4,
    ) {
        let c = ScanConstants {
            reduced_rate_hz: reduced,
            full_rate_hz: reduced * ratio,
            dwell_rejected_s: rej,
            dwell_registered_s: rej + extra,
            ..ScanConstants::default()
        };
        prop_assert!(dwell(&c, ScanEvent::TouchRegistered, off) > dwell(&c, ScanEvent::TouchRejected, off));
    }
}

#[test]
fn seeded_traces_repeat_bit_for_bit() {
    let m = laptop();
    let mut s = TraceSettings::for_model(&m);
    s.noise_rms = 0.05;
    s.jitter = 0.05;
    let a = emission_trace(&m, Point::new(0.03, 0.02), &s, &mut stream(1, 2)).unwrap();
    let b = emission_trace(&m, Point::new(0.03, 0.02), &s, &mut stream(1, 2)).unwrap();
    assert_eq!(a, b);
    let c = emission_trace(&m, Point::new(0.03, 0.02), &s, &mut stream(1, 3)).unwrap();
    assert_ne!(a, c);
}

#[test]
fn advanced_phase_wraps() {
    let fp = IemiFootprint { center: Point::new(0.0, 0.0), profile: FootprintProfile::Disc { radius: 1e-3 }, peak_e_z: 1.0, f_e: 100e3, phi0: 0.0 };
    let g = fp.advanced(2.5e-6);
    assert!((g.phi0 - PI / 2.0).abs() < 1e-12);
}
