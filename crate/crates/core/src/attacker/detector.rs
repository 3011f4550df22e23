//! Injection feedback from the victim's scan rhythm.
//!
//! The attacker cannot read the victim's touch events, but the TX scan
//! pulses are visible on any monitoring antenna. A touch the controller
//! accepts keeps it in full scan for longer than one it discards, so the
//! time between switching off the interference and the return to reduced
//! scan tells the two apart.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::screen::{run_scan_schedule, ScanConstants, ScanEvent, ScanPulse};

pub const GUARD_BAND: f64 = 0.010;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Detection {
    Registered,
    Rejected,
    None,
    /// Dwell too close to the decision boundary; retry the injection.
    Indeterminate,
}

/// Scan pulses seen by a monitoring antenna around one injection.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonitorStream {
    pub pulses: Vec<f64>,
    /// Time the interference was switched off.
    pub iemi_off: f64,
}

impl MonitorStream {
    pub fn from_schedule(pulses: &[ScanPulse], iemi_off: f64) -> Self {
        Self { pulses: pulses.iter().map(|p| p.time).collect(), iemi_off }
    }
}

/// Full-to-reduced dwell measured on the stream, or `None` when the stream
/// holds no full-rate interval.
///
/// Pulse intervals shorter than the midpoint of the two scan periods count
/// as full rate; the return to reduced scan is the pulse closing the last
/// full-rate interval.
pub fn measure_dwell(stream: &MonitorStream, c: &ScanConstants) -> Option<f64> {
    let split = 0.5 * (1.0 / c.full_rate_hz + 1.0 / c.reduced_rate_hz);
    let last_full = stream.pulses.windows(2).rposition(|w| w[1] - w[0] < split)?;
    Some(stream.pulses[last_full + 1] - stream.iemi_off)
}

pub fn detect_injection(stream: &MonitorStream, c: &ScanConstants) -> Detection {
    let Some(dwell) = measure_dwell(stream, c) else {
        return Detection::None;
    };
    let boundary = 0.5 * (c.dwell_registered_s + c.dwell_rejected_s);
    if (dwell - boundary).abs() <= GUARD_BAND {
        Detection::Indeterminate
    } else if dwell > boundary {
        Detection::Registered
    } else {
        Detection::Rejected
    }
}

/// A synthetic injection episode with known outcome.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Episode {
    pub truth: ScanEvent,
    pub stream: MonitorStream,
}

/// Idle lead-in, an injection of random length whose every frame reports
/// `truth`, then enough idle time for the controller to settle.
pub fn simulate_episode<R: Rng + ?Sized>(truth: ScanEvent, c: &ScanConstants, rng: &mut R) -> Result<Episode> {
    let on = rng.gen_range(0.02..0.2);
    let off = on + rng.gen_range(0.02..0.4);
    let end = off + c.dwell_registered_s + 0.2;
    let pulses = run_scan_schedule(c, 0.0, end, |t| if t >= on && t <= off { truth } else { ScanEvent::None })?;
    Ok(Episode { truth, stream: MonitorStream::from_schedule(&pulses, off) })
}

pub fn expected_detection(truth: ScanEvent) -> Detection {
    match truth {
        ScanEvent::TouchRegistered => Detection::Registered,
        ScanEvent::TouchRejected => Detection::Rejected,
        ScanEvent::None => Detection::None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    fn stream_with_dwell(dwell: f64) -> MonitorStream {
        let c = ScanConstants::default();
        let mut pulses: Vec<f64> = (0..10).map(|k| k as f64 / c.reduced_rate_hz).collect();
        let t0 = *pulses.last().unwrap();
        let off = t0 + 0.05;
        let n = ((off + dwell - t0) * c.full_rate_hz).round() as usize;
        pulses.extend((1..=n).map(|k| t0 + k as f64 / c.full_rate_hz));
        let back = *pulses.last().unwrap();
        pulses.extend((1..5).map(|k| back + k as f64 / c.reduced_rate_hz));
        MonitorStream { pulses, iemi_off: off }
    }

    #[test]
    fn constants_classify() {
        let c = ScanConstants::default();
        assert_eq!(detect_injection(&stream_with_dwell(c.dwell_registered_s), &c), Detection::Registered);
        assert_eq!(detect_injection(&stream_with_dwell(c.dwell_rejected_s), &c), Detection::Rejected);
        assert_eq!(detect_injection(&stream_with_dwell(0.3), &c), Detection::Indeterminate);
        let idle = MonitorStream { pulses: (0..50).map(|k| k as f64 / 120.0).collect(), iemi_off: 0.1 };
        assert_eq!(detect_injection(&idle, &c), Detection::None);
    }

    #[test]
    fn episodes_classify_exactly() {
        let c = ScanConstants::default();
        let mut rng = stream(5, 0);
        for truth in [ScanEvent::None, ScanEvent::TouchRejected, ScanEvent::TouchRegistered] {
            for _ in 0..20 {
                let e = simulate_episode(truth, &c, &mut rng).unwrap();
                assert_eq!(detect_injection(&e.stream, &c), expected_detection(truth));
            }
        }
    }
}
