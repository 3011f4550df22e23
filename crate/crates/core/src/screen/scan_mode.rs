//! Reduced/full scan state machine of a touch controller.

use serde::{Deserialize, Serialize};

use crate::error::{ensure_positive, invalid, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanConstants {
    /// Sparse scan rate while idle (Hz).
    pub reduced_rate_hz: f64,
    pub full_rate_hz: f64,
    /// Time spent in full scan after the last registered touch (s).
    pub dwell_registered_s: f64,
    /// Time spent in full scan after the last rejected touch (s).
    pub dwell_rejected_s: f64,
    /// Fraction of the touch threshold at which a node wakes the controller.
    pub wake_fraction: f64,
}

impl Default for ScanConstants {
    fn default() -> Self {
        Self {
            reduced_rate_hz: 120.0,
            full_rate_hz: 240.0,
            dwell_registered_s: 0.5,
            dwell_rejected_s: 0.1,
            wake_fraction: 0.25,
        }
    }
}

impl ScanConstants {
    pub fn validate(&self) -> Result<()> {
        ensure_positive("reduced_rate_hz", self.reduced_rate_hz)?;
        ensure_positive("full_rate_hz", self.full_rate_hz)?;
        ensure_positive("dwell_rejected_s", self.dwell_rejected_s)?;
        if !(self.dwell_registered_s > self.dwell_rejected_s) {
            return Err(invalid("dwell_registered_s", "must exceed dwell_rejected_s"));
        }
        if self.full_rate_hz <= self.reduced_rate_hz {
            return Err(invalid("full_rate_hz", "must exceed reduced_rate_hz"));
        }
        if !(self.wake_fraction > 0.0 && self.wake_fraction < 1.0) {
            return Err(invalid("wake_fraction", "must lie in (0, 1)"));
        }
        Ok(())
    }

    pub fn dwell(&self, event: ScanEvent) -> f64 {
        match event {
            ScanEvent::TouchRegistered => self.dwell_registered_s,
            ScanEvent::TouchRejected => self.dwell_rejected_s,
            ScanEvent::None => 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScanState {
    Reduced,
    Full,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScanEvent {
    None,
    TouchRejected,
    TouchRegistered,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScanMode {
    pub state: ScanState,
    /// Time at which full scan lapses if no further touch arrives.
    pub full_until: f64,
    pub last_transition: f64,
    pub now: f64,
}

impl ScanMode {
    pub fn new(now: f64) -> Self {
        Self {
            state: ScanState::Reduced,
            full_until: now,
            last_transition: now,
            now,
        }
    }

    /// Spacing of scan pulses in the current state.
    pub fn pulse_interval(&self, c: &ScanConstants) -> f64 {
        match self.state {
            ScanState::Reduced => 1.0 / c.reduced_rate_hz,
            ScanState::Full => 1.0 / c.full_rate_hz,
        }
    }
}

/// Advances the controller to `now` and applies `event`.
///
/// Any touch enters (or extends) full scan for the event's dwell; full scan
/// lapses to reduced once `now` reaches the dwell deadline with no touch.
pub fn step_scan_mode(mode: &ScanMode, event: ScanEvent, now: f64, c: &ScanConstants) -> Result<ScanMode> {
    if !(now >= mode.now) {
        return Err(Error::Precondition(format!(
            "scan time went backwards: {now} < {}",
            mode.now
        )));
    }
    let mut next = ScanMode { now, ..*mode };
    match (mode.state, event) {
        (_, ScanEvent::TouchRejected | ScanEvent::TouchRegistered) => {
            let until = now + c.dwell(event);
            if mode.state == ScanState::Reduced {
                next.state = ScanState::Full;
                next.last_transition = now;
                next.full_until = until;
            } else {
                next.full_until = mode.full_until.max(until);
            }
        }
        (ScanState::Full, ScanEvent::None) if now >= mode.full_until => {
            next.state = ScanState::Reduced;
            next.last_transition = now;
        }
        _ => {}
    }
    Ok(next)
}

/// One scan pulse observed on the TX lines.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScanPulse {
    pub time: f64,
    pub state: ScanState,
}

/// Runs the controller from `start` (reduced, first pulse at `start`) to
/// `end`, querying `event_at` at every pulse.
///
/// Pulses sit on a fixed clock: full scan fires every `1/full_rate` after
/// `start`, reduced scan at the next multiple of `1/reduced_rate`, so that
/// the reduced grid is a subset of the full grid when the rates divide.
pub fn run_scan_schedule(
    c: &ScanConstants,
    start: f64,
    end: f64,
    mut event_at: impl FnMut(f64) -> ScanEvent,
) -> Result<Vec<ScanPulse>> {
    c.validate()?;
    let mut mode = ScanMode::new(start);
    let mut t = start;
    let mut pulses = Vec::new();
    while t <= end {
        mode = step_scan_mode(&mode, event_at(t), t, c)?;
        pulses.push(ScanPulse { time: t, state: mode.state });
        t = match mode.state {
            ScanState::Full => next_tick(start, t, c.full_rate_hz),
            ScanState::Reduced => next_tick(start, t, c.reduced_rate_hz),
        };
    }
    Ok(pulses)
}

/// First tick of a `rate` clock anchored at `origin` strictly after `t`.
fn next_tick(origin: f64, t: f64, rate: f64) -> f64 {
    let k = ((t - origin) * rate + 1e-9).floor() + 1.0;
    origin + k / rate
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn idle_pulses_at_reduced_rate() {
        let c = ScanConstants::default();
        let p = run_scan_schedule(&c, 0.0, 0.1, |_| ScanEvent::None).unwrap();
        assert!(p.iter().all(|q| q.state == ScanState::Reduced));
        for w in p.windows(2) {
            assert!((w[1].time - w[0].time - 1.0 / 120.0).abs() < 1e-12);
        }
    }

    #[test]
    fn rejected_touch_lapses_after_dwell() {
        let c = ScanConstants::default();
        let m = step_scan_mode(&ScanMode::new(0.0), ScanEvent::TouchRejected, 1.0, &c).unwrap();
        assert_eq!(m.state, ScanState::Full);
        let m2 = step_scan_mode(&m, ScanEvent::None, 1.05, &c).unwrap();
        assert_eq!(m2.state, ScanState::Full);
        let m3 = step_scan_mode(&m2, ScanEvent::None, 1.1, &c).unwrap();
        assert_eq!(m3.state, ScanState::Reduced);
        assert!(step_scan_mode(&m3, ScanEvent::None, 0.5, &c).is_err());
    }

    #[test]
    fn registered_dwell_is_longer() {
        let c = ScanConstants::default();
        let dwell = |ev| {
            let p = run_scan_schedule(&c, 0.0, 2.0, |t| if t < 0.2 { ev } else { ScanEvent::None }).unwrap();
            let last_touch = p.iter().filter(|q| q.time < 0.2).last().unwrap().time;
            let back = p.iter().find(|q| q.time > 0.2 && q.state == ScanState::Reduced).unwrap().time;
            back - last_touch
        };
        assert!(dwell(ScanEvent::TouchRegistered) > dwell(ScanEvent::TouchRejected));
        let mut bad = c;
        bad.dwell_registered_s = bad.dwell_rejected_s;
        assert!(bad.validate().is_err());
    }
}
