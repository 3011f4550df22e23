//! Code-word alignment of an emission trace.

use std::ops::Range;

use crate::error::{ensure_positive, Error, Result};
use crate::screen::{EmissionTrace, ScreenModel};

/// Timing of one emission frame as seen by the receiver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameLayout {
    pub bit_duration: f64,
    pub code_len: usize,
    pub gap_bits: usize,
    pub carrier_hz: f64,
}

impl FrameLayout {
    pub fn from_model(model: &ScreenModel) -> Self {
        Self {
            bit_duration: model.driving.bit_duration,
            code_len: model.driving.payload_slots(model.rows),
            gap_bits: model.driving.gap_bits,
            carrier_hz: model.driving.carrier_hz,
        }
    }
}

/// Minimum ratio between loud (99th percentile) and quiet (10th percentile)
/// envelope levels for a trace to carry a code word.
pub const DETECTION_RATIO: f64 = 10.0;

#[derive(Debug, Clone, PartialEq)]
pub struct Segmentation {
    /// First sample of bit 0.
    pub onset: usize,
    pub samples_per_bit: f64,
    pub segments: Vec<Range<usize>>,
}

fn percentile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Splits the first complete code word of `trace` into one segment per bit.
///
/// Bit 0 drives every line, so it is the loudest bit of the word and always
/// follows `gap_bits` silent slots. The onset is the sample maximising the
/// mean power over one bit after it minus the mean power over the gap before
/// it; the first maximum wins.
pub fn segment_trace(trace: &EmissionTrace, layout: &FrameLayout) -> Result<Segmentation> {
    ensure_positive("bit_duration", layout.bit_duration)?;
    let fs = trace.sample_rate_hz as f64;
    let spb = layout.bit_duration * fs;
    let bit = spb.round() as usize;
    let gap = (layout.gap_bits as f64 * spb).round() as usize;
    let word = (layout.code_len as f64 * spb).round() as usize;
    let n = trace.samples.len();
    if bit == 0 || layout.code_len == 0 || n < gap + word {
        return Err(Error::SegmentationFailure(format!(
            "{n} samples cannot hold a {}-bit word after a {}-bit gap",
            layout.code_len, layout.gap_bits
        )));
    }

    let mut prefix = Vec::with_capacity(n + 1);
    prefix.push(0.0);
    for v in &trace.samples {
        prefix.push(prefix.last().unwrap() + v * v);
    }
    let mean = |r: Range<usize>| (prefix[r.end] - prefix[r.start]) / (r.end - r.start).max(1) as f64;

    let w = ((fs / layout.carrier_hz).round() as usize).max(1);
    let mut env: Vec<f64> = (0..n.saturating_sub(w) + 1).map(|i| mean(i..(i + w).min(n))).collect();
    env.sort_by(f64::total_cmp);
    let loud = percentile(&env, 0.99);
    let quiet = percentile(&env, 0.10);
    if !(loud > 0.0) || loud < DETECTION_RATIO * quiet {
        return Err(Error::SegmentationFailure(format!(
            "no code word: loud/quiet power ratio {:.2} below {DETECTION_RATIO}",
            if quiet > 0.0 { loud / quiet } else { 0.0 }
        )));
    }

    let frame = gap + word;
    let first = gap.max(1);
    let last = (n - word).min(first + frame);
    let mut best = (f64::NEG_INFINITY, first);
    for s in first..=last {
        let score = mean(s..s + bit) - mean(s - gap.max(1)..s);
        if score > best.0 * (1.0 + 1e-12) + 1e-300 {
            best = (score, s);
        }
    }
    let onset = best.1;
    let segments = (0..layout.code_len)
        .map(|b| {
            let a = onset + (b as f64 * spb).round() as usize;
            let e = onset + ((b + 1) as f64 * spb).round() as usize;
            a..e.min(n)
        })
        .collect();
    Ok(Segmentation { onset, samples_per_bit: spb, segments })
}
