//! Per-bit magnitude features and the nearest-neighbour line classifier.

use std::io::{BufRead, Write};

use serde::Serialize;

use super::segment::Segmentation;
use crate::error::{invalid, Error, Result};
use crate::geometry::Point;
use crate::screen::EmissionTrace;

/// Fraction of each segment discarded at both ends before measuring.
pub const EDGE_TRIM: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FeatureVector {
    /// RMS magnitude of each code bit.
    pub values: Vec<f64>,
    pub antenna: Point,
}

impl FeatureVector {
    /// Unit-L2 copy; the zero vector stays zero.
    pub fn normalized(&self) -> Vec<f64> {
        normalize(&self.values)
    }
}

fn normalize(v: &[f64]) -> Vec<f64> {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        v.iter().map(|x| x / norm).collect()
    } else {
        v.to_vec()
    }
}

pub fn extract_features(trace: &EmissionTrace, seg: &Segmentation) -> FeatureVector {
    let values = seg
        .segments
        .iter()
        .map(|r| {
            let trim = (EDGE_TRIM * r.len() as f64).floor() as usize;
            let s = &trace.samples[r.start + trim..r.end - trim];
            if s.is_empty() {
                0.0
            } else {
                (s.iter().map(|v| v * v).sum::<f64>() / s.len() as f64).sqrt()
            }
        })
        .collect();
    FeatureVector { values, antenna: trace.antenna }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainingSample {
    pub features: Vec<f64>,
    pub line: usize,
    /// Screen coordinate across the lines at which the sample was taken (m).
    pub position: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrainingSet {
    pub samples: Vec<TrainingSample>,
    /// Spacing of the sampled positions along the lines' normal (m).
    pub step: f64,
    /// Screen x of each sampled column (m).
    pub columns: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LineClassifier {
    k: usize,
    normalize: bool,
    code_len: usize,
    samples: Vec<TrainingSample>,
}

impl LineClassifier {
    /// `k` must be odd and at most the training size; at least two distinct
    /// labels are required.
    pub fn train(set: &TrainingSet, k: usize, normalize_features: bool) -> Result<Self> {
        if k == 0 || k % 2 == 0 {
            return Err(invalid("k", format!("must be odd, got {k}")));
        }
        if k > set.samples.len() {
            return Err(invalid("k", format!("{k} exceeds {} training samples", set.samples.len())));
        }
        let code_len = set.samples[0].features.len();
        if set.samples.iter().any(|s| s.features.len() != code_len) {
            return Err(invalid("training_set", "feature lengths differ"));
        }
        let mut labels: Vec<usize> = set.samples.iter().map(|s| s.line).collect();
        labels.sort_unstable();
        labels.dedup();
        if labels.len() < 2 {
            return Err(invalid("training_set", "needs at least two distinct lines"));
        }
        let samples = set
            .samples
            .iter()
            .map(|s| TrainingSample {
                features: if normalize_features { normalize(&s.features) } else { s.features.clone() },
                line: s.line,
                position: s.position,
            })
            .collect();
        Ok(Self { k, normalize: normalize_features, code_len, samples })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn code_len(&self) -> usize {
        self.code_len
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Training indices of the `k` nearest vectors (Euclidean), equal
    /// distances kept in training order.
    fn nearest(&self, features: &[f64]) -> Result<Vec<usize>> {
        if features.len() != self.code_len {
            return Err(Error::Precondition(format!(
                "feature vector has {} entries, classifier expects {}",
                features.len(),
                self.code_len
            )));
        }
        let q = if self.normalize { normalize(features) } else { features.to_vec() };
        let mut d: Vec<(f64, usize)> = self
            .samples
            .iter()
            .enumerate()
            .map(|(i, s)| (s.features.iter().zip(&q).map(|(a, b)| (a - b) * (a - b)).sum::<f64>(), i))
            .collect();
        d.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        Ok(d.iter().take(self.k).map(|&(_, i)| i).collect())
    }

    /// Majority line among the `k` nearest training vectors; tied votes go to
    /// the smaller line index.
    pub fn classify(&self, features: &[f64]) -> Result<usize> {
        let mut votes: Vec<(usize, usize)> = Vec::new();
        for i in self.nearest(features)? {
            let line = self.samples[i].line;
            match votes.iter_mut().find(|(l, _)| *l == line) {
                Some(v) => v.1 += 1,
                None => votes.push((line, 1)),
            }
        }
        votes.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
        Ok(votes[0].0)
    }

    /// Mean sampled position of the `k` nearest training vectors.
    pub fn estimate_position(&self, features: &[f64]) -> Result<f64> {
        let idx = self.nearest(features)?;
        Ok(idx.iter().map(|&i| self.samples[i].position).sum::<f64>() / idx.len() as f64)
    }

    pub fn save<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "code_length={}", self.code_len)?;
        writeln!(out, "k={}", self.k)?;
        writeln!(out, "normalized={}", self.normalize)?;
        for s in &self.samples {
            write!(out, "{},{}", s.line, s.position)?;
            for v in &s.features {
                write!(out, ",{v}")?;
            }
            writeln!(out)?;
        }
        Ok(())
    }

    pub fn load<R: BufRead>(input: R) -> Result<Self> {
        let bad = |reason: String| Error::Format { what: "classifier file", reason };
        let mut lines = input.lines();
        let mut header = |key: &str| -> Result<String> {
            let line = lines.next().ok_or_else(|| bad(format!("missing `{key}`")))??;
            line.strip_prefix(key)
                .and_then(|v| v.strip_prefix('='))
                .map(str::to_owned)
                .ok_or_else(|| bad(format!("expected `{key}=`, found `{line}`")))
        };
        let code_len: usize = header("code_length")?.parse().map_err(|e| bad(format!("code_length: {e}")))?;
        let k: usize = header("k")?.parse().map_err(|e| bad(format!("k: {e}")))?;
        let normalized: bool = header("normalized")?.parse().map_err(|e| bad(format!("normalized: {e}")))?;
        let mut samples = Vec::new();
        for line in lines {
            let line = line?;
            if line.is_empty() {
                continue;
            }
            let mut it = line.split(',');
            let label = it.next().unwrap_or_default();
            let line_idx: usize = label.parse().map_err(|e| bad(format!("label `{label}`: {e}")))?;
            let pos = it.next().unwrap_or_default();
            let position: f64 = pos.parse().map_err(|e| bad(format!("position `{pos}`: {e}")))?;
            let features = it
                .map(|v| v.parse::<f64>().map_err(|e| bad(format!("feature `{v}`: {e}"))))
                .collect::<Result<Vec<_>>>()?;
            if features.len() != code_len {
                return Err(bad(format!("row has {} features, header says {code_len}", features.len())));
            }
            samples.push(TrainingSample { features, line: line_idx, position });
        }
        // Stored rows are already normalized when the flag is set.
        let set = TrainingSet { samples, step: 0.0, columns: Vec::new() };
        let mut clf = Self::train(&set, k, false)?;
        clf.normalize = normalized;
        Ok(clf)
    }
}
