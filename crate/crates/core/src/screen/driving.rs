//! TX driving schemes and code-division demultiplexing.

use crate::error::{invalid, Error, Result};

/// Orthogonal ±1 code words, one per TX line.
///
/// Lines are excited unipolarly: line `r` is on during bit `b` iff
/// `code[r][b] = +1`. Every word is either zero-sum or all `+1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodeMatrix {
    words: Vec<Vec<i8>>,
}

impl CodeMatrix {
    /// First `tx` rows of the Sylvester–Hadamard matrix of the smallest
    /// power-of-two order `>= tx`.
    pub fn walsh_hadamard(tx: usize) -> Result<Self> {
        if tx == 0 {
            return Err(invalid("tx", "need at least one TX line"));
        }
        let order = tx.next_power_of_two();
        let mut h = vec![vec![1i8]];
        while h.len() < order {
            let n = h.len();
            let mut next = vec![vec![0i8; 2 * n]; 2 * n];
            for i in 0..n {
                for j in 0..n {
                    next[i][j] = h[i][j];
                    next[i][j + n] = h[i][j];
                    next[i + n][j] = h[i][j];
                    next[i + n][j + n] = -h[i][j];
                }
            }
            h = next;
        }
        h.truncate(tx);
        Self::from_words(h)
    }

    pub fn from_words(words: Vec<Vec<i8>>) -> Result<Self> {
        let l = words.first().map(Vec::len).unwrap_or(0);
        if words.is_empty() || l < words.len() {
            return Err(invalid("codes", format!("code length {l} shorter than {} lines", words.len())));
        }
        for (r, w) in words.iter().enumerate() {
            if w.len() != l || w.iter().any(|&v| v != 1 && v != -1) {
                return Err(invalid("codes", format!("word {r} is not a ±1 word of length {l}")));
            }
            let sum: i32 = w.iter().map(|&v| v as i32).sum();
            if sum != 0 && sum != l as i32 {
                return Err(invalid("codes", format!("word {r} is neither zero-sum nor all ones")));
            }
            for (q, v) in words.iter().enumerate().take(r) {
                let dot: i32 = w.iter().zip(v).map(|(&a, &b)| (a * b) as i32).sum();
                if dot != 0 {
                    return Err(invalid("codes", format!("words {q} and {r} are not orthogonal")));
                }
            }
        }
        Ok(Self { words })
    }

    /// Code length `L` in bits.
    pub fn code_len(&self) -> usize {
        self.words[0].len()
    }

    pub fn lines(&self) -> usize {
        self.words.len()
    }

    pub fn word(&self, line: usize) -> &[i8] {
        &self.words[line]
    }

    /// Unipolar excitation (0 or 1) of `line` during bit `b`.
    pub fn excitation(&self, line: usize, b: usize) -> f64 {
        if self.words[line][b] > 0 {
            1.0
        } else {
            0.0
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum DrivingKind {
    /// One TX line at a time, in index order.
    Sdm,
    /// All TX lines at once, modulated by orthogonal code words.
    Pdm(CodeMatrix),
}

#[derive(Debug, Clone, PartialEq)]
pub struct DrivingScheme {
    pub kind: DrivingKind,
    /// Peak TX excitation (V).
    pub amplitude: f64,
    pub carrier_hz: f64,
    /// Duration of one PDM code bit or one SDM line slot (s).
    pub bit_duration: f64,
    /// Silent slots preceding each frame's payload.
    pub gap_bits: usize,
}

impl DrivingScheme {
    pub fn pdm(tx: usize) -> Result<Self> {
        Ok(Self {
            kind: DrivingKind::Pdm(CodeMatrix::walsh_hadamard(tx)?),
            amplitude: 1.0,
            carrier_hz: 100e3,
            bit_duration: 50e-6,
            gap_bits: 8,
        })
    }

    pub fn sdm() -> Self {
        Self {
            kind: DrivingKind::Sdm,
            amplitude: 1.0,
            carrier_hz: 100e3,
            bit_duration: 50e-6,
            gap_bits: 8,
        }
    }

    pub fn is_pdm(&self) -> bool {
        matches!(self.kind, DrivingKind::Pdm(_))
    }

    /// Payload slots per frame: the code length for PDM, the line count for SDM.
    pub fn payload_slots(&self, tx: usize) -> usize {
        match &self.kind {
            DrivingKind::Sdm => tx,
            DrivingKind::Pdm(c) => c.code_len(),
        }
    }

    pub fn frame_duration(&self, tx: usize) -> f64 {
        (self.gap_bits + self.payload_slots(tx)) as f64 * self.bit_duration
    }

    /// Excitation of `line` during payload slot `slot`.
    pub fn excitation(&self, line: usize, slot: usize) -> f64 {
        match &self.kind {
            DrivingKind::Sdm => (line == slot) as u8 as f64,
            DrivingKind::Pdm(c) => c.excitation(line, slot),
        }
    }

    pub fn validate(&self, tx: usize) -> Result<()> {
        crate::error::ensure_positive("amplitude", self.amplitude)?;
        crate::error::ensure_positive("carrier_hz", self.carrier_hz)?;
        crate::error::ensure_positive("bit_duration", self.bit_duration)?;
        if let DrivingKind::Pdm(c) = &self.kind {
            if c.lines() != tx {
                return Err(invalid("codes", format!("{} code words for {tx} TX lines", c.lines())));
            }
        }
        Ok(())
    }
}

/// Sequential scan of a row-major `rows × cols` deviation field: one
/// measurement per node, TX line by TX line.
pub fn sdm_scan(rows: usize, cols: usize, field: &[f64]) -> Result<Vec<f64>> {
    check_field(rows, cols, field)?;
    let mut out = Vec::with_capacity(rows * cols);
    for r in 0..rows {
        for c in 0..cols {
            out.push(field[r * cols + c]);
        }
    }
    Ok(out)
}

/// Raw PDM correlations: for each code bit `b` and RX column `c`, the sum of
/// node deviations over the lines that are on during `b`. Row-major `L × cols`.
pub fn pdm_measure(codes: &CodeMatrix, cols: usize, field: &[f64]) -> Result<Vec<f64>> {
    let rows = codes.lines();
    check_field(rows, cols, field)?;
    let l = codes.code_len();
    let mut raw = vec![0.0; l * cols];
    for b in 0..l {
        for r in 0..rows {
            if codes.excitation(r, b) > 0.0 {
                for c in 0..cols {
                    raw[b * cols + c] += field[r * cols + c];
                }
            }
        }
    }
    Ok(raw)
}

/// Inverts [`pdm_measure`] by inner products with the code words.
///
/// A zero-sum word `w_r` gives `d_r = (2/L) Σ_b w_r[b] m_b`; the all-ones
/// word, if present, sees every bit and is recovered from the column total.
pub fn decode_pdm(codes: &CodeMatrix, cols: usize, raw: &[f64]) -> Result<Vec<f64>> {
    let rows = codes.lines();
    let l = codes.code_len();
    if raw.len() != l * cols {
        return Err(Error::Precondition(format!(
            "expected {} raw correlations, got {}",
            l * cols,
            raw.len()
        )));
    }
    let mut out = vec![0.0; rows * cols];
    let mut ones_line = None;
    for r in 0..rows {
        let w = codes.word(r);
        if w.iter().all(|&v| v > 0) {
            ones_line = Some(r);
            continue;
        }
        for c in 0..cols {
            let y: f64 = (0..l).map(|b| w[b] as f64 * raw[b * cols + c]).sum();
            out[r * cols + c] = 2.0 * y / l as f64;
        }
    }
    if let Some(r0) = ones_line {
        for c in 0..cols {
            let total: f64 = (0..l).map(|b| raw[b * cols + c]).sum();
            let others: f64 = (0..rows).filter(|&r| r != r0).map(|r| out[r * cols + c]).sum();
            out[r0 * cols + c] = (total - 0.5 * l as f64 * others) / l as f64;
        }
    }
    Ok(out)
}

fn check_field(rows: usize, cols: usize, field: &[f64]) -> Result<()> {
    if field.len() != rows * cols {
        return Err(Error::Precondition(format!(
            "deviation field has {} entries, grid is {rows}×{cols}",
            field.len()
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn hadamard_orders() {
        assert_eq!(CodeMatrix::walsh_hadamard(16).unwrap().code_len(), 16);
        assert_eq!(CodeMatrix::walsh_hadamard(17).unwrap().code_len(), 32);
        assert_eq!(CodeMatrix::walsh_hadamard(3).unwrap().code_len(), 4);
    }

    #[test]
    fn rejects_bad_codes() {
        assert!(CodeMatrix::from_words(vec![vec![1, 1], vec![1, 1]]).is_err());
        assert!(CodeMatrix::from_words(vec![vec![1, -1, 1, -1], vec![1, 1, -1, -1], vec![1, -1, -1, 1], vec![1, 1, 1, 1], vec![1, -1, 1, -1]]).is_err());
        assert!(CodeMatrix::from_words(vec![vec![1, 0]]).is_err());
        // Orthogonal but neither zero-sum nor all ones.
        assert!(CodeMatrix::from_words(vec![vec![-1, 1, 1, 1], vec![1, -1, 1, 1]]).is_err());
    }

    #[test]
    fn zero_and_single_node() {
        let codes = CodeMatrix::walsh_hadamard(5).unwrap();
        let zero = vec![0.0; 5 * 3];
        assert!(decode_pdm(&codes, 3, &pdm_measure(&codes, 3, &zero).unwrap()).unwrap().iter().all(|v| *v == 0.0));
        for node in 0..15 {
            let mut f = zero.clone();
            f[node] = 0.7;
            let d = decode_pdm(&codes, 3, &pdm_measure(&codes, 3, &f).unwrap()).unwrap();
            for (i, v) in d.iter().enumerate() {
                if i == node {
                    assert!((v - 0.7).abs() < 1e-12);
                } else {
                    assert!(v.abs() < 1e-12, "leak into {i}: {v}");
                }
            }
        }
    }

    #[test]
    fn random_field_matches_sequential_scan() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for (rows, cols) in [(16, 24), (7, 5), (1, 4)] {
            let codes = CodeMatrix::walsh_hadamard(rows).unwrap();
            let f: Vec<f64> = (0..rows * cols).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let seq = sdm_scan(rows, cols, &f).unwrap();
            let par = decode_pdm(&codes, cols, &pdm_measure(&codes, cols, &f).unwrap()).unwrap();
            for (a, b) in seq.iter().zip(&par) {
                assert!((a - b).abs() < 1e-9);
            }
        }
    }
}
