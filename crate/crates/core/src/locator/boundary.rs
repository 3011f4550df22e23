use crate::error::{Error, Result};

/// Amplitude ratio below which two neighbouring antennas straddle an edge.
pub const DEFAULT_BOUNDARY_THRESHOLD: f64 = 0.3;

/// Flags each adjacent pair `(i, i + 1)` whose weaker/stronger amplitude
/// ratio is below `threshold`.
pub fn detect_boundary(amplitudes: &[f64], threshold: f64) -> Result<Vec<bool>> {
    if amplitudes.len() < 2 {
        return Err(Error::Precondition("boundary detection needs at least two antennas".into()));
    }
    Ok(amplitudes.windows(2).map(|w| is_boundary(w[0], w[1], threshold)).collect())
}

pub fn is_boundary(a: f64, b: f64, threshold: f64) -> bool {
    let (lo, hi) = if a < b { (a, b) } else { (b, a) };
    hi > 0.0 && lo / hi < threshold
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cases() {
        assert_eq!(detect_boundary(&[1.0, 1.0, 1.0], 0.3).unwrap(), vec![false, false]);
        assert_eq!(detect_boundary(&[1.0, 1.0, 0.1], 0.3).unwrap(), vec![false, true]);
        let decay: Vec<f64> = (0..8).map(|i| 0.9f64.powi(i)).collect();
        assert!(detect_boundary(&decay, 0.3).unwrap().iter().all(|b| !b));
        assert!(detect_boundary(&[1.0], 0.3).is_err());
        assert!(!is_boundary(0.0, 0.0, 0.3));
    }
}
