/// Quartile of `values` by linear interpolation between order statistics
/// at position `q · (n - 1)` (inclusive method).
pub fn quantile_inclusive(values: &[f64], q: f64) -> Option<f64> {
    if values.is_empty() || !(0.0..=1.0).contains(&q) {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let pos = q * (v.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    Some(v[lo] + (pos - lo as f64) * (v[hi] - v[lo]))
}

/// Quartile deviation `(Q3 - Q1) / 2`; `None` for an empty sample.
pub fn quartile_deviation(values: &[f64]) -> Option<f64> {
    Some(0.5 * (quantile_inclusive(values, 0.75)? - quantile_inclusive(values, 0.25)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_values() {
        // numpy.percentile([1, 2, 3, 4], [25, 75]) == [1.75, 3.25]
        assert_eq!(quantile_inclusive(&[4.0, 1.0, 3.0, 2.0], 0.25), Some(1.75));
        assert_eq!(quantile_inclusive(&[4.0, 1.0, 3.0, 2.0], 0.75), Some(3.25));
        assert_eq!(quartile_deviation(&[1.0, 2.0, 3.0, 4.0]), Some(0.75));
        assert_eq!(quartile_deviation(&[5.0; 9]), Some(0.0));
        assert_eq!(quartile_deviation(&[]), None);
        assert_eq!(quantile_inclusive(&[7.0], 0.75), Some(7.0));
    }
}
