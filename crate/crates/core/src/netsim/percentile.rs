use super::NetsimError;

/// Nearest-rank percentile: the value at rank `ceil(p / 100 * n)` (at
/// least 1) of the sorted data.
pub fn percentile(values: &[f64], p: f64) -> Result<f64, NetsimError> {
    if values.is_empty() {
        return Err(NetsimError::EmptyInput);
    }
    if !(0.0..=100.0).contains(&p) {
        return Err(NetsimError::InvalidPercentile(p));
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    Ok(percentile_sorted(&v, p))
}

pub(crate) fn percentile_sorted(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    let rank = ((p / 100.0) * n as f64).ceil() as usize;
    sorted[rank.clamp(1, n) - 1]
}
