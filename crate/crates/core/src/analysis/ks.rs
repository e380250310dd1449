use super::AnalysisError;

/// Exact one-sample Kolmogorov-Smirnov statistic `sup_x |F_e(x) - F_t(x)|`.
///
/// `sorted` must be ascending. The supremum is attained at a sample point,
/// either at the top or the bottom of the empirical step, so for distinct
/// samples it is `max_i max(|i/n - F(x_i)|, |(i-1)/n - F(x_i-)|)`. Runs of
/// tied samples are treated as one step. The left limit `F(x_i-)` is taken
/// at the next representable value below `x_i`, which makes the statistic
/// exact for step-function targets too; for continuous targets it equals
/// `F(x_i)`.
pub fn ks_statistic<F>(sorted: &[f64], target_cdf: F) -> Result<f64, AnalysisError>
where
    F: Fn(f64) -> f64,
{
    if sorted.is_empty() {
        return Err(AnalysisError::EmptySample);
    }
    for (i, x) in sorted.iter().enumerate() {
        if !x.is_finite() {
            return Err(AnalysisError::NonFinite(i));
        }
        if i > 0 && *x < sorted[i - 1] {
            return Err(AnalysisError::Unsorted(i));
        }
    }
    let n = sorted.len() as f64;
    let mut d = 0.0f64;
    let mut start = 0;
    while start < sorted.len() {
        let x = sorted[start];
        let mut end = start + 1;
        while end < sorted.len() && sorted[end] == x {
            end += 1;
        }
        let above = (end as f64 / n - target_cdf(x)).abs();
        let below = (target_cdf(x.next_down()) - start as f64 / n).abs();
        d = d.max(above).max(below);
        start = end;
    }
    Ok(d)
}

/// Sorts a copy of `samples` and calls [`ks_statistic`].
pub fn ks_statistic_unsorted<F>(samples: &[f64], target_cdf: F) -> Result<f64, AnalysisError>
where
    F: Fn(f64) -> f64,
{
    if let Some(i) = samples.iter().position(|x| !x.is_finite()) {
        return Err(AnalysisError::NonFinite(i));
    }
    let mut v = samples.to_vec();
    v.sort_by(f64::total_cmp);
    ks_statistic(&v, target_cdf)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logistic::LogisticParams;

    #[test]
    fn single_sample_at_median() {
        let p = LogisticParams::new(0.0, 1.0).unwrap();
        assert_eq!(ks_statistic(&[0.0], |x| p.cdf(x)).unwrap(), 0.5);
    }

    #[test]
    fn equi_quantile_placement_gives_half_over_n() {
        let p = LogisticParams::new(3.0, 2.0).unwrap();
        for n in [1usize, 2, 7, 50, 333] {
            let xs: Vec<f64> = (1..=n)
                .map(|i| p.quantile((i as f64 - 0.5) / n as f64).unwrap())
                .collect();
            let d = ks_statistic(&xs, |x| p.cdf(x)).unwrap();
            assert!((d - 0.5 / n as f64).abs() < 1e-12, "n={n} d={d}");
        }
    }

    #[test]
    fn self_comparison_is_zero() {
        let xs = [1.0, 2.0, 2.0, 3.0, 4.0, 4.0, 4.0];
        let ecdf = |x: f64| xs.iter().filter(|&&v| v <= x).count() as f64 / xs.len() as f64;
        assert_eq!(ks_statistic(&xs, ecdf).unwrap(), 0.0);
    }

    #[test]
    fn errors() {
        assert_eq!(ks_statistic(&[], |_| 0.0), Err(AnalysisError::EmptySample));
        assert_eq!(ks_statistic(&[2.0, 1.0], |_| 0.0), Err(AnalysisError::Unsorted(1)));
        assert_eq!(
            ks_statistic(&[1.0, f64::NAN], |_| 0.0),
            Err(AnalysisError::NonFinite(1))
        );
        assert_eq!(
            ks_statistic_unsorted(&[2.0, 1.0, 0.5], |x| x / 2.0).unwrap(),
            ks_statistic(&[0.5, 1.0, 2.0], |x| x / 2.0).unwrap()
        );
    }

    #[test]
    fn value_is_within_unit_interval() {
        let d = ks_statistic(&[100.0, 200.0], |_| 0.0).unwrap();
        assert_eq!(d, 1.0);
    }
}
