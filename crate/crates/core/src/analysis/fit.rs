//! Maximum-likelihood logistic scale with the location held fixed.
//!
//! With `z_i = (x_i - mu) / s` the log-likelihood is
//! `sum(-z_i - 2 ln(1 + e^{-z_i})) - n ln s` and its derivative in `s`
//! is `(sum(z_i tanh(z_i / 2)) - n) / s`. The bracketed term is strictly
//! decreasing in `s`, so the optimum is the unique root of
//! [`logistic_scale_score`].

use serde::{Deserialize, Serialize};

use super::{ks_statistic, AnalysisError};
use crate::logistic::LogisticParams;

pub const MIN_FIT_SAMPLES: usize = 10;
const BRACKET_LO: f64 = 1e-6;
const BRACKET_HI: f64 = 1e3;
const REL_TOL: f64 = 1e-9;
const MAX_ITER: u32 = 200;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub params: LogisticParams,
    /// KS statistic of the samples against the fitted CDF.
    pub ks: f64,
    pub n: usize,
    pub location_was_fixed: bool,
    pub iterations: u32,
}

/// `sum(z tanh(z/2)) - n`: positive below the MLE scale, negative above.
pub fn logistic_scale_score(samples: &[f64], location: f64, scale: f64) -> f64 {
    samples
        .iter()
        .map(|&x| {
            let z = (x - location) / scale;
            z * (0.5 * z).tanh()
        })
        .sum::<f64>()
        - samples.len() as f64
}

/// Root-mean-square deviation about `location`.
fn spread(samples: &[f64], location: f64) -> f64 {
    let ss: f64 = samples.iter().map(|x| (x - location) * (x - location)).sum();
    (ss / samples.len() as f64).sqrt()
}

/// Method-of-moments start: `sigma * sqrt(3) / pi`, with `sigma` the RMS
/// deviation about the fixed location.
pub fn initial_scale_guess(samples: &[f64], location: f64) -> f64 {
    spread(samples, location) * 3f64.sqrt() / std::f64::consts::PI
}

/// Fit the logistic scale by maximum likelihood with `fixed_location`.
///
/// The root of the score is searched in log-scale over
/// `[1e-6 sigma, 1e3 sigma]` by an Illinois false-position iteration with a
/// bisection safeguard, to a relative tolerance of 1e-9.
pub fn fit_logistic_scale(samples: &[f64], fixed_location: f64) -> Result<FitResult, AnalysisError> {
    if samples.len() < MIN_FIT_SAMPLES {
        return Err(AnalysisError::TooFewSamples {
            got: samples.len(),
            needed: MIN_FIT_SAMPLES,
        });
    }
    if let Some(i) = samples.iter().position(|x| !x.is_finite()) {
        return Err(AnalysisError::NonFinite(i));
    }
    if !fixed_location.is_finite() {
        return Err(AnalysisError::NonFinite(usize::MAX));
    }
    let sigma = spread(samples, fixed_location);
    if sigma == 0.0 {
        return Err(AnalysisError::DegenerateSample {
            location: fixed_location,
        });
    }

    let score = |t: f64| logistic_scale_score(samples, fixed_location, t.exp());
    let mut lo = (BRACKET_LO * sigma).ln();
    let mut hi = (BRACKET_HI * sigma).ln();
    let mut f_lo = score(lo);
    let mut f_hi = score(hi);
    let no_conv = |lo: f64, hi: f64, iterations| AnalysisError::NoConvergence {
        lo: lo.exp(),
        hi: hi.exp(),
        iterations,
    };
    if !(f_lo > 0.0 && f_hi < 0.0) {
        return Err(no_conv(lo, hi, 0));
    }

    // Tighten the bracket around the moment estimate first.
    let guess = initial_scale_guess(samples, fixed_location).ln();
    let f_guess = score(guess);
    if f_guess > 0.0 {
        lo = guess;
        f_lo = f_guess;
    } else if f_guess < 0.0 {
        hi = guess;
        f_hi = f_guess;
    } else {
        lo = guess;
        hi = guess;
    }

    let mut iterations = 1;
    let mut last_side = 0i8;
    while hi - lo > REL_TOL {
        if iterations >= MAX_ITER {
            return Err(no_conv(lo, hi, iterations));
        }
        iterations += 1;
        let mut t = (lo * f_hi - hi * f_lo) / (f_hi - f_lo);
        // Fall back to bisection when false position lands on the edge.
        let width = hi - lo;
        if !(t > lo + 0.01 * width && t < hi - 0.01 * width) {
            t = 0.5 * (lo + hi);
        }
        let f = score(t);
        if f == 0.0 {
            lo = t;
            hi = t;
            break;
        }
        if f > 0.0 {
            lo = t;
            f_lo = f;
            if last_side == 1 {
                f_hi *= 0.5;
            }
            last_side = 1;
        } else {
            hi = t;
            f_hi = f;
            if last_side == -1 {
                f_lo *= 0.5;
            }
            last_side = -1;
        }
    }

    let scale = (0.5 * (lo + hi)).exp();
    let params = LogisticParams::new(fixed_location, scale).map_err(|_| no_conv(lo, hi, iterations))?;
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let ks = ks_statistic(&sorted, |x| params.cdf(x))?;
    Ok(FitResult {
        params,
        ks,
        n: samples.len(),
        location_was_fixed: true,
        iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::XrRng;

    fn draws(loc: f64, scale: f64, n: usize, seed: u64) -> Vec<f64> {
        let p = LogisticParams::new(loc, scale).unwrap();
        let mut rng = XrRng::new(seed, 0);
        (0..n).map(|_| p.sample(&mut rng)).collect()
    }

    #[test]
    fn recovers_scale_on_large_sample() {
        let xs = draws(62_500.0, 4000.0, 100_000, 1);
        let fit = fit_logistic_scale(&xs, 62_500.0).unwrap();
        assert!((fit.params.scale() / 4000.0 - 1.0).abs() < 0.02);
        assert!(fit.location_was_fixed);
        assert_eq!(fit.n, 100_000);
        assert!(fit.ks < 0.01);
    }

    #[test]
    fn score_vanishes_at_the_fit() {
        let xs = draws(0.0, 1.0, 1000, 2);
        let fit = fit_logistic_scale(&xs, 0.0).unwrap();
        let s = fit.params.scale();
        assert!(logistic_scale_score(&xs, 0.0, s * (1.0 - 1e-6)) > 0.0);
        assert!(logistic_scale_score(&xs, 0.0, s * (1.0 + 1e-6)) < 0.0);
    }

    #[test]
    fn zero_variance_is_degenerate() {
        let xs = vec![5.0; 20];
        assert_eq!(
            fit_logistic_scale(&xs, 5.0),
            Err(AnalysisError::DegenerateSample { location: 5.0 })
        );
    }

    #[test]
    fn constant_sample_away_from_location_fits() {
        // Every |z| equal: z tanh(z/2) = 1 has a closed-form root.
        let xs = vec![7.0; 20];
        let fit = fit_logistic_scale(&xs, 5.0).unwrap();
        // Solve z tanh(z/2) = 1 by bisection independently.
        let (mut a, mut b) = (0.1f64, 10.0f64);
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if m * (0.5 * m).tanh() < 1.0 {
                a = m
            } else {
                b = m
            }
        }
        let z = 0.5 * (a + b);
        assert!((fit.params.scale() - 2.0 / z).abs() < 1e-8);
    }

    #[test]
    fn initial_guess_is_moment_estimate() {
        let xs = [1.0, -1.0, 1.0, -1.0];
        let g = initial_scale_guess(&xs, 0.0);
        assert!((g - 3f64.sqrt() / std::f64::consts::PI).abs() < 1e-15);
    }

    #[test]
    fn too_few_samples() {
        assert_eq!(
            fit_logistic_scale(&[1.0, 2.0], 0.0),
            Err(AnalysisError::TooFewSamples { got: 2, needed: 10 })
        );
    }
}
