use serde::{Deserialize, Serialize};

use super::AnalysisError;

/// `y = a * x^b`, fitted in log space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerLawFit {
    pub a: f64,
    pub b: f64,
    /// RMS error of `ln y` against the fitted line.
    pub residual: f64,
    /// Set when `b` was forced to zero.
    pub constant_mode: bool,
}

impl PowerLawFit {
    pub fn eval(&self, x: f64) -> f64 {
        if self.constant_mode {
            self.a
        } else {
            self.a * x.powf(self.b)
        }
    }
}

fn check_points(points: &[(f64, f64)]) -> Result<(), AnalysisError> {
    for &(x, y) in points {
        if !(x.is_finite() && y.is_finite() && x > 0.0 && y > 0.0) {
            return Err(AnalysisError::InvalidPoint(x, y));
        }
    }
    Ok(())
}

fn log_rms(points: &[(f64, f64)], a: f64, b: f64) -> f64 {
    let ln_a = a.ln();
    let ss: f64 = points
        .iter()
        .map(|&(x, y)| {
            let r = y.ln() - (ln_a + b * x.ln());
            r * r
        })
        .sum();
    (ss / points.len() as f64).sqrt()
}

/// Ordinary least squares of `ln y` on `ln x`.
pub fn fit_power_law(points: &[(f64, f64)]) -> Result<PowerLawFit, AnalysisError> {
    if points.len() < 2 {
        return Err(AnalysisError::TooFewPoints {
            got: points.len(),
            needed: 2,
        });
    }
    check_points(points)?;
    let n = points.len() as f64;
    let lx: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ly: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx <= f64::EPSILON * n * (1.0 + mx * mx) {
        return Err(AnalysisError::DegenerateInput);
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let b = sxy / sxx;
    let a = (my - b * mx).exp();
    Ok(PowerLawFit {
        a,
        b,
        residual: log_rms(points, a, b),
        constant_mode: false,
    })
}

/// Constant fit: `a` is the arithmetic mean of the `y` values, `b = 0`.
pub fn fit_constant(points: &[(f64, f64)]) -> Result<PowerLawFit, AnalysisError> {
    if points.is_empty() {
        return Err(AnalysisError::EmptyInput);
    }
    check_points(points)?;
    let a = points.iter().map(|p| p.1).sum::<f64>() / points.len() as f64;
    Ok(PowerLawFit {
        a,
        b: 0.0,
        residual: log_rms(points, a, 0.0),
        constant_mode: true,
    })
}
