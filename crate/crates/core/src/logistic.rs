//! Shifted and scaled logistic distribution.
//!
//! Standard form has density `e^{-x} / (1 + e^{-x})^2`; the general form
//! substitutes `(x - location) / scale`. The mean equals the location and
//! the standard deviation equals `scale * pi / sqrt(3)`.

use serde::{Deserialize, Serialize};

use crate::rng::XrRng;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LogisticError {
    #[error("logistic location must be finite, got {0}")]
    InvalidLocation(f64),
    #[error("logistic scale must be finite and > 0, got {0}")]
    InvalidScale(f64),
    #[error("probability must lie in (0, 1), got {0}")]
    InvalidProbability(f64),
}

/// Location/scale pair. A scale of exactly zero is only reachable through
/// [`LogisticParams::point_mass`] and describes the zero-dispersion limit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogisticParams {
    location: f64,
    scale: f64,
}

impl LogisticParams {
    pub fn new(location: f64, scale: f64) -> Result<Self, LogisticError> {
        if !location.is_finite() {
            return Err(LogisticError::InvalidLocation(location));
        }
        if !(scale.is_finite() && scale > 0.0) {
            return Err(LogisticError::InvalidScale(scale));
        }
        Ok(Self { location, scale })
    }

    /// Degenerate distribution concentrated at `location`.
    pub fn point_mass(location: f64) -> Result<Self, LogisticError> {
        if !location.is_finite() {
            return Err(LogisticError::InvalidLocation(location));
        }
        Ok(Self {
            location,
            scale: 0.0,
        })
    }

    pub fn location(&self) -> f64 {
        self.location
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn is_degenerate(&self) -> bool {
        self.scale == 0.0
    }

    pub fn mean(&self) -> f64 {
        self.location
    }

    pub fn std_dev(&self) -> f64 {
        self.scale * std::f64::consts::PI / 3f64.sqrt()
    }

    pub fn pdf(&self, x: f64) -> f64 {
        if self.is_degenerate() {
            return if x == self.location { f64::INFINITY } else { 0.0 };
        }
        let z = ((x - self.location) / self.scale).abs();
        let e = (-z).exp();
        e / (self.scale * (1.0 + e) * (1.0 + e))
    }

    pub fn cdf(&self, x: f64) -> f64 {
        if self.is_degenerate() {
            return if x >= self.location { 1.0 } else { 0.0 };
        }
        let z = (x - self.location) / self.scale;
        if z >= 0.0 {
            1.0 / (1.0 + (-z).exp())
        } else {
            let e = z.exp();
            e / (1.0 + e)
        }
    }

    /// Inverse CDF: `location + scale * ln(u / (1 - u))`.
    pub fn quantile(&self, u: f64) -> Result<f64, LogisticError> {
        if !(u > 0.0 && u < 1.0) {
            return Err(LogisticError::InvalidProbability(u));
        }
        Ok(self.location + self.scale * (u / (1.0 - u)).ln())
    }

    /// CDF conditioned on `x > lower`, the law produced by rejecting draws
    /// at or below `lower`.
    pub fn truncated_cdf(&self, x: f64, lower: f64) -> f64 {
        if x <= lower {
            return 0.0;
        }
        let f_lower = self.cdf(lower);
        ((self.cdf(x) - f_lower) / (1.0 - f_lower)).clamp(0.0, 1.0)
    }

    /// Draw by inverse transform.
    pub fn sample(&self, rng: &mut XrRng) -> f64 {
        let u = rng.open01();
        self.location + self.scale * (u / (1.0 - u)).ln()
    }

    /// Draw until the value exceeds `lower`; returns the value and the
    /// number of rejected draws.
    pub fn sample_above(&self, rng: &mut XrRng, lower: f64) -> (f64, u64) {
        let mut rejected = 0;
        loop {
            let x = self.sample(rng);
            if x > lower {
                return (x, rejected);
            }
            rejected += 1;
        }
    }
}

/// Free-function form of [`LogisticParams::quantile`].
pub fn logistic_quantile(params: &LogisticParams, u: f64) -> Result<f64, LogisticError> {
    params.quantile(u)
}
