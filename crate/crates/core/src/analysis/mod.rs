//! Empirical statistics, fit scoring and model calibration from traces.

mod calibrate;
mod fit;
mod ks;
mod power_law;
mod report;
mod stats;

pub use calibrate::{calibrate_profile, Calibration, CalibrationReport, TraceFit};
pub use fit::{fit_logistic_scale, initial_scale_guess, logistic_scale_score, FitResult};
pub use ks::{ks_statistic, ks_statistic_unsorted};
pub use power_law::{fit_constant, fit_power_law, PowerLawFit};
pub use report::{plot_data_csv, report_json};
pub use stats::{summarize, EmpiricalStats};

use crate::model::ModelError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AnalysisError {
    #[error("trace has {0} frames; at least 2 are required")]
    TooFewFrames(usize),
    #[error("sample is empty")]
    EmptySample,
    #[error("{needed} samples required, got {got}")]
    TooFewSamples { got: usize, needed: usize },
    #[error("sample contains a non-finite value at position {0}")]
    NonFinite(usize),
    #[error("sample is not sorted ascending at position {0}")]
    Unsorted(usize),
    #[error("sample has zero spread around the fixed location {location}")]
    DegenerateSample { location: f64 },
    #[error("scale search did not converge in [{lo}, {hi}] after {iterations} iterations")]
    NoConvergence { lo: f64, hi: f64, iterations: u32 },
    #[error("power-law points must be finite and positive, got ({0}, {1})")]
    InvalidPoint(f64, f64),
    #[error("at least {needed} points required, got {got}")]
    TooFewPoints { got: usize, needed: usize },
    #[error("all x values are equal; slope is undetermined")]
    DegenerateInput,
    #[error("no input points")]
    EmptyInput,
    #[error("insufficient calibration data: {}", .0.join("; "))]
    InsufficientData(Vec<String>),
    #[error("traces belong to different applications: {}", .0.join(", "))]
    ConflictingApps(Vec<String>),
    #[error("trace {index}: {source}")]
    Trace {
        index: usize,
        #[source]
        source: Box<AnalysisError>,
    },
    #[error(transparent)]
    Model(#[from] ModelError),
}
