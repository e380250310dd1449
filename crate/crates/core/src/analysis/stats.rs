use serde::{Deserialize, Serialize};

use super::AnalysisError;
use crate::trace::Trace;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalStats {
    pub n_frames: usize,
    /// Bytes.
    pub mean_size: f64,
    /// Seconds.
    pub mean_ifi: f64,
    /// `8 * mean_size / mean_ifi`, bits per second.
    pub measured_rate: f64,
    pub min_size: f64,
    pub max_size: f64,
    pub std_size: f64,
    pub min_ifi: f64,
    pub max_ifi: f64,
    pub std_ifi: f64,
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

fn min_max(values: &[f64]) -> (f64, f64) {
    values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        })
}

/// First-order statistics of a trace. IFIs are successive timestamp
/// differences, so a trace of `n` frames yields `n - 1` intervals.
pub fn summarize(trace: &Trace) -> Result<EmpiricalStats, AnalysisError> {
    if trace.len() < 2 {
        return Err(AnalysisError::TooFewFrames(trace.len()));
    }
    let sizes = trace.sizes();
    let ifis = trace.ifis();
    let (mean_size, std_size) = mean_std(&sizes);
    let (mean_ifi, std_ifi) = mean_std(&ifis);
    let (min_size, max_size) = min_max(&sizes);
    let (min_ifi, max_ifi) = min_max(&ifis);
    Ok(EmpiricalStats {
        n_frames: trace.len(),
        mean_size,
        mean_ifi,
        measured_rate: 8.0 * mean_size / mean_ifi,
        min_size,
        max_size,
        std_size,
        min_ifi,
        max_ifi,
        std_ifi,
    })
}
