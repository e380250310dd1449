use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{fit_constant, fit_logistic_scale, fit_power_law, AnalysisError, PowerLawFit};
use crate::model::FrameRate;
use crate::profile::AppProfile;
use crate::trace::Trace;

/// Per-trace fit outcome. Dispersions are fitted scale over the fixed
/// location.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceFit {
    pub app: String,
    pub fps: u32,
    pub rate_bps: f64,
    pub n_frames: usize,
    pub size_location: f64,
    pub size_scale: f64,
    pub size_dispersion: f64,
    pub size_ks: f64,
    pub ifi_location: f64,
    pub ifi_scale: f64,
    pub ifi_dispersion: f64,
    pub ifi_ks: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationReport {
    pub name: String,
    pub traces: Vec<TraceFit>,
    pub frame_size_fit: PowerLawFit,
    pub ifi_30fps_fit: PowerLawFit,
    pub ifi_60fps_fit: PowerLawFit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub profile: AppProfile,
    pub report: CalibrationReport,
}

fn distinct(mut rates: Vec<f64>) -> Vec<f64> {
    rates.sort_by(f64::total_cmp);
    rates.dedup();
    rates
}

fn fmt_rates(rates: &[f64]) -> String {
    let v: Vec<String> = rates.iter().map(|r| format!("{} Mbps", r / 1e6)).collect();
    format!("{{{}}}", v.join(", "))
}

fn check_coverage(traces: &[Trace]) -> Result<(), AnalysisError> {
    let rates_at = |fps: u32| {
        distinct(
            traces
                .iter()
                .filter(|t| t.metadata.fps == fps)
                .map(|t| t.metadata.target_rate_bps)
                .collect(),
        )
    };
    let all = distinct(traces.iter().map(|t| t.metadata.target_rate_bps).collect());
    let r30 = rates_at(30);
    let r60 = rates_at(60);
    let mut missing = Vec::new();
    if all.len() < 2 {
        missing.push(format!(
            "frame size: need >= 2 distinct rates, have {}",
            fmt_rates(&all)
        ));
    }
    if r30.len() < 2 {
        missing.push(format!(
            "30 FPS IFI: need >= 2 distinct rates at 30 FPS, have {}",
            fmt_rates(&r30)
        ));
    }
    if r60.is_empty() {
        missing.push("60 FPS IFI: need >= 1 rate at 60 FPS, have none".to_string());
    }
    if missing.is_empty() {
        Ok(())
    } else {
        Err(AnalysisError::InsufficientData(missing))
    }
}

fn fit_trace(trace: &Trace) -> Result<TraceFit, AnalysisError> {
    let m = &trace.metadata;
    let frame_rate = FrameRate::try_from(m.fps)?;
    let fps = frame_rate.fps() as f64;
    let size_location = m.target_rate_bps / (8.0 * fps);
    let ifi_location = 1.0 / fps;
    let size = fit_logistic_scale(&trace.sizes(), size_location)?;
    let ifi = fit_logistic_scale(&trace.ifis(), ifi_location)?;
    Ok(TraceFit {
        app: m.app.clone(),
        fps: m.fps,
        rate_bps: m.target_rate_bps,
        n_frames: trace.len(),
        size_location,
        size_scale: size.params.scale(),
        size_dispersion: size.params.scale() / size_location,
        size_ks: size.ks,
        ifi_location,
        ifi_scale: ifi.params.scale(),
        ifi_dispersion: ifi.params.scale() / ifi_location,
        ifi_ks: ifi.ks,
    })
}

/// Regenerate an application profile from traces.
///
/// Each trace is keyed by its metadata (`target_rate_bps`, `fps`). Frame
/// size and IFI scales are fitted with locations fixed to `R / (8F)` bytes
/// and `1 / F` seconds. Frame-size dispersions from both frame rates are
/// pooled, with equal weight, into one power law; 30 FPS IFI dispersions
/// get their own power law and 60 FPS IFI dispersions a constant.
pub fn calibrate_profile(traces: &[Trace], name: &str) -> Result<Calibration, AnalysisError> {
    let mut apps: Vec<String> = traces.iter().map(|t| t.metadata.app.clone()).collect();
    apps.sort();
    apps.dedup();
    if apps.len() > 1 {
        return Err(AnalysisError::ConflictingApps(apps));
    }
    for t in traces {
        FrameRate::try_from(t.metadata.fps)?;
    }
    check_coverage(traces)?;

    let fits: Vec<TraceFit> = traces
        .par_iter()
        .enumerate()
        .map(|(index, t)| {
            fit_trace(t).map_err(|e| AnalysisError::Trace {
                index,
                source: Box::new(e),
            })
        })
        .collect::<Result<_, _>>()?;

    let mbps = |f: &TraceFit| f.rate_bps / 1e6;
    let size_pts: Vec<(f64, f64)> = fits.iter().map(|f| (mbps(f), f.size_dispersion)).collect();
    let ifi30: Vec<(f64, f64)> = fits
        .iter()
        .filter(|f| f.fps == 30)
        .map(|f| (mbps(f), f.ifi_dispersion))
        .collect();
    let ifi60: Vec<(f64, f64)> = fits
        .iter()
        .filter(|f| f.fps == 60)
        .map(|f| (mbps(f), f.ifi_dispersion))
        .collect();

    let frame_size_fit = fit_power_law(&size_pts)?;
    let ifi_30fps_fit = fit_power_law(&ifi30)?;
    let ifi_60fps_fit = fit_constant(&ifi60)?;

    let profile = AppProfile::new(
        name,
        frame_size_fit.a,
        frame_size_fit.b,
        ifi_60fps_fit.a,
        ifi_30fps_fit.a,
        ifi_30fps_fit.b,
    )
    .map_err(|_| AnalysisError::DegenerateInput)?;

    Ok(Calibration {
        profile,
        report: CalibrationReport {
            name: name.to_string(),
            traces: fits,
            frame_size_fit,
            ifi_30fps_fit,
            ifi_60fps_fit,
        },
    })
}
