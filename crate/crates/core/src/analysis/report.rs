use std::fmt::Write as _;

use serde_json::json;

use super::{Calibration, CalibrationReport, PowerLawFit};

pub const CALIBRATION_SCHEMA: &str = "xrtraffic-calibration/1";
pub const PLOT_SCHEMA: &str = "xrtraffic-dispersion-plot/1";
const CURVE_SAMPLES: usize = 41;

/// JSON calibration report: coefficients, fits and per-trace points.
pub fn report_json(cal: &Calibration) -> String {
    let v = json!({
        "schema": CALIBRATION_SCHEMA,
        "profile": cal.profile,
        "frame_size_fit": cal.report.frame_size_fit,
        "ifi_30fps_fit": cal.report.ifi_30fps_fit,
        "ifi_60fps_fit": cal.report.ifi_60fps_fit,
        "traces": cal.report.traces,
    });
    serde_json::to_string_pretty(&v).expect("calibration report serializes") + "\n"
}

/// Plot-ready CSV with the measured dispersion points and the fitted
/// curves sampled over the observed rate span.
///
/// Columns: `series,kind,rate_mbps,dispersion` where `kind` is `point` or
/// `fit`.
pub fn plot_data_csv(report: &CalibrationReport) -> String {
    let mut out = format!("# schema={PLOT_SCHEMA}\nseries,kind,rate_mbps,dispersion\n");
    let series: [(&str, Option<u32>, &PowerLawFit, bool); 3] = [
        ("frame_size", None, &report.frame_size_fit, true),
        ("ifi_30fps", Some(30), &report.ifi_30fps_fit, false),
        ("ifi_60fps", Some(60), &report.ifi_60fps_fit, false),
    ];
    for (name, fps, fit, use_size) in series {
        let pts: Vec<(f64, f64)> = report
            .traces
            .iter()
            .filter(|t| fps.is_none_or(|f| t.fps == f))
            .map(|t| {
                let d = if use_size {
                    t.size_dispersion
                } else {
                    t.ifi_dispersion
                };
                (t.rate_bps / 1e6, d)
            })
            .collect();
        for (x, y) in &pts {
            let _ = writeln!(out, "{name},point,{x},{y}");
        }
        let lo = pts.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
        let hi = pts.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
        if lo.is_finite() && hi.is_finite() {
            for i in 0..CURVE_SAMPLES {
                let x = lo + (hi - lo) * i as f64 / (CURVE_SAMPLES - 1) as f64;
                let _ = writeln!(out, "{name},fit,{x},{}", fit.eval(x));
            }
        }
    }
    out
}
