use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::engine::{run_simulation, FlowMetrics};
use super::link::{FlowSpec, LinkSpec};
use super::NetsimError;

/// Seed-averaged delay trend above which a point is reported unstable.
pub const UNSTABLE_TREND: f64 = 1.5;

/// One cell of a campaign: a complete simulation set-up.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    /// Value of the swept variable.
    pub x: f64,
    pub link: LinkSpec,
    pub flows: Vec<FlowSpec>,
    pub duration_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", content = "error")]
pub enum PointStatus {
    #[serde(rename = "OK")]
    Ok,
    /// Delays kept growing over the run: the queue diverges.
    #[serde(rename = "UNSTABLE")]
    Unstable,
    #[serde(rename = "FAILED")]
    Failed(String),
}

impl PointStatus {
    pub fn label(&self) -> &'static str {
        match self {
            PointStatus::Ok => "OK",
            PointStatus::Unstable => "UNSTABLE",
            PointStatus::Failed(_) => "FAILED",
        }
    }
}

/// Per-flow metrics averaged over seeds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowSummary {
    pub flow: usize,
    pub app: String,
    pub fps: u32,
    pub target_rate_bps: f64,
    pub avg_throughput_bps: f64,
    pub avg_frame_delay_s: f64,
    pub p95_frame_delay_s: f64,
    pub frames_generated: f64,
    pub frames_delivered: f64,
    pub frames_dropped: f64,
    /// Largest over seeds.
    pub max_queue: usize,
    pub delay_trend: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointResult {
    pub x: f64,
    pub status: PointStatus,
    pub seeds: Vec<u64>,
    pub flows: Vec<FlowSummary>,
}

fn average(runs: &[Vec<FlowMetrics>]) -> Vec<FlowSummary> {
    let k = runs.len() as f64;
    let mean = |f: &dyn Fn(&FlowMetrics) -> f64, i: usize| {
        runs.iter().map(|r| f(&r[i])).sum::<f64>() / k
    };
    (0..runs[0].len())
        .map(|i| {
            let first = &runs[0][i];
            FlowSummary {
                flow: i,
                app: first.app.clone(),
                fps: first.fps,
                target_rate_bps: first.target_rate_bps,
                avg_throughput_bps: mean(&|m| m.avg_throughput_bps, i),
                avg_frame_delay_s: mean(&|m| m.avg_frame_delay_s, i),
                p95_frame_delay_s: mean(&|m| m.p95_frame_delay_s, i),
                frames_generated: mean(&|m| m.frames_generated as f64, i),
                frames_delivered: mean(&|m| m.frames_delivered as f64, i),
                frames_dropped: mean(&|m| m.frames_dropped as f64, i),
                max_queue: runs.iter().map(|r| r[i].max_queue).max().unwrap_or(0),
                delay_trend: mean(&|m| m.delay_trend, i),
            }
        })
        .collect()
}

/// Run every point under every seed and average per flow.
///
/// Runs execute in parallel; averaging happens in seed order so the result
/// does not depend on scheduling. A point fails if any of its runs fails,
/// and is unstable if any flow's mean delay trend exceeds
/// [`UNSTABLE_TREND`].
pub fn sweep(points: &[SweepPoint], seeds: &[u64]) -> Result<Vec<PointResult>, NetsimError> {
    if points.is_empty() || seeds.is_empty() {
        return Err(NetsimError::EmptySweep);
    }
    let jobs: Vec<(usize, u64)> = (0..points.len())
        .flat_map(|p| seeds.iter().map(move |&s| (p, s)))
        .collect();
    let runs: Vec<Result<Vec<FlowMetrics>, NetsimError>> = jobs
        .par_iter()
        .map(|&(p, seed)| {
            let pt = &points[p];
            run_simulation(&pt.link, &pt.flows, pt.duration_s, seed)
        })
        .collect();

    Ok(points
        .iter()
        .zip(runs.chunks(seeds.len()))
        .map(|(pt, chunk)| {
            let ok: Result<Vec<Vec<FlowMetrics>>, NetsimError> = chunk.iter().cloned().collect();
            match ok {
                Ok(runs) => {
                    let flows = average(&runs);
                    let unstable = flows.iter().any(|f| f.delay_trend > UNSTABLE_TREND);
                    PointResult {
                        x: pt.x,
                        status: if unstable {
                            PointStatus::Unstable
                        } else {
                            PointStatus::Ok
                        },
                        seeds: seeds.to_vec(),
                        flows,
                    }
                }
                Err(e) => PointResult {
                    x: pt.x,
                    status: PointStatus::Failed(e.to_string()),
                    seeds: seeds.to_vec(),
                    flows: Vec::new(),
                },
            }
        })
        .collect())
}
