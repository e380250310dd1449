//! Versioned result formats: per-flow CSV, JSON summary and the
//! three-panel report layout (throughput, mean delay, p95 delay against the
//! swept variable).

use std::fmt::Write as _;

use serde_json::json;

use super::campaign::Campaign;
use super::sweep::{PointResult, PointStatus};

pub const RESULTS_SCHEMA: &str = "xrtraffic-results/1";
pub const SUMMARY_SCHEMA: &str = "xrtraffic-summary/1";
pub const REPORT_SCHEMA: &str = "xrtraffic-report/1";

const RESULTS_HEADER: &str = "point,x,status,flow,app,fps,target_rate_bps,avg_throughput_bps,\
avg_frame_delay_s,p95_frame_delay_s,frames_generated,frames_delivered,frames_dropped,max_queue,delay_trend";

/// One row per (point, flow); failed points get a single row with empty
/// metric cells.
pub fn results_csv(campaign: &Campaign, results: &[PointResult]) -> String {
    let seeds: Vec<String> = campaign.seeds.iter().map(u64::to_string).collect();
    let mut out = format!(
        "# schema={RESULTS_SCHEMA}\n# campaign={}\n# variable={}\n# seeds={}\n{RESULTS_HEADER}\n",
        campaign.name,
        campaign.variable,
        seeds.join(";")
    );
    for (i, r) in results.iter().enumerate() {
        let status = r.status.label();
        if r.flows.is_empty() {
            let _ = writeln!(out, "{i},{},{status},,,,,,,,,,,,", r.x);
        }
        for f in &r.flows {
            let _ = writeln!(
                out,
                "{i},{},{status},{},{},{},{},{},{},{},{},{},{},{},{}",
                r.x,
                f.flow,
                f.app,
                f.fps,
                f.target_rate_bps,
                f.avg_throughput_bps,
                f.avg_frame_delay_s,
                f.p95_frame_delay_s,
                f.frames_generated,
                f.frames_delivered,
                f.frames_dropped,
                f.max_queue,
                f.delay_trend
            );
        }
    }
    out
}

fn mean(v: impl Iterator<Item = f64>) -> f64 {
    let (s, n) = v.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    if n == 0 {
        0.0
    } else {
        s / n as f64
    }
}

pub fn summary_json(campaign: &Campaign, results: &[PointResult]) -> String {
    let points: Vec<_> = results
        .iter()
        .map(|r| {
            let error = match &r.status {
                PointStatus::Failed(e) => Some(e.clone()),
                _ => None,
            };
            json!({
                "x": r.x,
                "status": r.status.label(),
                "error": error,
                "users": r.flows.len(),
                "mean_throughput_bps": mean(r.flows.iter().map(|f| f.avg_throughput_bps)),
                "mean_frame_delay_s": mean(r.flows.iter().map(|f| f.avg_frame_delay_s)),
                "mean_p95_frame_delay_s": mean(r.flows.iter().map(|f| f.p95_frame_delay_s)),
                "max_delay_trend": r.flows.iter().map(|f| f.delay_trend).fold(0.0, f64::max),
                "flows": r.flows,
            })
        })
        .collect();
    let v = json!({
        "schema": SUMMARY_SCHEMA,
        "campaign": campaign.name,
        "variable": campaign.variable,
        "seeds": campaign.seeds,
        "points": points,
    });
    serde_json::to_string_pretty(&v).expect("summary serializes") + "\n"
}

/// The fields of a results row needed for reporting.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub x: f64,
    pub status: String,
    /// `None` for failed points.
    pub throughput_bps: Option<f64>,
    pub avg_delay_s: Option<f64>,
    pub p95_delay_s: Option<f64>,
}

/// Parse a results CSV, returning the swept variable's name and the rows.
pub fn parse_results_csv(text: &str) -> Result<(String, Vec<ResultRow>), String> {
    let mut variable = None;
    let mut schema = None;
    let mut rows = Vec::new();
    let mut header_seen = false;
    for (n, line) in text.lines().enumerate() {
        let lineno = n + 1;
        if let Some(meta) = line.strip_prefix('#') {
            if let Some((k, v)) = meta.trim().split_once('=') {
                match k.trim() {
                    "schema" => schema = Some(v.trim().to_string()),
                    "variable" => variable = Some(v.trim().to_string()),
                    _ => {}
                }
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        if !header_seen {
            if line != RESULTS_HEADER {
                return Err(format!("line {lineno}: unexpected header"));
            }
            header_seen = true;
            continue;
        }
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != 15 {
            return Err(format!("line {lineno}: expected 15 columns, got {}", cells.len()));
        }
        let num = |i: usize| -> Result<Option<f64>, String> {
            if cells[i].is_empty() {
                Ok(None)
            } else {
                cells[i]
                    .parse()
                    .map(Some)
                    .map_err(|_| format!("line {lineno}: bad number '{}'", cells[i]))
            }
        };
        rows.push(ResultRow {
            x: num(1)?.ok_or_else(|| format!("line {lineno}: missing x"))?,
            status: cells[2].to_string(),
            throughput_bps: num(7)?,
            avg_delay_s: num(8)?,
            p95_delay_s: num(9)?,
        });
    }
    match schema.as_deref() {
        Some(RESULTS_SCHEMA) => {}
        Some(other) => return Err(format!("unsupported results schema '{other}'")),
        None => return Err("missing schema line".to_string()),
    }
    if !header_seen {
        return Err("missing header row".to_string());
    }
    Ok((variable.unwrap_or_else(|| "x".to_string()), rows))
}

/// Per series and swept value: mean per-flow throughput (Mbps), mean frame
/// delay (ms) and mean p95 frame delay (ms). Failed points have empty cells.
pub fn report_csv(variable: &str, series: &[(String, Vec<ResultRow>)]) -> String {
    let mut out = format!(
        "# schema={REPORT_SCHEMA}\n# variable={variable}\nseries,x,status,throughput_mbps,avg_delay_ms,p95_delay_ms\n"
    );
    for (name, rows) in series {
        let mut xs: Vec<f64> = Vec::new();
        for r in rows {
            if !xs.contains(&r.x) {
                xs.push(r.x);
            }
        }
        for x in xs {
            let at: Vec<&ResultRow> = rows.iter().filter(|r| r.x == x).collect();
            let status = at[0].status.as_str();
            if at.iter().any(|r| r.throughput_bps.is_none()) {
                let _ = writeln!(out, "{name},{x},{status},,,");
                continue;
            }
            let m = |f: &dyn Fn(&ResultRow) -> f64| mean(at.iter().map(|r| f(r)));
            let _ = writeln!(
                out,
                "{name},{x},{status},{},{},{}",
                m(&|r| r.throughput_bps.unwrap_or(0.0)) / 1e6,
                m(&|r| r.avg_delay_s.unwrap_or(0.0)) * 1e3,
                m(&|r| r.p95_delay_s.unwrap_or(0.0)) * 1e3,
            );
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netsim::{FlowSummary, LinkSpec, SweepPoint};

    fn summary(flow: usize, thr: f64, d: f64) -> FlowSummary {
        FlowSummary {
            flow,
            app: "minecraft".into(),
            fps: 60,
            target_rate_bps: 10e6,
            avg_throughput_bps: thr,
            avg_frame_delay_s: d,
            p95_frame_delay_s: 2.0 * d,
            frames_generated: 600.0,
            frames_delivered: 599.5,
            frames_dropped: 0.0,
            max_queue: 12,
            delay_trend: 1.0,
        }
    }

    fn campaign() -> Campaign {
        Campaign {
            name: "t".into(),
            variable: "users".into(),
            seeds: vec![1, 2],
            points: vec![SweepPoint {
                x: 1.0,
                link: LinkSpec::default(),
                flows: vec![],
                duration_s: 1.0,
            }],
        }
    }

    #[test]
    fn results_round_trip_into_report() {
        let results = vec![
            PointResult {
                x: 1.0,
                status: PointStatus::Ok,
                seeds: vec![1, 2],
                flows: vec![summary(0, 10e6, 0.001)],
            },
            PointResult {
                x: 2.0,
                status: PointStatus::Unstable,
                seeds: vec![1, 2],
                flows: vec![summary(0, 10e6, 0.001), summary(1, 12e6, 0.003)],
            },
            PointResult {
                x: 3.0,
                status: PointStatus::Failed("boom".into()),
                seeds: vec![1, 2],
                flows: vec![],
            },
        ];
        let csv = results_csv(&campaign(), &results);
        assert!(csv.starts_with("# schema=xrtraffic-results/1\n"));
        let (var, rows) = parse_results_csv(&csv).unwrap();
        assert_eq!(var, "users");
        assert_eq!(rows.len(), 4);
        let rep = report_csv(&var, &[("a".into(), rows)]);
        let lines: Vec<&str> = rep.lines().collect();
        assert_eq!(lines[3], "a,1,OK,10,1,2");
        assert_eq!(lines[4], "a,2,UNSTABLE,11,2,4");
        assert_eq!(lines[5], "a,3,FAILED,,,");

        let js: serde_json::Value = serde_json::from_str(&summary_json(&campaign(), &results)).unwrap();
        assert_eq!(js["schema"], SUMMARY_SCHEMA);
        assert_eq!(js["points"][1]["status"], "UNSTABLE");
        assert_eq!(js["points"][2]["error"], "boom");
    }

    #[test]
    fn parse_rejects_foreign_files() {
        assert!(parse_results_csv("a,b\n1,2\n").is_err());
        assert!(parse_results_csv("# schema=xrtraffic-results/2\n").is_err());
    }
}
