//! Frame traces and their CSV exchange format.
//!
//! ```text
//! # format=xrtraffic-trace/1
//! # app=virus-popper
//! # fps=60
//! # target_rate_bps=30000000
//! # measured_rate_bps=30012345.6
//! # seed=1
//! # duration_s=60
//! index,time_s,size_bytes
//! 0,0.016702,61877
//! ```
//!
//! Metadata lines are `# key=value`. Unknown keys are preserved. Timestamps
//! are written with microsecond precision.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

pub const TRACE_FORMAT: &str = "xrtraffic-trace/1";
const COLUMNS: &str = "index,time_s,size_bytes";

#[derive(Debug, thiserror::Error)]
pub enum TraceError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("trace metadata is missing '{0}'")]
    MissingMetadata(&'static str),
    #[error("frame {index}: timestamp {timestamp} does not increase on the previous frame")]
    NonIncreasingTime { index: usize, timestamp: f64 },
    #[error("frame {index}: size must be >= 1 byte")]
    ZeroSize { index: usize },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrameRecord {
    pub index: u64,
    /// Seconds from stream start.
    pub timestamp: f64,
    /// Bytes of video data.
    pub size: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TraceOrigin {
    Synthetic { seed: u64 },
    Captured,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceMetadata {
    pub app: String,
    pub fps: u32,
    /// Nominal (requested) data rate.
    pub target_rate_bps: f64,
    pub measured_rate_bps: f64,
    pub origin: TraceOrigin,
    pub duration_s: f64,
    /// Any further `key=value` pairs, kept in key order.
    pub extra: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    pub metadata: TraceMetadata,
    pub frames: Vec<FrameRecord>,
}

/// `8 * total_bytes / (last - first + mean_ifi)`.
///
/// The mean IFI is the empirical one when at least two frames exist, else
/// `fallback_ifi`. With the empirical mean this equals
/// `8 * mean_size / mean_ifi`.
pub fn measured_rate(frames: &[FrameRecord], fallback_ifi: f64) -> f64 {
    if frames.is_empty() {
        return 0.0;
    }
    let bytes: u64 = frames.iter().map(|f| f.size).sum();
    let span = frames[frames.len() - 1].timestamp - frames[0].timestamp;
    let mean_ifi = if frames.len() >= 2 {
        span / (frames.len() - 1) as f64
    } else {
        fallback_ifi
    };
    8.0 * bytes as f64 / (span + mean_ifi)
}

impl Trace {
    /// Validates frame ordering and sizes.
    pub fn new(metadata: TraceMetadata, frames: Vec<FrameRecord>) -> Result<Self, TraceError> {
        for (i, f) in frames.iter().enumerate() {
            if f.size == 0 {
                return Err(TraceError::ZeroSize { index: i });
            }
            if !f.timestamp.is_finite() || (i > 0 && f.timestamp <= frames[i - 1].timestamp) {
                return Err(TraceError::NonIncreasingTime {
                    index: i,
                    timestamp: f.timestamp,
                });
            }
        }
        Ok(Self { metadata, frames })
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    /// Rate recomputed from the frames.
    pub fn recompute_measured_rate(&self) -> f64 {
        let fallback = if self.metadata.fps > 0 {
            1.0 / self.metadata.fps as f64
        } else {
            0.0
        };
        measured_rate(&self.frames, fallback)
    }

    pub fn sizes(&self) -> Vec<f64> {
        self.frames.iter().map(|f| f.size as f64).collect()
    }

    /// Successive timestamp differences (`n - 1` values).
    pub fn ifis(&self) -> Vec<f64> {
        self.frames
            .windows(2)
            .map(|w| w[1].timestamp - w[0].timestamp)
            .collect()
    }

    pub fn to_csv_string(&self) -> String {
        let m = &self.metadata;
        let mut out = String::with_capacity(32 * self.frames.len() + 256);
        let _ = writeln!(out, "# format={TRACE_FORMAT}");
        let _ = writeln!(out, "# app={}", m.app);
        let _ = writeln!(out, "# fps={}", m.fps);
        let _ = writeln!(out, "# target_rate_bps={}", m.target_rate_bps);
        let _ = writeln!(out, "# measured_rate_bps={}", m.measured_rate_bps);
        match m.origin {
            TraceOrigin::Synthetic { seed } => {
                let _ = writeln!(out, "# seed={seed}");
            }
            TraceOrigin::Captured => out.push_str("# seed=captured\n"),
        }
        let _ = writeln!(out, "# duration_s={}", m.duration_s);
        for (k, v) in &m.extra {
            let _ = writeln!(out, "# {k}={v}");
        }
        out.push_str(COLUMNS);
        out.push('\n');
        for f in &self.frames {
            let _ = writeln!(out, "{},{:.6},{}", f.index, f.timestamp, f.size);
        }
        out
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        w.write_all(self.to_csv_string().as_bytes())
    }

    pub fn read_csv<R: Read>(r: R) -> Result<Self, TraceError> {
        let mut meta: BTreeMap<String, String> = BTreeMap::new();
        let mut frames = Vec::new();
        let mut seen_header = false;
        for (i, line) in BufReader::new(r).lines().enumerate() {
            let line = line?;
            let lineno = i + 1;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                if let Some((k, v)) = rest.trim().split_once('=') {
                    meta.insert(k.trim().to_string(), v.trim().to_string());
                }
                continue;
            }
            if !seen_header {
                if line != COLUMNS {
                    return Err(TraceError::Parse {
                        line: lineno,
                        message: format!("expected header '{COLUMNS}', got '{line}'"),
                    });
                }
                seen_header = true;
                continue;
            }
            frames.push(parse_row(line, lineno)?);
        }
        let metadata = metadata_from_map(meta, &frames)?;
        Self::new(metadata, frames)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, TraceError> {
        Self::read_csv(std::fs::File::open(path)?)
    }
}

fn parse_row(line: &str, lineno: usize) -> Result<FrameRecord, TraceError> {
    let err = |message: String| TraceError::Parse {
        line: lineno,
        message,
    };
    let mut cols = line.split(',');
    let mut next = |name: &str| {
        cols.next()
            .map(str::trim)
            .ok_or_else(|| err(format!("missing column {name}")))
    };
    let index = next("index")?;
    let time = next("time_s")?;
    let size = next("size_bytes")?;
    Ok(FrameRecord {
        index: index
            .parse()
            .map_err(|_| err(format!("bad index '{index}'")))?,
        timestamp: time
            .parse()
            .map_err(|_| err(format!("bad time_s '{time}'")))?,
        size: size
            .parse()
            .map_err(|_| err(format!("bad size_bytes '{size}'")))?,
    })
}

fn metadata_from_map(
    mut meta: BTreeMap<String, String>,
    frames: &[FrameRecord],
) -> Result<TraceMetadata, TraceError> {
    let bad = |key: &str, v: &str| TraceError::Parse {
        line: 0,
        message: format!("metadata {key}: cannot parse '{v}'"),
    };
    meta.remove("format");
    let app = meta.remove("app").ok_or(TraceError::MissingMetadata("app"))?;
    let fps_s = meta.remove("fps").ok_or(TraceError::MissingMetadata("fps"))?;
    let fps: u32 = fps_s.parse().map_err(|_| bad("fps", &fps_s))?;
    let rate_s = meta
        .remove("target_rate_bps")
        .ok_or(TraceError::MissingMetadata("target_rate_bps"))?;
    let target_rate_bps: f64 = rate_s.parse().map_err(|_| bad("target_rate_bps", &rate_s))?;
    let fallback_ifi = if fps > 0 { 1.0 / fps as f64 } else { 0.0 };
    let measured_rate_bps = match meta.remove("measured_rate_bps") {
        Some(v) => v.parse().map_err(|_| bad("measured_rate_bps", &v))?,
        None => measured_rate(frames, fallback_ifi),
    };
    let origin = match meta.remove("seed") {
        None => TraceOrigin::Captured,
        Some(v) if v == "captured" => TraceOrigin::Captured,
        Some(v) => TraceOrigin::Synthetic {
            seed: v.parse().map_err(|_| bad("seed", &v))?,
        },
    };
    let duration_s = match meta.remove("duration_s") {
        Some(v) => v.parse().map_err(|_| bad("duration_s", &v))?,
        None => frames.last().map_or(0.0, |f| f.timestamp),
    };
    Ok(TraceMetadata {
        app,
        fps,
        target_rate_bps,
        measured_rate_bps,
        origin,
        duration_s,
        extra: meta,
    })
}
