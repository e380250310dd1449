//! Constant-rate side streams: head tracking and frame feedback.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Uplink,
    Downlink,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AncillaryStreamSpec {
    pub name: String,
    pub direction: Direction,
    /// UDP payload bytes per packet.
    pub packet_payload: u32,
    pub mean_rate_bps: f64,
}

pub const HEAD_TRACKING_PAYLOAD: u32 = 192;
pub const HEAD_TRACKING_ALT_PAYLOAD: u32 = 97;
pub const HEAD_TRACKING_RATE_BPS: f64 = 140e3;
pub const UPLINK_FEEDBACK_PAYLOAD: u32 = 21;
pub const UPLINK_FEEDBACK_RATE_BPS: f64 = 5.04e3;
pub const DOWNLINK_FEEDBACK_PAYLOAD: u32 = 10;
pub const DOWNLINK_FEEDBACK_RATE_BPS: f64 = 4e3;

impl AncillaryStreamSpec {
    pub fn new(
        name: impl Into<String>,
        direction: Direction,
        packet_payload: u32,
        mean_rate_bps: f64,
    ) -> Self {
        Self {
            name: name.into(),
            direction,
            packet_payload,
            mean_rate_bps,
        }
    }

    pub fn head_tracking() -> Self {
        Self::new(
            "head-tracking",
            Direction::Uplink,
            HEAD_TRACKING_PAYLOAD,
            HEAD_TRACKING_RATE_BPS,
        )
    }

    /// The shorter head-tracking payload seen in some captures.
    pub fn head_tracking_alt() -> Self {
        Self::new(
            "head-tracking-alt",
            Direction::Uplink,
            HEAD_TRACKING_ALT_PAYLOAD,
            HEAD_TRACKING_RATE_BPS,
        )
    }

    pub fn uplink_feedback() -> Self {
        Self::new(
            "uplink-feedback",
            Direction::Uplink,
            UPLINK_FEEDBACK_PAYLOAD,
            UPLINK_FEEDBACK_RATE_BPS,
        )
    }

    pub fn downlink_feedback() -> Self {
        Self::new(
            "downlink-feedback",
            Direction::Downlink,
            DOWNLINK_FEEDBACK_PAYLOAD,
            DOWNLINK_FEEDBACK_RATE_BPS,
        )
    }

    /// Look up one of the default streams by name; `_` and `-` are
    /// interchangeable and case is ignored.
    pub fn by_name(name: &str) -> Option<Self> {
        let name = name.trim().to_ascii_lowercase().replace('_', "-");
        [
            Self::head_tracking(),
            Self::head_tracking_alt(),
            Self::uplink_feedback(),
            Self::downlink_feedback(),
        ]
        .into_iter()
        .find(|s| s.name == name)
    }

    /// `8 * payload / mean_rate`.
    pub fn period_s(&self) -> f64 {
        8.0 * self.packet_payload as f64 / self.mean_rate_bps
    }
}

/// Periodic schedule with phase 0: packets at `k * period` for every
/// `k * period < duration`.
pub fn ancillary_packet_schedule(spec: &AncillaryStreamSpec, duration_s: f64) -> Vec<(f64, u32)> {
    assert!(spec.mean_rate_bps > 0.0, "ancillary mean rate must be > 0");
    let period = spec.period_s();
    let mut out = Vec::new();
    let mut k = 0u64;
    loop {
        let t = k as f64 * period;
        if t >= duration_s {
            break;
        }
        out.push((t, spec.packet_payload));
        k += 1;
    }
    out
}
