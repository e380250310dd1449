use serde::{Deserialize, Serialize};

use super::NetsimError;
use crate::burst::{AncillaryStreamSpec, FRAGMENT_PAYLOAD_BYTES, LINK_OVERHEAD_BYTES};
use crate::model::StreamConfig;

/// Effective capacity that places the eight-user 50 Mbps arena just past
/// saturation.
pub const DEFAULT_CAPACITY_BPS: f64 = 430e6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QueueDiscipline {
    /// One queue shared by every flow.
    #[default]
    Fifo,
    /// One queue per flow, served one fragment at a time in turn.
    RoundRobinPerFlow,
}

/// Abstract shared downlink: one server, one fragment at a time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkSpec {
    pub capacity_bps: f64,
    /// Fixed per-packet channel access time.
    pub per_fragment_overhead_time_s: f64,
    /// Per-packet bytes beyond the UDP payload.
    pub per_fragment_overhead_bytes: u32,
    pub queue_discipline: QueueDiscipline,
    /// Fragments; 0 means unbounded. Applies to the shared queue under
    /// FIFO and to each flow's queue under round robin.
    pub queue_limit: usize,
}

impl Default for LinkSpec {
    fn default() -> Self {
        Self {
            capacity_bps: DEFAULT_CAPACITY_BPS,
            per_fragment_overhead_time_s: 0.0,
            per_fragment_overhead_bytes: LINK_OVERHEAD_BYTES as u32,
            queue_discipline: QueueDiscipline::Fifo,
            queue_limit: 0,
        }
    }
}

impl LinkSpec {
    pub fn with_capacity(capacity_bps: f64) -> Self {
        Self {
            capacity_bps,
            ..Self::default()
        }
    }

    /// Zero per-packet overheads.
    pub fn ideal(capacity_bps: f64) -> Self {
        Self {
            capacity_bps,
            per_fragment_overhead_time_s: 0.0,
            per_fragment_overhead_bytes: 0,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), NetsimError> {
        if !(self.capacity_bps.is_finite() && self.capacity_bps > 0.0) {
            return Err(NetsimError::InvalidLink(format!(
                "capacity must be > 0, got {}",
                self.capacity_bps
            )));
        }
        if !(self.per_fragment_overhead_time_s.is_finite()
            && self.per_fragment_overhead_time_s >= 0.0)
        {
            return Err(NetsimError::InvalidLink(format!(
                "overhead time must be >= 0, got {}",
                self.per_fragment_overhead_time_s
            )));
        }
        Ok(())
    }

    /// Service time of one packet carrying `payload_bytes` of UDP payload.
    pub fn service_time_s(&self, payload_bytes: usize) -> f64 {
        8.0 * (payload_bytes as f64 + self.per_fragment_overhead_bytes as f64) / self.capacity_bps
            + self.per_fragment_overhead_time_s
    }

    /// [`Self::service_time_s`] in whole nanoseconds.
    pub fn service_time_ns(&self, payload_bytes: usize) -> u64 {
        (self.service_time_s(payload_bytes) * 1e9).round() as u64
    }

    pub fn video_fragment_time_ns(&self) -> u64 {
        self.service_time_ns(FRAGMENT_PAYLOAD_BYTES)
    }
}

/// One traffic source on the link.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowSpec {
    /// Stream model. Its duration and seed are superseded by the run's
    /// horizon and seed.
    pub stream: StreamConfig,
    /// Fixed start offset in seconds; `None` draws it uniformly in [0, 1).
    pub start_offset: Option<f64>,
    pub ancillary: Vec<AncillaryStreamSpec>,
}

impl FlowSpec {
    pub fn new(stream: StreamConfig) -> Self {
        Self {
            stream,
            start_offset: None,
            ancillary: Vec::new(),
        }
    }

    pub fn with_start_offset(mut self, offset_s: f64) -> Self {
        self.start_offset = Some(offset_s);
        self
    }

    pub fn with_ancillary(mut self, spec: AncillaryStreamSpec) -> Self {
        self.ancillary.push(spec);
        self
    }
}
