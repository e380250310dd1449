//! Discrete-event simulation of one shared downlink carrying fragment
//! bursts from several XR flows.
//!
//! The link is a single server that transmits one packet at a time. Every
//! video frame arrives as a burst of fixed-size fragments at its generation
//! instant; the frame's delay is measured from that instant to the end of
//! its last fragment's transmission. Event times are integer nanoseconds.

mod campaign;
mod engine;
mod link;
mod percentile;
mod results;
mod sweep;

pub use campaign::{Campaign, CampaignError, FlowTemplate, SweepVariable, CAMPAIGN_SCHEMA};
pub use engine::{run_simulation, simulate, ByteLedger, FlowMetrics, LinkStats, SimOutcome};
pub use link::{FlowSpec, LinkSpec, QueueDiscipline, DEFAULT_CAPACITY_BPS};
pub use percentile::percentile;
pub use results::{
    parse_results_csv, report_csv, results_csv, summary_json, ResultRow, REPORT_SCHEMA,
    RESULTS_SCHEMA, SUMMARY_SCHEMA,
};
pub use sweep::{sweep, FlowSummary, PointResult, PointStatus, SweepPoint, UNSTABLE_TREND};

use crate::model::ModelError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum NetsimError {
    #[error("at least one flow is required")]
    NoFlows,
    #[error("simulation duration must be finite and > 0 s, got {0}")]
    InvalidDuration(f64),
    #[error("invalid link: {0}")]
    InvalidLink(String),
    #[error("flow {flow}: start offset {offset} outside [0, 1) s")]
    InvalidStartOffset { flow: usize, offset: f64 },
    #[error("percentile must lie in [0, 100], got {0}")]
    InvalidPercentile(f64),
    #[error("empty input")]
    EmptyInput,
    #[error("sweep needs at least one point and one seed")]
    EmptySweep,
    #[error("flow {flow}: {source}")]
    Flow { flow: usize, source: ModelError },
}
