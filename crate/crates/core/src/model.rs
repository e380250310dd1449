//! Generative model for cloud-XR downlink video traffic.
//!
//! Frame sizes and inter-frame intervals (IFIs) are independent draws from
//! logistic distributions. Locations are pinned to the constant-bit-rate
//! ideal (`R / F` bits per frame, `1 / F` seconds); scales are the location
//! times the application's dispersion law evaluated at the data rate in Mbps.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::logistic::{LogisticError, LogisticParams};
use crate::profile::AppProfile;
use crate::rng::{XrRng, TRAFFIC_STREAM};
use crate::trace::{measured_rate, FrameRecord, Trace, TraceMetadata, TraceOrigin};

/// Data rates the dispersion laws were fitted over.
pub const ADVISED_RATE_RANGE_BPS: (f64, f64) = (10e6, 50e6);

/// IFI draws at or below this are rejected so successive timestamps stay
/// distinct at the trace's microsecond resolution.
pub const MIN_IFI_S: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ModelError {
    #[error("unsupported frame rate {0} FPS (supported: {{30, 60}})")]
    UnsupportedFrameRate(u32),
    #[error("data rate must be finite and > 0 bps, got {0}")]
    InvalidRate(f64),
    #[error("duration must be finite and > 0 s, got {0}")]
    InvalidDuration(f64),
    #[error("dispersion scale must be finite and >= 0, got {0}")]
    InvalidDispersionScale(f64),
    #[error("duration {duration_s} s produced no frames (first frame due at {first_frame_s} s)")]
    EmptyTrace { duration_s: f64, first_frame_s: f64 },
    #[error(transparent)]
    Logistic(#[from] LogisticError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum FrameRate {
    Fps30,
    Fps60,
}

impl FrameRate {
    pub fn fps(self) -> u32 {
        match self {
            FrameRate::Fps30 => 30,
            FrameRate::Fps60 => 60,
        }
    }

    pub fn ifi_s(self) -> f64 {
        1.0 / self.fps() as f64
    }
}

impl TryFrom<u32> for FrameRate {
    type Error = ModelError;

    fn try_from(fps: u32) -> Result<Self, Self::Error> {
        match fps {
            30 => Ok(FrameRate::Fps30),
            60 => Ok(FrameRate::Fps60),
            other => Err(ModelError::UnsupportedFrameRate(other)),
        }
    }
}

impl fmt::Display for FrameRate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} FPS", self.fps())
    }
}

/// Which rate drives the model: the requested target, or a rate measured
/// from real traffic (typically a few percent above target).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum RateMode {
    TargetRate,
    EmpiricalRate(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ConfigWarning {
    /// Rate lies outside the range the dispersion laws were fitted on.
    RateOutOfRange { rate_bps: f64 },
}

impl fmt::Display for ConfigWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigWarning::RateOutOfRange { rate_bps } => write!(
                f,
                "WARN rate_out_of_range rate_bps={} advised_min_bps={} advised_max_bps={} \
                 (dispersion laws are extrapolated)",
                rate_bps, ADVISED_RATE_RANGE_BPS.0, ADVISED_RATE_RANGE_BPS.1
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StreamConfig {
    pub profile: AppProfile,
    pub frame_rate: FrameRate,
    pub target_rate_bps: f64,
    pub duration_s: f64,
    pub seed: u64,
    pub rate_mode: RateMode,
    /// Multiplier on both dispersion laws. 1 is the model; 0 yields a
    /// deterministic constant-size, constant-interval stream.
    pub dispersion_scale: f64,
}

impl StreamConfig {
    pub fn new(
        profile: AppProfile,
        fps: u32,
        target_rate_bps: f64,
        duration_s: f64,
        seed: u64,
    ) -> Result<Self, ModelError> {
        let cfg = Self {
            profile,
            frame_rate: FrameRate::try_from(fps)?,
            target_rate_bps,
            duration_s,
            seed,
            rate_mode: RateMode::TargetRate,
            dispersion_scale: 1.0,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_rate_mode(mut self, mode: RateMode) -> Self {
        self.rate_mode = mode;
        self
    }

    pub fn with_dispersion_scale(mut self, scale: f64) -> Self {
        self.dispersion_scale = scale;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_duration(mut self, duration_s: f64) -> Self {
        self.duration_s = duration_s;
        self
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let rate_ok = |r: f64| r.is_finite() && r > 0.0;
        if !rate_ok(self.target_rate_bps) {
            return Err(ModelError::InvalidRate(self.target_rate_bps));
        }
        if let RateMode::EmpiricalRate(r) = self.rate_mode {
            if !rate_ok(r) {
                return Err(ModelError::InvalidRate(r));
            }
        }
        if !(self.duration_s.is_finite() && self.duration_s > 0.0) {
            return Err(ModelError::InvalidDuration(self.duration_s));
        }
        if !(self.dispersion_scale.is_finite() && self.dispersion_scale >= 0.0) {
            return Err(ModelError::InvalidDispersionScale(self.dispersion_scale));
        }
        Ok(())
    }

    /// Rate that drives the model, honouring the rate mode.
    pub fn rate_in_use_bps(&self) -> f64 {
        match self.rate_mode {
            RateMode::TargetRate => self.target_rate_bps,
            RateMode::EmpiricalRate(r) => r,
        }
    }

    pub fn warnings(&self) -> Vec<ConfigWarning> {
        let (lo, hi) = ADVISED_RATE_RANGE_BPS;
        let mut rates = vec![self.target_rate_bps];
        if let RateMode::EmpiricalRate(r) = self.rate_mode {
            rates.push(r);
        }
        rates
            .into_iter()
            .filter(|r| *r < lo || *r > hi)
            .map(|rate_bps| ConfigWarning::RateOutOfRange { rate_bps })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedTargets {
    /// Bytes.
    pub fs_location: f64,
    /// Seconds.
    pub ifi_location: f64,
    /// Bytes.
    pub fs_scale: f64,
    /// Seconds.
    pub ifi_scale: f64,
}

impl DerivedTargets {
    pub fn frame_size_params(&self) -> Result<LogisticParams, LogisticError> {
        params(self.fs_location, self.fs_scale)
    }

    pub fn ifi_params(&self) -> Result<LogisticParams, LogisticError> {
        params(self.ifi_location, self.ifi_scale)
    }
}

fn params(location: f64, scale: f64) -> Result<LogisticParams, LogisticError> {
    if scale == 0.0 {
        LogisticParams::point_mass(location)
    } else {
        LogisticParams::new(location, scale)
    }
}

pub fn derive_targets(config: &StreamConfig) -> Result<DerivedTargets, ModelError> {
    config.validate()?;
    let rate_bps = config.rate_in_use_bps();
    let rate_mbps = rate_bps / 1e6;
    let fps = config.frame_rate.fps() as f64;
    let fs_location = rate_bps / (8.0 * fps);
    let ifi_location = 1.0 / fps;
    let fs_disp = config.profile.frame_size_dispersion(rate_mbps) * config.dispersion_scale;
    let ifi_disp =
        config.profile.ifi_dispersion(config.frame_rate, rate_mbps) * config.dispersion_scale;
    Ok(DerivedTargets {
        fs_location,
        ifi_location,
        fs_scale: fs_disp * fs_location,
        ifi_scale: ifi_disp * ifi_location,
    })
}

/// Counts of rejected (non-physical) draws during synthesis.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RejectionCounts {
    pub size: u64,
    pub ifi: u64,
}

/// Synthesize a trace using the config's own substream.
pub fn synthesize_trace(config: &StreamConfig) -> Result<Trace, ModelError> {
    let mut rng = XrRng::new(config.seed, TRAFFIC_STREAM);
    synthesize_with_rng(config, &mut rng)
}

/// Synthesize a trace from an explicit generator.
///
/// Frame `k` is emitted at the sum of `k + 1` IFI draws; generation stops
/// once that sum exceeds the duration. Draws of non-positive size or of an
/// IFI below [`MIN_IFI_S`] are redrawn. Sizes are rounded to whole bytes
/// with a floor of one byte.
pub fn synthesize_with_rng(config: &StreamConfig, rng: &mut XrRng) -> Result<Trace, ModelError> {
    let targets = derive_targets(config)?;
    let size_dist = targets.frame_size_params()?;
    let ifi_dist = targets.ifi_params()?;

    let expected = (config.duration_s / targets.ifi_location).ceil() as usize + 16;
    let mut frames = Vec::with_capacity(expected);
    let mut rejected = RejectionCounts::default();
    let mut clock = 0.0;
    let mut first_frame_s = f64::NAN;
    loop {
        let (ifi, r) = ifi_dist.sample_above(rng, MIN_IFI_S);
        rejected.ifi += r;
        clock += ifi;
        if first_frame_s.is_nan() {
            first_frame_s = clock;
        }
        if clock > config.duration_s {
            break;
        }
        let (size, r) = size_dist.sample_above(rng, 0.0);
        rejected.size += r;
        frames.push(FrameRecord {
            index: frames.len() as u64,
            timestamp: clock,
            size: size.round().max(1.0) as u64,
        });
    }
    if frames.is_empty() {
        return Err(ModelError::EmptyTrace {
            duration_s: config.duration_s,
            first_frame_s,
        });
    }

    let mut extra = BTreeMap::new();
    let (mode, model_rate) = match config.rate_mode {
        RateMode::TargetRate => ("target", config.target_rate_bps),
        RateMode::EmpiricalRate(r) => ("empirical", r),
    };
    extra.insert("rate_mode".to_string(), mode.to_string());
    extra.insert("model_rate_bps".to_string(), model_rate.to_string());
    extra.insert("rejected_size_draws".to_string(), rejected.size.to_string());
    extra.insert("rejected_ifi_draws".to_string(), rejected.ifi.to_string());
    if config.dispersion_scale != 1.0 {
        extra.insert(
            "dispersion_scale".to_string(),
            config.dispersion_scale.to_string(),
        );
    }

    let metadata = TraceMetadata {
        app: config.profile.name.clone(),
        fps: config.frame_rate.fps(),
        target_rate_bps: config.target_rate_bps,
        measured_rate_bps: measured_rate(&frames, targets.ifi_location),
        origin: TraceOrigin::Synthetic { seed: config.seed },
        duration_s: config.duration_s,
        extra,
    };
    Ok(Trace { metadata, frames })
}

/// Rejection counts recorded in a synthetic trace's metadata.
pub fn rejection_counts(trace: &Trace) -> RejectionCounts {
    let get = |k: &str| {
        trace
            .metadata
            .extra
            .get(k)
            .and_then(|v| v.parse().ok())
            .unwrap_or(0)
    };
    RejectionCounts {
        size: get("rejected_size_draws"),
        ifi: get("rejected_ifi_draws"),
    }
}
