//! Per-application generative parameters.
//!
//! An application is described by five coefficients:
//!
//! - frame-size dispersion `D_fs = alpha * x^beta`
//! - 60 FPS inter-frame-interval dispersion `D_ifi = gamma`
//! - 30 FPS inter-frame-interval dispersion `D_ifi = delta * x^epsilon`
//!
//! where `x` is the data rate in Mbps.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::model::FrameRate;

#[derive(Debug, thiserror::Error)]
pub enum ProfileError {
    #[error("unknown application profile '{0}'")]
    Unknown(String),
    #[error("profile '{name}': coefficient {field} = {value} is invalid ({reason})")]
    InvalidCoefficient {
        name: String,
        field: &'static str,
        value: f64,
        reason: &'static str,
    },
    #[error("profile file line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("profile file is missing key '{0}'")]
    MissingKey(&'static str),
    #[error("a profile named '{0}' is already registered")]
    Duplicate(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AppProfile {
    pub name: String,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub delta: f64,
    pub epsilon: f64,
}

impl AppProfile {
    pub fn new(
        name: impl Into<String>,
        alpha: f64,
        beta: f64,
        gamma: f64,
        delta: f64,
        epsilon: f64,
    ) -> Result<Self, ProfileError> {
        let p = Self {
            name: name.into(),
            alpha,
            beta,
            gamma,
            delta,
            epsilon,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), ProfileError> {
        let bad = |field, value, reason| ProfileError::InvalidCoefficient {
            name: self.name.clone(),
            field,
            value,
            reason,
        };
        for (field, value) in [
            ("alpha", self.alpha),
            ("beta", self.beta),
            ("gamma", self.gamma),
            ("delta", self.delta),
            ("epsilon", self.epsilon),
        ] {
            if !value.is_finite() {
                return Err(bad(field, value, "must be finite"));
            }
        }
        for (field, value) in [
            ("alpha", self.alpha),
            ("gamma", self.gamma),
            ("delta", self.delta),
        ] {
            if value <= 0.0 {
                return Err(bad(field, value, "must be > 0"));
            }
        }
        Ok(())
    }

    /// Frame-size dispersion (scale / location) at `rate_mbps`.
    pub fn frame_size_dispersion(&self, rate_mbps: f64) -> f64 {
        debug_assert!(rate_mbps > 0.0);
        self.alpha * rate_mbps.powf(self.beta)
    }

    /// Inter-frame-interval dispersion at `rate_mbps`; constant at 60 FPS.
    pub fn ifi_dispersion(&self, frame_rate: FrameRate, rate_mbps: f64) -> f64 {
        debug_assert!(rate_mbps > 0.0);
        match frame_rate {
            FrameRate::Fps60 => self.gamma,
            FrameRate::Fps30 => self.delta * rate_mbps.powf(self.epsilon),
        }
    }

    /// Parse the plain `key = value` profile format. Blank lines and lines
    /// starting with `#` are ignored.
    pub fn from_kv_str(text: &str) -> Result<Self, ProfileError> {
        let mut name = None;
        let mut coeffs: [Option<f64>; 5] = [None; 5];
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| ProfileError::Parse {
                line: i + 1,
                message: format!("expected key = value, got '{line}'"),
            })?;
            let (key, value) = (key.trim(), value.trim());
            let slot = match key {
                "name" => {
                    name = Some(value.to_string());
                    continue;
                }
                "alpha" => 0,
                "beta" => 1,
                "gamma" => 2,
                "delta" => 3,
                "epsilon" => 4,
                other => {
                    return Err(ProfileError::Parse {
                        line: i + 1,
                        message: format!("unknown key '{other}'"),
                    })
                }
            };
            let v: f64 = value.parse().map_err(|_| ProfileError::Parse {
                line: i + 1,
                message: format!("'{value}' is not a number"),
            })?;
            coeffs[slot] = Some(v);
        }
        let get = |i: usize, key| coeffs[i].ok_or(ProfileError::MissingKey(key));
        Self::new(
            name.ok_or(ProfileError::MissingKey("name"))?,
            get(0, "alpha")?,
            get(1, "beta")?,
            get(2, "gamma")?,
            get(3, "delta")?,
            get(4, "epsilon")?,
        )
    }

    pub fn to_kv_string(&self) -> String {
        format!(
            "name = {}\nalpha = {}\nbeta = {}\ngamma = {}\ndelta = {}\nepsilon = {}\n",
            self.name, self.alpha, self.beta, self.gamma, self.delta, self.epsilon
        )
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ProfileError> {
        Self::from_kv_str(&std::fs::read_to_string(path)?)
    }
}

impl fmt::Display for AppProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}: alpha={} beta={} gamma={} delta={} epsilon={}",
            self.name, self.alpha, self.beta, self.gamma, self.delta, self.epsilon
        )
    }
}

/// Canonical identifier: lowercase, with runs of spaces/underscores mapped to `-`.
pub fn normalize_name(name: &str) -> String {
    name.trim()
        .to_lowercase()
        .split(|c: char| c.is_whitespace() || c == '_' || c == '-')
        .filter(|s| !s.is_empty())
        .collect::<Vec<_>>()
        .join("-")
}

fn builtin(name: &str, alpha: f64, beta: f64, gamma: f64, delta: f64, epsilon: f64) -> AppProfile {
    AppProfile {
        name: name.to_string(),
        alpha,
        beta,
        gamma,
        delta,
        epsilon,
    }
}

/// The four measured applications.
pub fn builtin_profiles() -> Vec<AppProfile> {
    vec![
        builtin("virus-popper", 0.1784, -0.2403, 0.03721, 0.01433, 0.1764),
        builtin("minecraft", 0.1857, -0.1872, 0.07133, 0.02419, 0.2267),
        builtin("ge-vr-tour", 0.2554, -0.2031, 0.03468, 0.01056, 0.2756),
        builtin("ge-vr-cities", 0.2597, -0.2539, 0.03457, 0.008953, 0.3119),
    ]
}

/// Built-in profiles plus any registered at runtime.
#[derive(Debug, Clone)]
pub struct ProfileRegistry {
    profiles: Vec<AppProfile>,
}

impl Default for ProfileRegistry {
    fn default() -> Self {
        Self {
            profiles: builtin_profiles(),
        }
    }
}

impl ProfileRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn list_profiles(&self) -> &[AppProfile] {
        &self.profiles
    }

    pub fn get(&self, name: &str) -> Result<&AppProfile, ProfileError> {
        let key = normalize_name(name);
        self.profiles
            .iter()
            .find(|p| normalize_name(&p.name) == key)
            .ok_or_else(|| ProfileError::Unknown(name.to_string()))
    }

    pub fn register(&mut self, profile: AppProfile) -> Result<(), ProfileError> {
        profile.validate()?;
        if self.get(&profile.name).is_ok() {
            return Err(ProfileError::Duplicate(profile.name));
        }
        self.profiles.push(profile);
        Ok(())
    }
}

/// Look up a built-in profile by (normalized) name.
pub fn builtin_profile(name: &str) -> Result<AppProfile, ProfileError> {
    ProfileRegistry::default().get(name).cloned()
}
