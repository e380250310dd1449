//! Declarative campaign files (TOML).
//!
//! ```toml
//! schema = "xrtraffic-campaign/1"
//! name = "arena"
//! duration_s = 60
//! seeds = [1, 2, 3]
//!
//! [link]
//! capacity = "430M"
//! overhead_time_s = 0.0
//! overhead_bytes = 42
//! discipline = "fifo"        # or "round-robin"
//! queue_limit = 0
//!
//! [[flows]]
//! app = "ge-vr-cities"       # built-in name or profile file
//! fps = 30
//! rate = "50M"
//! empirical_factor = 1.07    # or empirical_rate = "53.5M"
//! users = 1
//! ancillary = ["head-tracking"]
//!
//! [sweep]
//! variable = "users"         # users | rate | capacity | fps | duration
//! values = [1, 2, 3, 4, 5, 6, 7, 8]
//! ```
//!
//! Without `[sweep]` the campaign is a single point.

use serde::Deserialize;

use super::link::{FlowSpec, LinkSpec, QueueDiscipline};
use super::sweep::SweepPoint;
use crate::burst::AncillaryStreamSpec;
use crate::model::{RateMode, StreamConfig};
use crate::profile::AppProfile;
use crate::units::parse_rate;

pub const CAMPAIGN_SCHEMA: &str = "xrtraffic-campaign/1";

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CampaignError {
    #[error("campaign parse error: {0}")]
    Parse(String),
    #[error("invalid campaign: {0}")]
    Invalid(String),
    #[error("flow '{app}': {message}")]
    Profile { app: String, message: String },
}

fn invalid(msg: impl Into<String>) -> CampaignError {
    CampaignError::Invalid(msg.into())
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
enum Rate {
    Number(f64),
    Text(String),
}

impl Rate {
    fn bps(&self) -> Result<f64, CampaignError> {
        match self {
            Rate::Number(v) if v.is_finite() && *v > 0.0 => Ok(*v),
            Rate::Number(v) => Err(invalid(format!("rate must be > 0, got {v}"))),
            Rate::Text(s) => parse_rate(s).map_err(|e| invalid(e.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepVariable {
    Users,
    Rate,
    Capacity,
    Fps,
    Duration,
}

impl SweepVariable {
    pub fn name(self) -> &'static str {
        match self {
            SweepVariable::Users => "users",
            SweepVariable::Rate => "rate_mbps",
            SweepVariable::Capacity => "capacity_mbps",
            SweepVariable::Fps => "fps",
            SweepVariable::Duration => "duration_s",
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLink {
    capacity: Option<Rate>,
    overhead_time_s: Option<f64>,
    overhead_bytes: Option<u32>,
    discipline: Option<String>,
    queue_limit: Option<usize>,
}

/// A flow description replicated `users` times.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowTemplate {
    pub app: String,
    pub fps: u32,
    rate: Rate,
    empirical_rate: Option<Rate>,
    pub empirical_factor: Option<f64>,
    pub dispersion_scale: Option<f64>,
    pub start_offset: Option<f64>,
    #[serde(default = "one")]
    pub users: usize,
    #[serde(default)]
    pub ancillary: Vec<String>,
}

fn one() -> usize {
    1
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSweep {
    variable: SweepVariable,
    values: Vec<Rate>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCampaign {
    schema: Option<String>,
    name: Option<String>,
    duration_s: f64,
    seeds: Vec<u64>,
    link: Option<RawLink>,
    flows: Vec<FlowTemplate>,
    sweep: Option<RawSweep>,
}

/// An expanded campaign: every point fully specified.
#[derive(Debug, Clone, PartialEq)]
pub struct Campaign {
    pub name: String,
    /// Column name of the swept variable (`point` for single-point runs).
    pub variable: String,
    pub seeds: Vec<u64>,
    pub points: Vec<SweepPoint>,
}

fn build_link(raw: Option<RawLink>) -> Result<LinkSpec, CampaignError> {
    let mut link = LinkSpec::default();
    if let Some(r) = raw {
        if let Some(c) = r.capacity {
            link.capacity_bps = c.bps()?;
        }
        if let Some(t) = r.overhead_time_s {
            link.per_fragment_overhead_time_s = t;
        }
        if let Some(b) = r.overhead_bytes {
            link.per_fragment_overhead_bytes = b;
        }
        if let Some(d) = r.discipline {
            link.queue_discipline = match d.to_ascii_lowercase().as_str() {
                "fifo" => QueueDiscipline::Fifo,
                "round-robin" | "round_robin" | "rr" => QueueDiscipline::RoundRobinPerFlow,
                other => {
                    return Err(invalid(format!(
                        "unknown discipline '{other}' (expected fifo or round-robin)"
                    )))
                }
            };
        }
        if let Some(q) = r.queue_limit {
            link.queue_limit = q;
        }
    }
    link.validate().map_err(|e| invalid(e.to_string()))?;
    Ok(link)
}

fn expand_flows(
    templates: &[FlowTemplate],
    profile_for: &dyn Fn(&str) -> Result<AppProfile, String>,
) -> Result<Vec<FlowSpec>, CampaignError> {
    let mut out = Vec::new();
    for t in templates {
        let profile = profile_for(&t.app).map_err(|message| CampaignError::Profile {
            app: t.app.clone(),
            message,
        })?;
        let rate = t.rate.bps()?;
        let mode = match (&t.empirical_rate, t.empirical_factor) {
            (Some(_), Some(_)) => {
                return Err(invalid(format!(
                    "flow '{}': set empirical_rate or empirical_factor, not both",
                    t.app
                )))
            }
            (Some(r), None) => RateMode::EmpiricalRate(r.bps()?),
            (None, Some(f)) if f.is_finite() && f > 0.0 => RateMode::EmpiricalRate(rate * f),
            (None, Some(f)) => return Err(invalid(format!("empirical_factor must be > 0, got {f}"))),
            (None, None) => RateMode::TargetRate,
        };
        let stream = StreamConfig::new(profile, t.fps, rate, 1.0, 0)
            .map_err(|e| CampaignError::Profile {
                app: t.app.clone(),
                message: e.to_string(),
            })?
            .with_rate_mode(mode)
            .with_dispersion_scale(t.dispersion_scale.unwrap_or(1.0));
        stream.validate().map_err(|e| CampaignError::Profile {
            app: t.app.clone(),
            message: e.to_string(),
        })?;
        let mut ancillary = Vec::new();
        for name in &t.ancillary {
            ancillary.push(
                AncillaryStreamSpec::by_name(name)
                    .ok_or_else(|| invalid(format!("unknown ancillary stream '{name}'")))?,
            );
        }
        if let Some(o) = t.start_offset {
            if !(0.0..1.0).contains(&o) {
                return Err(invalid(format!("start_offset {o} outside [0, 1)")));
            }
        }
        for _ in 0..t.users {
            out.push(FlowSpec {
                stream: stream.clone(),
                start_offset: t.start_offset,
                ancillary: ancillary.clone(),
            });
        }
    }
    if out.is_empty() {
        return Err(invalid("campaign defines no flows"));
    }
    Ok(out)
}

impl Campaign {
    /// Parse and expand a campaign. `profile_for` resolves each flow's
    /// `app` to a profile.
    pub fn from_toml_str(
        text: &str,
        profile_for: &dyn Fn(&str) -> Result<AppProfile, String>,
    ) -> Result<Self, CampaignError> {
        let raw: RawCampaign = toml::from_str(text).map_err(|e| CampaignError::Parse(e.to_string()))?;
        if let Some(s) = &raw.schema {
            if s != CAMPAIGN_SCHEMA {
                return Err(invalid(format!(
                    "unsupported schema '{s}' (expected {CAMPAIGN_SCHEMA})"
                )));
            }
        }
        if raw.seeds.is_empty() {
            return Err(invalid("seeds must not be empty"));
        }
        if !(raw.duration_s.is_finite() && raw.duration_s > 0.0) {
            return Err(invalid(format!("duration_s must be > 0, got {}", raw.duration_s)));
        }
        let link = build_link(raw.link)?;
        let name = raw.name.unwrap_or_else(|| "campaign".to_string());

        let Some(sw) = raw.sweep else {
            let flows = expand_flows(&raw.flows, profile_for)?;
            return Ok(Campaign {
                name,
                variable: "point".to_string(),
                seeds: raw.seeds,
                points: vec![SweepPoint {
                    x: 0.0,
                    link,
                    flows,
                    duration_s: raw.duration_s,
                }],
            });
        };
        if sw.values.is_empty() {
            return Err(invalid("sweep.values must not be empty"));
        }

        let mut points = Vec::with_capacity(sw.values.len());
        for v in &sw.values {
            let mut templates = raw.flows.clone();
            let mut link = link;
            let mut duration_s = raw.duration_s;
            let number = |v: &Rate| match v {
                Rate::Number(n) => Ok(*n),
                Rate::Text(s) => s
                    .trim()
                    .parse::<f64>()
                    .map_err(|_| invalid(format!("sweep value '{s}' is not a number"))),
            };
            let x = match sw.variable {
                SweepVariable::Users => {
                    let n = number(v)?;
                    if !(n >= 1.0 && n.fract() == 0.0) {
                        return Err(invalid(format!("user count must be a positive integer, got {n}")));
                    }
                    templates.iter_mut().for_each(|t| t.users = n as usize);
                    n
                }
                SweepVariable::Rate => {
                    let bps = v.bps()?;
                    for t in &mut templates {
                        if t.empirical_rate.is_some() {
                            return Err(invalid(
                                "rate sweeps need empirical_factor rather than a fixed empirical_rate",
                            ));
                        }
                        t.rate = Rate::Number(bps);
                    }
                    bps / 1e6
                }
                SweepVariable::Capacity => {
                    let bps = v.bps()?;
                    link.capacity_bps = bps;
                    bps / 1e6
                }
                SweepVariable::Fps => {
                    let f = number(v)?;
                    templates.iter_mut().for_each(|t| t.fps = f as u32);
                    f
                }
                SweepVariable::Duration => {
                    duration_s = number(v)?;
                    if !(duration_s.is_finite() && duration_s > 0.0) {
                        return Err(invalid(format!("duration must be > 0, got {duration_s}")));
                    }
                    duration_s
                }
            };
            points.push(SweepPoint {
                x,
                link,
                flows: expand_flows(&templates, profile_for)?,
                duration_s,
            });
        }
        Ok(Campaign {
            name,
            variable: sw.variable.name().to_string(),
            seeds: raw.seeds,
            points,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::builtin_profile;

    fn resolve(name: &str) -> Result<AppProfile, String> {
        builtin_profile(name).map_err(|e| e.to_string())
    }

    const ARENA: &str = r#"
        schema = "xrtraffic-campaign/1"
        name = "arena"
        duration_s = 20
        seeds = [1, 2]
        [link]
        capacity = "430M"
        [[flows]]
        app = "ge-vr-cities"
        fps = 30
        rate = "50M"
        empirical_factor = 1.07
        ancillary = ["head-tracking"]
        [sweep]
        variable = "users"
        values = [1, 2, 8]
    "#;

    #[test]
    fn users_sweep_expands() {
        let c = Campaign::from_toml_str(ARENA, &resolve).unwrap();
        assert_eq!(c.variable, "users");
        assert_eq!(c.points.len(), 3);
        assert_eq!(c.points[2].flows.len(), 8);
        assert_eq!(c.points[2].x, 8.0);
        let f = &c.points[0].flows[0];
        assert_eq!(f.stream.rate_mode, RateMode::EmpiricalRate(50e6 * 1.07));
        assert_eq!(f.ancillary.len(), 1);
        assert_eq!(c.points[0].link.capacity_bps, 430e6);
    }

    #[test]
    fn rate_sweep_scales_empirical_rate() {
        let text = r#"
            duration_s = 5
            seeds = [3]
            [[flows]]
            app = "minecraft"
            fps = 60
            rate = 10e6
            empirical_factor = 1.1
            [sweep]
            variable = "rate"
            values = ["10M", "20M", 30000000]
        "#;
        let c = Campaign::from_toml_str(text, &resolve).unwrap();
        let xs: Vec<f64> = c.points.iter().map(|p| p.x).collect();
        assert_eq!(xs, vec![10.0, 20.0, 30.0]);
        let s = &c.points[1].flows[0].stream;
        assert_eq!(s.target_rate_bps, 20e6);
        assert_eq!(s.rate_mode, RateMode::EmpiricalRate(20e6 * 1.1));
    }

    #[test]
    fn single_point_without_sweep() {
        let text = r#"
            duration_s = 5
            seeds = [1]
            [[flows]]
            app = "virus-popper"
            fps = 30
            rate = "30M"
            users = 2
        "#;
        let c = Campaign::from_toml_str(text, &resolve).unwrap();
        assert_eq!(c.points.len(), 1);
        assert_eq!(c.points[0].flows.len(), 2);
        assert_eq!(c.points[0].link, LinkSpec::default());
    }

    #[test]
    fn rejects_bad_input() {
        let bad_fps = ARENA.replace("fps = 30", "fps = 90");
        assert!(matches!(
            Campaign::from_toml_str(&bad_fps, &resolve),
            Err(CampaignError::Profile { .. })
        ));
        let bad_app = ARENA.replace("ge-vr-cities", "pong");
        assert!(Campaign::from_toml_str(&bad_app, &resolve).is_err());
        let unknown_key = ARENA.replace("name = \"arena\"", "nmae = 1");
        assert!(matches!(
            Campaign::from_toml_str(&unknown_key, &resolve),
            Err(CampaignError::Parse(_))
        ));
        let no_seeds = ARENA.replace("seeds = [1, 2]", "seeds = []");
        assert!(Campaign::from_toml_str(&no_seeds, &resolve).is_err());
        let schema = ARENA.replace("campaign/1", "campaign/9");
        assert!(Campaign::from_toml_str(&schema, &resolve).is_err());
    }
}
