//! TOML scenario files: duration, seed, gait commands, disturbances and config overrides.

use serde::Deserialize;
use std::collections::BTreeMap;

use tiltphase::actions::GaitCommand;
use tiltphase::plant::{Disturbance, DisturbanceKind};

use crate::config::Settings;
use crate::error::HarnessError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DisturbanceKindSpec {
    Impulse,
    ConstantForce,
    SoftwareBias,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CommandSpec {
    pub t: f64,
    #[serde(default)]
    pub vx: f64,
    #[serde(default)]
    pub vy: f64,
    #[serde(default)]
    pub vz: f64,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DisturbanceSpec {
    pub kind: DisturbanceKindSpec,
    /// Direction in the tilt phase plane, rad; 0 tilts towards +px.
    #[serde(default)]
    pub direction: f64,
    pub magnitude: f64,
    pub start: f64,
    #[serde(default)]
    pub duration: f64,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum OverrideValue {
    Bool(bool),
    Int(i64),
    Float(f64),
    Text(String),
}

impl OverrideValue {
    fn to_flat(&self) -> String {
        match self {
            OverrideValue::Bool(b) => b.to_string(),
            OverrideValue::Int(i) => i.to_string(),
            OverrideValue::Float(f) => format!("{f}"),
            OverrideValue::Text(s) => s.clone(),
        }
    }
}

fn default_controller() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub duration: f64,
    #[serde(default)]
    pub seed: u64,
    /// When false every corrective action is disabled.
    #[serde(default = "default_controller")]
    pub controller: bool,
    #[serde(default, rename = "command")]
    pub commands: Vec<CommandSpec>,
    #[serde(default, rename = "disturbance")]
    pub disturbances: Vec<DisturbanceSpec>,
    #[serde(default)]
    pub overrides: BTreeMap<String, OverrideValue>,
}

impl Scenario {
    pub fn from_toml(text: &str) -> Result<Self, HarnessError> {
        let s: Scenario = toml::from_str(text).map_err(|e| HarnessError::Scenario(e.to_string()))?;
        s.validate()?;
        Ok(s)
    }

    pub fn load(path: &std::path::Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        Self::from_toml(&text)
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let fail = |m: String| Err(HarnessError::Scenario(m));
        if !(self.duration > 0.0 && self.duration.is_finite()) {
            return fail(format!("field `duration` must be positive, got {}", self.duration));
        }
        for (i, pair) in self.commands.windows(2).enumerate() {
            if pair[1].t < pair[0].t {
                return fail(format!("command[{}].t = {} precedes the previous command", i + 1, pair[1].t));
            }
        }
        for (i, c) in self.commands.iter().enumerate() {
            if ![c.t, c.vx, c.vy, c.vz].iter().all(|v| v.is_finite()) {
                return fail(format!("command[{i}] has a non-finite field"));
            }
        }
        for (i, d) in self.disturbances.iter().enumerate() {
            if !(d.magnitude >= 0.0 && d.magnitude.is_finite()) {
                return fail(format!("disturbance[{i}].magnitude must be non-negative"));
            }
            if !(d.start >= 0.0 && d.start.is_finite()) {
                return fail(format!("disturbance[{i}].start must be non-negative"));
            }
            if !(d.duration >= 0.0 && d.duration.is_finite()) {
                return fail(format!("disturbance[{i}].duration must be non-negative"));
            }
            if !d.direction.is_finite() {
                return fail(format!("disturbance[{i}].direction must be finite"));
            }
        }
        Ok(())
    }

    /// Settings with the scenario overrides and controller flag applied.
    pub fn apply(&self, base: &Settings) -> Result<Settings, HarnessError> {
        let mut s = base.clone();
        for (key, value) in &self.overrides {
            s.set(key, &value.to_flat())
                .map_err(|reason| HarnessError::Scenario(format!("overrides.{key}: {reason}")))?;
        }
        if !self.controller {
            s.controller.set_all_enabled(false);
        }
        s.validate()?;
        Ok(s)
    }

    pub fn command_schedule(&self) -> Vec<(f64, GaitCommand)> {
        self.commands
            .iter()
            .map(|c| {
                (
                    c.t,
                    GaitCommand {
                        vx: c.vx,
                        vy: c.vy,
                        vz: c.vz,
                    },
                )
            })
            .collect()
    }

    pub fn plant_disturbances(&self) -> Vec<Disturbance> {
        self.disturbances
            .iter()
            .map(|d| Disturbance {
                kind: match d.kind {
                    DisturbanceKindSpec::Impulse => DisturbanceKind::Impulse,
                    DisturbanceKindSpec::ConstantForce => DisturbanceKind::ConstantForce,
                    DisturbanceKindSpec::SoftwareBias => DisturbanceKind::SoftwareBias,
                },
                direction: d.direction,
                magnitude: d.magnitude,
                start: d.start,
                duration: d.duration,
            })
            .collect()
    }
}
