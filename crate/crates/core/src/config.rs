//! Run configuration in a line-oriented `section.key = value` format.
//!
//! ```text
//! # comment
//! env.n_pedestrians = 10
//! reward.group_term_enabled = false
//! ```
//!
//! Every key must already exist in the defaults; values are type-checked
//! against the default's type and the whole configuration is validated after
//! parsing.

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::env::{EpisodeConfig, RewardConfig};
use crate::error::{Error, Result};
use crate::eval::EvalConfig;
use crate::ppo::{PpoConfig, TrainConfig};
use crate::social_force::SfmParams;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputConfig {
    pub dir: String,
    /// Write a trajectory log per evaluation trial.
    pub trajectories: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { dir: "runs/default".into(), trajectories: true }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct RunConfig {
    pub env: EpisodeConfig,
    pub reward: RewardConfig,
    pub sfm: SfmParams,
    pub ppo: PpoConfig,
    pub eval: EvalConfig,
    pub output: OutputConfig,
}

const SECTIONS: [&str; 6] = ["env", "reward", "sfm", "ppo", "eval", "output"];

/// Keys whose defaults are implementation choices rather than published values.
const DERIVED: [&str; 14] = [
    "env.dt",
    "env.robot_radius",
    "env.ped_radius",
    "env.seed",
    "sfm.*",
    "ppo.grad_clip_norm",
    "ppo.anneal_lr",
    "ppo.checkpoint_every",
    "ppo.parallel",
    "ppo.seed",
    "eval.intersection_counting",
    "eval.discomfort",
    "eval.parallel",
    "output.*",
];

fn is_derived(section: &str, key: &str) -> bool {
    DERIVED.iter().any(|d| {
        let (s, k) = d.split_once('.').unwrap();
        s == section && (k == "*" || k == key)
    })
}

impl RunConfig {
    pub fn train_config(&self) -> TrainConfig {
        TrainConfig {
            env: self.env.clone(),
            reward: self.reward.clone(),
            sfm: self.sfm.clone(),
            ppo: self.ppo.clone(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.train_config().validate()?;
        if self.eval.trials == 0 {
            return Err(Error::InvalidArgument("eval.trials must be >= 1".into()));
        }
        Ok(())
    }

    /// Parses a configuration file body on top of the defaults.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        cfg.apply_lines(text)?;
        Ok(cfg)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    fn apply_lines(&mut self, text: &str) -> Result<()> {
        let mut tree = serde_json::to_value(&*self)?;
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Config {
                line: i + 1,
                message: format!("expected `section.key = value`, got `{line}`"),
            })?;
            let line = i + 1;
            set_key(&mut tree, key.trim(), value.trim()).map_err(|message| Error::Config { line, message })?;
            // Catches values of the right JSON type but outside an enum's variants.
            *self = serde_json::from_value(tree.clone())
                .map_err(|e| Error::Config { line, message: format!("`{}`: {e}", key.trim()) })?;
        }
        self.validate()
    }

    /// Applies one `section.key=value` override.
    pub fn apply_override(&mut self, spec: &str) -> Result<()> {
        let (key, value) = spec
            .split_once('=')
            .ok_or_else(|| Error::InvalidArgument(format!("override `{spec}` is not of the form section.key=value")))?;
        let mut tree = serde_json::to_value(&*self)?;
        set_key(&mut tree, key.trim(), value.trim())
            .map_err(|m| Error::InvalidArgument(format!("override `{spec}`: {m}")))?;
        *self = serde_json::from_value(tree)
            .map_err(|e| Error::InvalidArgument(format!("override `{spec}`: {e}")))?;
        self.validate()
    }

    /// Every key with its resolved value; paper-silent defaults are annotated.
    pub fn to_text(&self) -> String {
        let tree = serde_json::to_value(self).expect("config serializes");
        let mut out = String::new();
        for section in SECTIONS {
            let Some(Value::Object(map)) = tree.get(section) else { continue };
            for (key, value) in map {
                let v = match value {
                    Value::String(s) => s.clone(),
                    Value::Number(n) => match n.as_f64() {
                        Some(f) if !n.is_u64() && !n.is_i64() => format!("{f:?}"),
                        _ => n.to_string(),
                    },
                    other => other.to_string(),
                };
                out += &format!("{section}.{key} = {v}");
                if is_derived(section, key) {
                    out += "  # derived default";
                }
                out.push('\n');
            }
        }
        out
    }
}

fn set_key(tree: &mut Value, dotted: &str, raw: &str) -> std::result::Result<(), String> {
    let (section, key) = dotted.split_once('.').ok_or_else(|| format!("key `{dotted}` has no section"))?;
    let map: &mut Map<String, Value> = tree
        .get_mut(section)
        .and_then(Value::as_object_mut)
        .ok_or_else(|| format!("unknown section `{section}` (expected one of {})", SECTIONS.join(", ")))?;
    let slot = map.get_mut(key).ok_or_else(|| format!("unknown key `{section}.{key}`"))?;
    *slot = match slot {
        Value::Bool(_) => Value::Bool(raw.parse().map_err(|_| format!("`{dotted}` expects true or false, got `{raw}`"))?),
        Value::Number(n) if n.is_u64() => {
            Value::from(raw.parse::<u64>().map_err(|_| format!("`{dotted}` expects a non-negative integer, got `{raw}`"))?)
        }
        Value::Number(_) => {
            let v: f64 = raw.parse().map_err(|_| format!("`{dotted}` expects a number, got `{raw}`"))?;
            if !v.is_finite() {
                return Err(format!("`{dotted}` must be finite"));
            }
            Value::from(v)
        }
        Value::String(_) => Value::String(raw.trim_matches('"').to_string()),
        _ => return Err(format!("`{dotted}` cannot be set from text")),
    };
    Ok(())
}
