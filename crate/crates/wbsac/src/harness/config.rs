//! Experiment configuration: one human-readable TOML file per experiment,
//! with `--override key=value` support and seed-hygiene checks.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::agents::{AgentConfig, AgentKind};

use super::HarnessError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnvId {
    Maze,
    PointMass,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AgentKindId {
    Wbsac,
    Sac,
    WbsacFixed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    /// "wbsac" | "sac" | "wbsac-fixed"
    pub agent: String,
    /// "maze" | "point-mass"
    pub env: String,
    /// Optional plain-text maze layout overriding the builtin medium maze.
    pub maze_file: Option<PathBuf>,
    /// Constant optimistic weight; required for "wbsac-fixed".
    pub fixed_xi_o: Option<f64>,
    /// Overrides whether the optimistic actor is trained (defaults per kind).
    pub train_optimistic: Option<bool>,
    pub total_env_steps: u64,
    pub eval_every: u64,
    pub eval_episodes: u32,
    /// Moving-average window applied to plotted curves, in evaluation points.
    pub ma_window: usize,
    pub train_seeds: Vec<u64>,
    /// Evaluation episodes for train seed `s` derive from `eval_seed_base + s`.
    pub eval_seed_base: u64,
    pub out_dir: PathBuf,
    /// Print one progress line per evaluation point.
    pub verbose: bool,
    pub agent_config: AgentConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            agent: "wbsac".into(),
            env: "maze".into(),
            maze_file: None,
            fixed_xi_o: None,
            train_optimistic: None,
            total_env_steps: 100_000,
            eval_every: 5000,
            eval_episodes: 10,
            ma_window: 40,
            train_seeds: vec![0, 1, 2],
            eval_seed_base: 1000,
            out_dir: PathBuf::from("runs/out"),
            verbose: false,
            agent_config: AgentConfig::default(),
        }
    }
}

impl ExperimentConfig {
    /// Loads a TOML config file and applies `key=value` overrides (dotted
    /// paths address nested tables, e.g. `agent_config.batch_size=128`).
    pub fn load(path: &Path, overrides: &[String]) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text, overrides)
    }

    pub fn from_toml_str(text: &str, overrides: &[String]) -> Result<Self, HarnessError> {
        let table: toml::Table = text
            .parse()
            .map_err(|e| HarnessError::Config(format!("invalid TOML: {e}")))?;
        let mut value = toml::Value::Table(table);
        for entry in overrides {
            apply_override(&mut value, entry)?;
        }
        let cfg: ExperimentConfig = value
            .try_into()
            .map_err(|e| HarnessError::Config(format!("invalid config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn env_id(&self) -> Result<EnvId, HarnessError> {
        match self.env.as_str() {
            "maze" => Ok(EnvId::Maze),
            "point-mass" => Ok(EnvId::PointMass),
            other => Err(HarnessError::UnknownEnv(other.to_string())),
        }
    }

    pub fn agent_kind_id(&self) -> Result<AgentKindId, HarnessError> {
        match self.agent.as_str() {
            "wbsac" => Ok(AgentKindId::Wbsac),
            "sac" => Ok(AgentKindId::Sac),
            "wbsac-fixed" => Ok(AgentKindId::WbsacFixed),
            other => Err(HarnessError::UnknownAgent(other.to_string())),
        }
    }

    /// Resolves the agent kind, honoring the optional training override.
    pub fn agent_kind(&self) -> Result<AgentKind, HarnessError> {
        Ok(match self.agent_kind_id()? {
            AgentKindId::Wbsac => AgentKind::Wbsac,
            AgentKindId::Sac => AgentKind::Sac,
            AgentKindId::WbsacFixed => {
                let xi_o = self.fixed_xi_o.ok_or_else(|| {
                    HarnessError::Config("wbsac-fixed requires fixed_xi_o".into())
                })?;
                AgentKind::WbsacFixed {
                    xi_o,
                    train_optimistic: self.train_optimistic.unwrap_or(true),
                }
            }
        })
    }

    /// Agent hyperparameters with the schedule horizon synced to this
    /// experiment's step budget.
    pub fn resolved_agent_config(&self) -> AgentConfig {
        AgentConfig {
            total_env_steps: self.total_env_steps,
            ..self.agent_config.clone()
        }
    }

    pub fn eval_seed_for(&self, train_seed: u64) -> u64 {
        self.eval_seed_base + train_seed
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        self.env_id()?;
        self.agent_kind()?;
        if let Some(xi) = self.fixed_xi_o {
            if !(0.0..=1.0).contains(&xi) {
                return Err(HarnessError::Config(format!(
                    "fixed_xi_o must lie in [0,1], got {xi}"
                )));
            }
        }
        if self.train_seeds.is_empty() {
            return Err(HarnessError::Config("train_seeds must be non-empty".into()));
        }
        let train: BTreeSet<u64> = self.train_seeds.iter().copied().collect();
        if train.len() != self.train_seeds.len() {
            return Err(HarnessError::Config("duplicate train seeds".into()));
        }
        // Seed hygiene: the derived eval seeds must be disjoint from the
        // train seeds.
        let eval: BTreeSet<u64> = self
            .train_seeds
            .iter()
            .map(|&s| self.eval_seed_for(s))
            .collect();
        if train.intersection(&eval).next().is_some() {
            return Err(HarnessError::Config(format!(
                "train and eval seed sets overlap: train {train:?}, eval {eval:?}"
            )));
        }
        if self.eval_every == 0 {
            return Err(HarnessError::Config("eval_every must be >= 1".into()));
        }
        if self.eval_episodes == 0 {
            return Err(HarnessError::Config("eval_episodes must be >= 1".into()));
        }
        if self.ma_window == 0 {
            return Err(HarnessError::Config("ma_window must be >= 1".into()));
        }
        self.agent_config
            .validate()
            .map_err(|e| HarnessError::Config(e.to_string()))?;
        Ok(())
    }
}

/// Applies one `dotted.path=value` override in place. The value is parsed as
/// TOML when possible, falling back to a plain string.
fn apply_override(root: &mut toml::Value, entry: &str) -> Result<(), HarnessError> {
    let (path, raw) = entry
        .split_once('=')
        .ok_or_else(|| HarnessError::Config(format!("override {entry:?} is not key=value")))?;
    let parsed: toml::Value = match format!("v = {raw}").parse::<toml::Table>() {
        Ok(t) => t["v"].clone(),
        _ => toml::Value::String(raw.to_string()),
    };
    let mut cursor = root;
    let segments: Vec<&str> = path.split('.').collect();
    for (i, seg) in segments.iter().enumerate() {
        let table = cursor
            .as_table_mut()
            .ok_or_else(|| HarnessError::Config(format!("override path {path:?} is invalid")))?;
        if i + 1 == segments.len() {
            table.insert(seg.to_string(), parsed);
            return Ok(());
        }
        cursor = table
            .entry(seg.to_string())
            .or_insert_with(|| toml::Value::Table(Default::default()));
    }
    Ok(())
}
