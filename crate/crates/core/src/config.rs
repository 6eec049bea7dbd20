//! Command-line settings and the TOML file that mirrors them.
//!
//! Each subcommand's settings are one struct that is both a clap argument
//! group and a serde table (`[train]`, `[eval]`, `[compare]`). Every field
//! is optional; a value is taken from the command line, then from the two
//! environment overrides (`ATC_STACK_OUTPUT_DIR`, `ATC_STACK_WORKERS`),
//! then from the file, then from the built-in default.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::Args;
use serde::{Deserialize, Serialize};

use crate::airspace::Sector;
use crate::env::ActionSpace;
use crate::error::{Error, Result};
use crate::ppo::{Curriculum, TrainConfig};
use crate::rewards::{RewardPreset, RewardWeights};
use crate::scenario::ScenarioKind;
use crate::stacking::EvalMode;

pub const OUTPUT_DIR_ENV: &str = "ATC_STACK_OUTPUT_DIR";
pub const WORKERS_ENV: &str = "ATC_STACK_WORKERS";

/// Takes `self.field.or(other.field)` for every listed field.
macro_rules! fill_from {
    ($dst:ident, $src:ident; $($f:ident),+ $(,)?) => {
        $( if $dst.$f.is_none() { $dst.$f = $src.$f.clone(); } )+
    };
}

#[derive(Debug, Clone, Default, PartialEq, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainArgs {
    /// Sector file; the bundled sector when absent.
    #[arg(long)]
    pub sector: Option<PathBuf>,
    /// lateral_nav, lateral_avoidance or vertical.
    #[arg(long)]
    pub kind: Option<ScenarioKind>,
    /// lateral_small, lateral_large or vertical; defaults from the kind.
    #[arg(long)]
    pub action_space: Option<ActionSpace>,
    /// Reward preset name, or `custom` together with --weights.
    #[arg(long)]
    pub preset: Option<String>,
    /// Explicit weights, e.g. `centreline=1,damping=0.3,safety=2`.
    #[arg(long)]
    pub weights: Option<String>,
    #[arg(long)]
    pub steps: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, env = WORKERS_ENV)]
    pub workers: Option<usize>,
    /// Pretrain without the safety term before the full weighting.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub curriculum: Option<bool>,
    /// Phase-1 length when the curriculum is on.
    #[arg(long)]
    pub pretrain_steps: Option<u64>,
    #[arg(long, env = OUTPUT_DIR_ENV)]
    pub output_dir: Option<PathBuf>,
    #[arg(long)]
    pub learning_rate: Option<f64>,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub entropy_coeff: Option<f64>,
    #[arg(long)]
    pub clip_epsilon: Option<f64>,
    #[arg(long)]
    pub gae_lambda: Option<f64>,
    #[arg(long)]
    pub rollout_length: Option<usize>,
    #[arg(long)]
    pub minibatch_size: Option<usize>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub value_coeff: Option<f64>,
    #[arg(long)]
    pub max_grad_norm: Option<f64>,
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub separate_critic: Option<bool>,
    /// Greedy evaluation every this many updates; 0 disables it.
    #[arg(long)]
    pub eval_interval: Option<usize>,
    #[arg(long)]
    pub eval_episodes: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalArgs {
    #[arg(long)]
    pub checkpoint: Option<PathBuf>,
    #[arg(long)]
    pub sector: Option<PathBuf>,
    /// Fails unless the checkpoint was trained on this kind.
    #[arg(long)]
    pub kind: Option<ScenarioKind>,
    #[arg(long)]
    pub episodes: Option<usize>,
    /// Episode `i` uses scenario seed `seed + i`.
    #[arg(long)]
    pub seed: Option<u64>,
    /// unstacked, stacked or both.
    #[arg(long)]
    pub mode: Option<ModeChoice>,
    /// Shorthand for `--mode stacked`.
    #[arg(long, default_value_t = false)]
    #[serde(skip)]
    pub stacked: bool,
    /// Write a step trace and macro table per episode.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub trace: Option<bool>,
    /// Write an SVG of routes and tracks per episode.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub render: Option<bool>,
    /// Sample actions with this seed instead of taking the argmax.
    #[arg(long)]
    pub sampled: Option<u64>,
    #[arg(long, env = WORKERS_ENV)]
    pub workers: Option<usize>,
    #[arg(long, env = OUTPUT_DIR_ENV)]
    pub output_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, PartialEq, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CompareArgs {
    #[arg(long)]
    pub a: Option<PathBuf>,
    #[arg(long)]
    pub b: Option<PathBuf>,
    #[arg(long)]
    pub mode_a: Option<EvalMode>,
    #[arg(long)]
    pub mode_b: Option<EvalMode>,
    #[arg(long)]
    pub sector: Option<PathBuf>,
    #[arg(long)]
    pub episodes: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, env = WORKERS_ENV)]
    pub workers: Option<usize>,
    #[arg(long, env = OUTPUT_DIR_ENV)]
    pub output_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum ModeChoice {
    Unstacked,
    Stacked,
    Both,
}

impl ModeChoice {
    pub fn modes(self) -> Vec<EvalMode> {
        match self {
            ModeChoice::Unstacked => vec![EvalMode::Unstacked],
            ModeChoice::Stacked => vec![EvalMode::Stacked],
            ModeChoice::Both => vec![EvalMode::Unstacked, EvalMode::Stacked],
        }
    }
}

/// Contents of a `--config` file.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConfigFile {
    pub train: TrainArgs,
    pub eval: EvalArgs,
    pub compare: CompareArgs,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::parse("config file", e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }
}

impl TrainArgs {
    pub fn fill_from(&mut self, file: &TrainArgs) {
        fill_from!(self, file; sector, kind, action_space, preset, weights, steps, seed, workers,
            curriculum, pretrain_steps, output_dir, learning_rate, gamma, entropy_coeff, clip_epsilon,
            gae_lambda, rollout_length, minibatch_size, epochs, value_coeff, max_grad_norm,
            separate_critic, eval_interval, eval_episodes);
    }

    pub fn output_dir(&self) -> PathBuf {
        self.output_dir.clone().unwrap_or_else(|| PathBuf::from("runs"))
    }

    /// Resolves the settings into a validated training configuration.
    pub fn to_train_config(&self) -> Result<TrainConfig> {
        let kind = self
            .kind
            .ok_or_else(|| Error::Config("--kind is required".into()))?;
        let space = self.action_space.unwrap_or_else(|| ActionSpace::default_for(kind));
        let preset_name = self
            .preset
            .clone()
            .unwrap_or_else(|| if self.weights.is_some() { "custom".into() } else { default_preset(kind).name().into() });
        let mut config = if preset_name == "custom" {
            let text = self
                .weights
                .as_deref()
                .ok_or_else(|| Error::Config("preset custom needs --weights".into()))?;
            let mut c = TrainConfig::new(kind, space, default_preset(kind));
            c.preset = preset_name;
            c.weights = parse_weights(text)?;
            c
        } else {
            let preset: RewardPreset = preset_name.parse()?;
            let mut c = TrainConfig::new(kind, space, preset);
            if let Some(text) = &self.weights {
                c.weights = parse_weights(text)?;
            }
            c
        };
        let p = &mut config.ppo;
        macro_rules! set {
            ($($src:ident => $dst:ident),+ $(,)?) => {
                $( if let Some(v) = self.$src { p.$dst = v; } )+
            };
        }
        set!(steps => total_steps, seed => seed, workers => num_workers, learning_rate => learning_rate,
            gamma => gamma, entropy_coeff => entropy_coeff, clip_epsilon => clip_epsilon,
            gae_lambda => gae_lambda, rollout_length => rollout_length, minibatch_size => minibatch_size,
            epochs => epochs_per_update, value_coeff => value_coeff, max_grad_norm => max_grad_norm,
            separate_critic => separate_critic);
        if let Some(v) = self.eval_interval {
            config.eval_interval = v;
        }
        if let Some(v) = self.eval_episodes {
            config.eval_episodes = v;
        }
        if self.curriculum.unwrap_or(false) || self.pretrain_steps.is_some() {
            config.curriculum = Some(Curriculum {
                pretrain_steps: self.pretrain_steps.unwrap_or(2_000_000).min(config.ppo.total_steps),
            });
        }
        config.validate()?;
        Ok(config)
    }
}

impl EvalArgs {
    pub fn fill_from(&mut self, file: &EvalArgs) {
        fill_from!(self, file; checkpoint, sector, kind, episodes, seed, mode, trace, render, sampled,
            workers, output_dir);
    }

    pub fn modes(&self) -> Vec<EvalMode> {
        if self.stacked {
            return vec![EvalMode::Stacked];
        }
        self.mode.unwrap_or(ModeChoice::Unstacked).modes()
    }

    pub fn output_dir(&self) -> PathBuf {
        self.output_dir.clone().unwrap_or_else(|| PathBuf::from("eval"))
    }
}

impl CompareArgs {
    pub fn fill_from(&mut self, file: &CompareArgs) {
        fill_from!(self, file; a, b, mode_a, mode_b, sector, episodes, seed, workers, output_dir);
    }

    pub fn output_dir(&self) -> PathBuf {
        self.output_dir.clone().unwrap_or_else(|| PathBuf::from("compare"))
    }
}

pub fn default_preset(kind: ScenarioKind) -> RewardPreset {
    match kind {
        ScenarioKind::LateralNav => RewardPreset::LateralNavigation,
        ScenarioKind::LateralAvoidance => RewardPreset::LateralNavigationAndAvoidance,
        ScenarioKind::Vertical => RewardPreset::VerticalNavigation,
    }
}

/// Parses `name=value` pairs separated by commas. Unnamed weights are zero,
/// except `terminal` (1) and `action_criterion` (true).
pub fn parse_weights(text: &str) -> Result<RewardWeights> {
    let mut w = RewardWeights {
        terminal: 1.0,
        ..RewardWeights::zero()
    };
    for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (key, value) = part
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("weight {part:?} is not name=value")))?;
        let bad = |e: &dyn std::fmt::Display| Error::Config(format!("weight {key}: {e}"));
        let num = || value.trim().parse::<f64>().map_err(|e| bad(&e));
        match key.trim() {
            "centreline" => w.centreline = num()?,
            "damping" => w.damping = num()?,
            "safety" => w.safety = num()?,
            "vertical" => w.vertical = num()?,
            "terminal" => w.terminal = num()?,
            "action_criterion" => w.action_criterion = value.trim().parse().map_err(|e| bad(&e))?,
            other => return Err(Error::Config(format!("unknown weight {other:?}"))),
        }
    }
    w.validate()?;
    Ok(w)
}

pub fn load_sector(path: Option<&Path>) -> Result<Arc<Sector>> {
    Ok(Arc::new(match path {
        Some(p) => Sector::from_path(p)?,
        None => Sector::default_sector(),
    }))
}
