//! The collect/update loop, the optional two-phase curriculum and periodic
//! greedy evaluation.

use std::io::Write;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::adam::Adam;
use super::checkpoint::PolicyCheckpoint;
use super::network::PolicyNetwork;
use super::rollout::{collect_rollout, compute_gae, RolloutWorker};
use super::update::{ppo_update, UpdateMetrics};
use super::PPOConfig;
use crate::airspace::Sector;
use crate::dynamics::Performance;
use crate::env::{observation_len, ActionSpace, AtcEnv, EnvConfig, ObservationConfig};
use crate::error::{Error, Result};
use crate::rewards::{RewardConfig, RewardPreset, RewardWeights};
use crate::safety::ProjectionHeading;
use crate::scenario::{generate, ScenarioKind};
use crate::stacking::{run_unstacked_episode, Greedy};

/// Pretraining without the safety term, then the full weighting.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Curriculum {
    /// Steps of phase 1; the remaining `total_steps` form phase 2.
    pub pretrain_steps: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub kind: ScenarioKind,
    pub action_space: ActionSpace,
    /// A preset name, or `custom` when `weights` were given explicitly.
    pub preset: String,
    pub weights: RewardWeights,
    #[serde(default)]
    pub rewards: RewardConfig,
    #[serde(default)]
    pub observation: ObservationConfig,
    #[serde(default)]
    pub projection: ProjectionHeading,
    #[serde(default)]
    pub performance: Performance,
    #[serde(default)]
    pub ppo: PPOConfig,
    #[serde(default)]
    pub curriculum: Option<Curriculum>,
    /// Greedy evaluation every this many updates; 0 disables it.
    #[serde(default = "default_eval_interval")]
    pub eval_interval: usize,
    #[serde(default = "default_eval_episodes")]
    pub eval_episodes: usize,
    /// Evaluation scenarios use seeds `eval_seed + i`.
    #[serde(default = "default_eval_seed")]
    pub eval_seed: u64,
}

fn default_eval_interval() -> usize {
    50
}

fn default_eval_episodes() -> usize {
    20
}

fn default_eval_seed() -> u64 {
    1_000_000
}

impl TrainConfig {
    pub fn new(kind: ScenarioKind, action_space: ActionSpace, preset: RewardPreset) -> Self {
        Self {
            kind,
            action_space,
            preset: preset.name().to_string(),
            weights: preset.weights(),
            rewards: RewardConfig::default(),
            observation: ObservationConfig::default(),
            projection: ProjectionHeading::default(),
            performance: Performance::default(),
            ppo: PPOConfig::default(),
            curriculum: None,
            eval_interval: default_eval_interval(),
            eval_episodes: default_eval_episodes(),
            eval_seed: default_eval_seed(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.ppo.validate()?;
        self.rewards.validate()?;
        self.weights.validate()?;
        self.performance.validate()?;
        if !self.action_space.supports(self.kind) {
            return Err(Error::KindMismatch {
                scenario: self.kind.name(),
                space: self.action_space.name(),
            });
        }
        if self.preset != "custom" {
            let p: RewardPreset = self.preset.parse()?;
            if p.weights() != self.weights {
                return Err(Error::Config(format!(
                    "weights differ from preset {}; name the preset \"custom\"",
                    self.preset
                )));
            }
        }
        if let Some(c) = self.curriculum {
            if c.pretrain_steps > self.ppo.total_steps {
                return Err(Error::Config("curriculum pretrain_steps exceeds total_steps".into()));
            }
        }
        Ok(())
    }

    pub fn env_config(&self, weights: RewardWeights) -> EnvConfig {
        EnvConfig {
            rewards: self.rewards,
            weights,
            observation: self.observation,
            projection: self.projection,
        }
    }

    /// Weights active in `phase` (1 or 2).
    pub fn phase_weights(&self, phase: u8) -> RewardWeights {
        match (self.curriculum, phase) {
            (Some(_), 1) => RewardWeights {
                safety: 0.0,
                ..self.weights
            },
            _ => self.weights,
        }
    }

    pub fn phase_at(&self, steps: u64) -> u8 {
        match self.curriculum {
            Some(c) if steps < c.pretrain_steps => 1,
            Some(_) => 2,
            None => 1,
        }
    }
}

/// Greedy evaluation over the fixed evaluation seeds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalSnapshot {
    pub mean_reward: f64,
    pub mean_actions: f64,
    pub success_rate: f64,
    pub mean_safety: f64,
}

/// One line of the training log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UpdateRecord {
    pub update: usize,
    pub steps: u64,
    pub phase: u8,
    #[serde(flatten)]
    pub metrics: UpdateMetrics,
    pub episodes: usize,
    /// Means over training episodes that finished during this rollout.
    pub mean_episode_reward: Option<f64>,
    pub mean_episode_actions: Option<f64>,
    pub success_rate: Option<f64>,
    pub mean_safety: Option<f64>,
    pub eval: Option<EvalSnapshot>,
}

pub struct Trainer {
    config: TrainConfig,
    sector: Arc<Sector>,
    network: PolicyNetwork,
    optimizer: Adam,
    rng: ChaCha8Rng,
    workers: Vec<RolloutWorker>,
    steps: u64,
    updates: usize,
    phase: u8,
}

impl Trainer {
    pub fn new(sector: Arc<Sector>, config: TrainConfig) -> Result<Self> {
        config.validate()?;
        let network = PolicyNetwork::with_critic(
            observation_len(config.kind),
            config.ppo.hidden,
            config.action_space.size(),
            config.ppo.separate_critic,
            config.ppo.seed,
        );
        let optimizer = Adam::new(network.param_count(), config.ppo.learning_rate);
        let mut rng = ChaCha8Rng::seed_from_u64(config.ppo.seed);
        rng.set_stream(u64::MAX);
        Self::assemble(sector, config, network, optimizer, rng, 0)
    }

    /// Continues from a checkpoint. Rollout workers restart with fresh
    /// episodes drawn from streams offset by the completed step count.
    pub fn resume(sector: Arc<Sector>, checkpoint: PolicyCheckpoint) -> Result<Self> {
        checkpoint.config.validate()?;
        Self::assemble(
            sector,
            checkpoint.config,
            checkpoint.network,
            checkpoint.optimizer,
            checkpoint.rng,
            checkpoint.steps,
        )
    }

    fn assemble(
        sector: Arc<Sector>,
        config: TrainConfig,
        network: PolicyNetwork,
        optimizer: Adam,
        rng: ChaCha8Rng,
        steps: u64,
    ) -> Result<Self> {
        let phase = config.phase_at(steps);
        let template = AtcEnv::new(Arc::clone(&sector), config.action_space, config.env_config(config.phase_weights(phase)))?;
        let workers = RolloutWorker::pool(
            Arc::clone(&sector),
            &template,
            config.kind,
            config.performance,
            config.ppo.seed.wrapping_add(steps),
            config.ppo.num_workers,
        )?;
        Ok(Self {
            config,
            sector,
            network,
            optimizer,
            rng,
            workers,
            steps,
            updates: 0,
            phase,
        })
    }

    pub fn config(&self) -> &TrainConfig {
        &self.config
    }

    pub fn network(&self) -> &PolicyNetwork {
        &self.network
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn is_finished(&self) -> bool {
        self.steps >= self.config.ppo.total_steps
    }

    /// One collect/update cycle. The last rollout is shortened so the step
    /// count lands exactly on `total_steps`, and the first rollout of phase 2
    /// starts exactly at the curriculum boundary.
    pub fn step_update(&mut self) -> Result<UpdateRecord> {
        let phase = self.config.phase_at(self.steps);
        if phase != self.phase {
            let w = self.config.phase_weights(phase);
            for worker in &mut self.workers {
                worker.env_mut().set_weights(w)?;
            }
            self.phase = phase;
        }
        let mut limit = self.config.ppo.total_steps;
        if let Some(c) = self.config.curriculum {
            if phase == 1 {
                limit = c.pretrain_steps;
            }
        }
        let length = (self.config.ppo.rollout_length as u64).min(limit - self.steps) as usize;
        let batch = collect_rollout(&self.network, &mut self.workers, length)?;
        let (adv, returns) = compute_gae(&batch, self.config.ppo.gamma, self.config.ppo.gae_lambda);
        let metrics = ppo_update(
            &mut self.network,
            &mut self.optimizer,
            &batch,
            &adv,
            &returns,
            &self.config.ppo,
            &mut self.rng,
        )?;
        self.steps += length as u64;
        self.updates += 1;

        let eps = &batch.finished;
        let mean = |f: &dyn Fn(&super::EpisodeSummary) -> f64| {
            (!eps.is_empty()).then(|| eps.iter().map(f).sum::<f64>() / eps.len() as f64)
        };
        let eval = (self.config.eval_interval > 0
            && (self.updates % self.config.eval_interval == 0 || self.is_finished()))
        .then(|| self.evaluate())
        .transpose()?;
        Ok(UpdateRecord {
            update: self.updates,
            steps: self.steps,
            phase,
            metrics,
            episodes: eps.len(),
            mean_episode_reward: mean(&|e| e.total_reward),
            mean_episode_actions: mean(&|e| f64::from(e.actions)),
            success_rate: mean(&|e| if e.success { 1.0 } else { 0.0 }),
            mean_safety: mean(&|e| e.mean_safety),
            eval,
        })
    }

    /// Greedy unstacked episodes on the evaluation seeds, scored with the
    /// weights of the current phase.
    pub fn evaluate(&self) -> Result<EvalSnapshot> {
        let cfg = self.config.env_config(self.config.phase_weights(self.phase));
        let mut env = AtcEnv::new(Arc::clone(&self.sector), self.config.action_space, cfg)?;
        let n = self.config.eval_episodes.max(1);
        let mut snap = EvalSnapshot {
            mean_reward: 0.0,
            mean_actions: 0.0,
            success_rate: 0.0,
            mean_safety: 0.0,
        };
        for i in 0..n {
            let sc = generate(&self.sector, self.config.eval_seed + i as u64, self.config.kind, self.config.performance)?;
            let rec = run_unstacked_episode(&mut Greedy(&self.network), &mut env, &sc)?;
            snap.mean_reward += rec.total_reward / n as f64;
            snap.mean_actions += f64::from(rec.instructions) / n as f64;
            snap.success_rate += if rec.success { 1.0 } else { 0.0 } / n as f64;
            let safety: f64 = rec.steps.iter().map(|s| s.components.safety).sum();
            snap.mean_safety += safety / rec.steps.len() as f64 / n as f64;
        }
        Ok(snap)
    }

    pub fn checkpoint(&self) -> PolicyCheckpoint {
        PolicyCheckpoint::new(
            self.config.clone(),
            self.network.clone(),
            self.optimizer.clone(),
            self.rng.clone(),
            self.steps,
        )
    }
}

pub struct TrainOutcome {
    pub checkpoint: PolicyCheckpoint,
    pub records: Vec<UpdateRecord>,
}

/// Trains to `total_steps`, writing one JSON line per update to `log` when
/// given. `total_steps = 0` returns the initial network untouched.
pub fn train(sector: Arc<Sector>, config: TrainConfig, mut log: Option<&mut dyn Write>) -> Result<TrainOutcome> {
    let mut trainer = Trainer::new(sector, config)?;
    let mut records = Vec::new();
    while !trainer.is_finished() {
        let rec = trainer.step_update()?;
        if let Some(w) = log.as_deref_mut() {
            let line = serde_json::to_string(&rec).map_err(|e| Error::parse("training log", e))?;
            writeln!(w, "{line}").map_err(|e| Error::io("training log", e))?;
        }
        records.push(rec);
    }
    Ok(TrainOutcome {
        checkpoint: trainer.checkpoint(),
        records,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(kind: ScenarioKind, space: ActionSpace, preset: RewardPreset) -> TrainConfig {
        let mut c = TrainConfig::new(kind, space, preset);
        c.ppo.rollout_length = 128;
        c.ppo.minibatch_size = 32;
        c.ppo.epochs_per_update = 2;
        c.ppo.num_workers = 2;
        c.ppo.hidden = 16;
        c.eval_interval = 0;
        c
    }

    #[test]
    fn zero_steps_returns_initial_network() {
        let sector = Arc::new(Sector::default_sector());
        let mut c = small(ScenarioKind::LateralNav, ActionSpace::LateralSmall, RewardPreset::LateralNavigation);
        c.ppo.total_steps = 0;
        let out = train(Arc::clone(&sector), c.clone(), None).unwrap();
        assert!(out.records.is_empty());
        let fresh = PolicyNetwork::new(8, 16, 5, c.ppo.seed);
        assert_eq!(out.checkpoint.network, fresh);
        assert_eq!(out.checkpoint.steps, 0);
    }

    #[test]
    fn curriculum_switches_weights_once() {
        let sector = Arc::new(Sector::default_sector());
        let mut c = small(
            ScenarioKind::LateralAvoidance,
            ActionSpace::LateralSmall,
            RewardPreset::LateralNavigationAndAvoidance,
        );
        c.ppo.total_steps = 512;
        c.curriculum = Some(Curriculum { pretrain_steps: 200 });
        assert_eq!(c.phase_weights(1).safety, 0.0);
        assert_eq!(c.phase_weights(2).safety, 2.0);
        let out = train(sector, c, None).unwrap();
        let phases: Vec<(u8, u64)> = out.records.iter().map(|r| (r.phase, r.steps)).collect();
        assert_eq!(phases, vec![(1, 128), (1, 200), (2, 328), (2, 456), (2, 512)]);
    }

    #[test]
    fn training_is_deterministic() {
        let sector = Arc::new(Sector::default_sector());
        let mut c = small(ScenarioKind::Vertical, ActionSpace::Vertical, RewardPreset::VerticalNavigation);
        c.ppo.total_steps = 256;
        let a = train(Arc::clone(&sector), c.clone(), None).unwrap();
        let b = train(sector, c, None).unwrap();
        assert_eq!(a.checkpoint.network, b.checkpoint.network);
        assert_eq!(a.records, b.records);
    }
}
