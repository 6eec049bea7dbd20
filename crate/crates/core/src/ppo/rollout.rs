//! Trajectory collection and advantage estimation.

use std::sync::Arc;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::network::{log_softmax, sample_categorical, PolicyNetwork};
use crate::airspace::Sector;
use crate::dynamics::Performance;
use crate::env::{AtcEnv, Observation};
use crate::error::Result;
use crate::rewards::TerminalSummary;
use crate::scenario::{generate, ScenarioKind};

/// Statistics of one finished training episode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeSummary {
    pub scenario_seed: u64,
    pub total_reward: f64,
    pub length: usize,
    pub actions: u32,
    pub terminal: TerminalSummary,
    /// Every criterion scored by the active weights holds.
    pub success: bool,
    /// Mean safety component per step.
    pub mean_safety: f64,
    pub min_separation_nm: Option<f64>,
}

/// One environment plus its private random streams. Scenario seeds for
/// successive episodes come from `scenario_rng`; sampled actions come from
/// `action_rng`. Both are keyed on the worker index so results do not depend
/// on how workers are scheduled onto threads.
#[derive(Debug, Clone)]
pub struct RolloutWorker {
    env: AtcEnv,
    kind: ScenarioKind,
    performance: Performance,
    scenario_rng: ChaCha8Rng,
    action_rng: ChaCha8Rng,
    observation: Observation,
    scenario_seed: u64,
    episode_reward: f64,
    episode_len: usize,
    episode_safety: f64,
}

impl RolloutWorker {
    pub fn new(env: AtcEnv, kind: ScenarioKind, performance: Performance, seed: u64, index: usize) -> Result<Self> {
        let mut scenario_rng = ChaCha8Rng::seed_from_u64(seed);
        scenario_rng.set_stream(2 * index as u64);
        let mut action_rng = ChaCha8Rng::seed_from_u64(seed);
        action_rng.set_stream(2 * index as u64 + 1);
        let mut w = Self {
            env,
            kind,
            performance,
            scenario_rng,
            action_rng,
            observation: Observation::default(),
            scenario_seed: 0,
            episode_reward: 0.0,
            episode_len: 0,
            episode_safety: 0.0,
        };
        w.start_episode()?;
        Ok(w)
    }

    /// Builds `count` workers sharing one sector.
    pub fn pool(
        sector: Arc<Sector>,
        template: &AtcEnv,
        kind: ScenarioKind,
        performance: Performance,
        seed: u64,
        count: usize,
    ) -> Result<Vec<RolloutWorker>> {
        (0..count)
            .map(|i| {
                let env = AtcEnv::new(Arc::clone(&sector), template.action_space(), *template.config())?;
                RolloutWorker::new(env, kind, performance, seed, i)
            })
            .collect()
    }

    fn start_episode(&mut self) -> Result<()> {
        self.scenario_seed = self.scenario_rng.next_u64();
        let sc = generate(self.env.sector(), self.scenario_seed, self.kind, self.performance)?;
        self.observation = self.env.reset(&sc)?;
        self.episode_reward = 0.0;
        self.episode_len = 0;
        self.episode_safety = 0.0;
        Ok(())
    }

    pub fn env(&self) -> &AtcEnv {
        &self.env
    }

    pub fn env_mut(&mut self) -> &mut AtcEnv {
        &mut self.env
    }

    fn collect(&mut self, policy: &PolicyNetwork, steps: usize) -> Result<TrajectoryBatch> {
        let obs_dim = policy.input_len();
        let mut batch = TrajectoryBatch::with_capacity(obs_dim, steps);
        let mut cache = policy.new_cache();
        for _ in 0..steps {
            policy.forward_into(&self.observation, &mut cache);
            let logp = log_softmax(&cache.logits);
            let probs: Vec<f64> = logp.iter().map(|l| l.exp()).collect();
            let action = sample_categorical(&probs, &mut self.action_rng);
            let result = self.env.step(action)?;

            batch.observations.extend_from_slice(&self.observation);
            batch.actions.push(action);
            batch.logprobs.push(logp[action]);
            batch.values.push(cache.value);
            batch.rewards.push(result.reward);
            batch.dones.push(result.done);

            self.episode_reward += result.reward;
            self.episode_len += 1;
            self.episode_safety += result.info.components.safety;
            if result.done {
                let ep = self.env.episode().expect("episode exists");
                let terminal = result.info.terminal.expect("final step carries terminal summary");
                batch.finished.push(EpisodeSummary {
                    scenario_seed: self.scenario_seed,
                    total_reward: self.episode_reward,
                    length: self.episode_len,
                    actions: result.info.action_counts.iter().sum(),
                    terminal,
                    success: terminal.succeeded(self.env.config().weights.action_criterion),
                    mean_safety: self.episode_safety / self.episode_len as f64,
                    min_separation_nm: ep.min_separation_nm,
                });
                self.start_episode()?;
            } else {
                self.observation = result.observation;
            }
        }
        let bootstrap = if batch.dones.last().copied().unwrap_or(true) {
            0.0
        } else {
            policy.forward(&self.observation).1
        };
        batch.segments.push(Segment {
            start: 0,
            len: steps,
            bootstrap_value: bootstrap,
        });
        Ok(batch)
    }
}

/// Segment covering `len` steps from `start`, for hand-built batches.
pub fn rollout_segment(start: usize, len: usize, bootstrap_value: f64) -> Segment {
    Segment {
        start,
        len,
        bootstrap_value,
    }
}

/// A contiguous run of steps from one worker.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub start: usize,
    pub len: usize,
    /// Value estimate of the state following the segment, 0 if it ended an episode.
    pub bootstrap_value: f64,
}

/// Flat storage of `(S, A, log π(A|S), V(S), R, done)` tuples.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TrajectoryBatch {
    pub obs_dim: usize,
    pub observations: Vec<f64>,
    pub actions: Vec<usize>,
    pub logprobs: Vec<f64>,
    pub values: Vec<f64>,
    pub rewards: Vec<f64>,
    pub dones: Vec<bool>,
    pub segments: Vec<Segment>,
    pub finished: Vec<EpisodeSummary>,
}

impl TrajectoryBatch {
    pub fn with_capacity(obs_dim: usize, steps: usize) -> Self {
        Self {
            obs_dim,
            observations: Vec::with_capacity(obs_dim * steps),
            actions: Vec::with_capacity(steps),
            logprobs: Vec::with_capacity(steps),
            values: Vec::with_capacity(steps),
            rewards: Vec::with_capacity(steps),
            dones: Vec::with_capacity(steps),
            segments: Vec::new(),
            finished: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    pub fn observation(&self, i: usize) -> &[f64] {
        &self.observations[i * self.obs_dim..(i + 1) * self.obs_dim]
    }

    fn append(&mut self, mut other: TrajectoryBatch) {
        let offset = self.len();
        self.observations.append(&mut other.observations);
        self.actions.append(&mut other.actions);
        self.logprobs.append(&mut other.logprobs);
        self.values.append(&mut other.values);
        self.rewards.append(&mut other.rewards);
        self.dones.append(&mut other.dones);
        self.segments
            .extend(other.segments.into_iter().map(|s| Segment { start: s.start + offset, ..s }));
        self.finished.append(&mut other.finished);
    }
}

/// Gathers `length` steps in total, split as evenly as possible across
/// `workers` (earlier workers take the remainder). Workers run in parallel;
/// their outputs are concatenated in worker order.
pub fn collect_rollout(policy: &PolicyNetwork, workers: &mut [RolloutWorker], length: usize) -> Result<TrajectoryBatch> {
    let n = workers.len().max(1);
    let parts: Vec<Result<TrajectoryBatch>> = workers
        .par_iter_mut()
        .enumerate()
        .map(|(i, w)| {
            let steps = length / n + usize::from(i < length % n);
            w.collect(policy, steps)
        })
        .collect();
    let mut batch = TrajectoryBatch::with_capacity(policy.input_len(), length);
    for p in parts {
        batch.append(p?);
    }
    Ok(batch)
}

/// Generalised advantage estimates and value targets. No bootstrapping
/// crosses a step flagged `done`. Advantages are returned raw; the update
/// normalises them.
pub fn compute_gae(batch: &TrajectoryBatch, gamma: f64, lambda: f64) -> (Vec<f64>, Vec<f64>) {
    let n = batch.len();
    let mut advantages = vec![0.0; n];
    for seg in &batch.segments {
        let mut gae = 0.0;
        let mut next_value = seg.bootstrap_value;
        for t in (seg.start..seg.start + seg.len).rev() {
            let not_done = if batch.dones[t] { 0.0 } else { 1.0 };
            let delta = batch.rewards[t] + gamma * next_value * not_done - batch.values[t];
            gae = delta + gamma * lambda * not_done * gae;
            advantages[t] = gae;
            next_value = batch.values[t];
        }
    }
    let returns = advantages.iter().zip(&batch.values).map(|(a, v)| a + v).collect();
    (advantages, returns)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hand_batch(rewards: &[f64], values: &[f64], dones: &[bool], bootstrap: f64) -> TrajectoryBatch {
        TrajectoryBatch {
            obs_dim: 1,
            observations: vec![0.0; rewards.len()],
            actions: vec![0; rewards.len()],
            logprobs: vec![0.0; rewards.len()],
            values: values.to_vec(),
            rewards: rewards.to_vec(),
            dones: dones.to_vec(),
            segments: vec![Segment {
                start: 0,
                len: rewards.len(),
                bootstrap_value: bootstrap,
            }],
            finished: vec![],
        }
    }

    #[test]
    fn gamma_zero_is_one_step_td() {
        let b = hand_batch(&[1.0, -2.0, 0.5], &[0.3, 0.1, -0.4], &[false, false, false], 9.0);
        let (adv, ret) = compute_gae(&b, 0.0, 0.95);
        assert_eq!(adv, vec![1.0 - 0.3, -2.0 - 0.1, 0.5 + 0.4]);
        assert_eq!(ret, vec![1.0, -2.0, 0.5]);
    }

    #[test]
    fn hand_trace_with_discounting() {
        // gamma 0.5, lambda 1 reduces to discounted return minus value
        let b = hand_batch(&[1.0, 1.0, 1.0], &[0.0, 0.0, 0.0], &[false, false, false], 4.0);
        let (adv, _) = compute_gae(&b, 0.5, 1.0);
        assert_eq!(adv, vec![1.0 + 0.5 + 0.25 + 0.125 * 4.0, 1.0 + 0.5 + 0.25 * 4.0, 1.0 + 0.5 * 4.0]);
    }

    #[test]
    fn perfect_values_give_zero_advantage() {
        let gamma: f64 = 0.9;
        let r = 2.0;
        let v = r / (1.0 - gamma);
        let b = hand_batch(&[r; 5], &[v; 5], &[false; 5], v);
        let (adv, _) = compute_gae(&b, gamma, 0.95);
        assert!(adv.iter().all(|a| a.abs() < 1e-9), "{adv:?}");
    }

    #[test]
    fn done_blocks_bootstrap() {
        let b = hand_batch(&[0.0, 1.0, 0.0], &[0.0, 0.0, 5.0], &[false, true, false], 0.0);
        let (adv, _) = compute_gae(&b, 1.0, 1.0);
        // step 1 ends an episode, so its advantage ignores V(s2) = 5
        assert_eq!(adv[1], 1.0);
        assert_eq!(adv[0], 1.0);
        assert_eq!(adv[2], -5.0);
    }
}
