//! JSON checkpoint. Floats are written with shortest round-trip formatting
//! and parsed exactly, so save followed by load is bit-identical.
//!
//! Layout (top-level keys): `format_version`, `kind`, `action_space`,
//! `preset`, `steps`, `config` (the full training configuration),
//! `network` (`input`, `hidden`, `actions`, flat `params`), `optimizer`
//! (Adam moments and step count), `rng` (the update shuffler state).
//!
//! `network.params` is laid out as `W1, b1, W2, b2, Wπ, bπ, Wv, bv` with each
//! weight matrix stored input-major.

use std::path::Path;

use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::adam::Adam;
use super::network::PolicyNetwork;
use super::train::TrainConfig;
use crate::env::{observation_len, ActionSpace};
use crate::error::{Error, Result};
use crate::scenario::ScenarioKind;

pub const CHECKPOINT_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyCheckpoint {
    pub format_version: u32,
    pub kind: ScenarioKind,
    pub action_space: ActionSpace,
    pub preset: String,
    pub steps: u64,
    pub config: TrainConfig,
    pub network: PolicyNetwork,
    pub optimizer: Adam,
    pub rng: ChaCha8Rng,
}

impl PolicyCheckpoint {
    pub fn new(config: TrainConfig, network: PolicyNetwork, optimizer: Adam, rng: ChaCha8Rng, steps: u64) -> Self {
        Self {
            format_version: CHECKPOINT_FORMAT_VERSION,
            kind: config.kind,
            action_space: config.action_space,
            preset: config.preset.clone(),
            steps,
            config,
            network,
            optimizer,
            rng,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("checkpoint serialises")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let c: PolicyCheckpoint = serde_json::from_str(text).map_err(|e| Error::parse("checkpoint", e))?;
        c.check()?;
        Ok(c)
    }

    fn check(&self) -> Result<()> {
        if self.format_version != CHECKPOINT_FORMAT_VERSION {
            return Err(Error::parse(
                "checkpoint",
                format!("unsupported format_version {}", self.format_version),
            ));
        }
        let n = &self.network;
        if n.input_len() != observation_len(self.kind) || n.actions() != self.action_space.size() {
            return Err(Error::parse(
                "checkpoint",
                format!(
                    "network shape {}→{} does not fit {} with {}",
                    n.input_len(),
                    n.actions(),
                    self.kind,
                    self.action_space
                ),
            ));
        }
        let expected = n.expected_param_count();
        if n.param_count() != expected {
            return Err(Error::parse(
                "checkpoint",
                format!("expected {expected} parameters, found {}", n.param_count()),
            ));
        }
        Ok(())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;

    use super::*;
    use crate::rewards::RewardPreset;

    #[test]
    fn json_round_trip_is_exact() {
        let cfg = TrainConfig::new(ScenarioKind::LateralNav, ActionSpace::LateralSmall, RewardPreset::LateralNavigation);
        let net = PolicyNetwork::new(8, 64, 5, 17);
        let mut opt = Adam::new(net.param_count(), 1e-4);
        let mut p = net.params().to_vec();
        let g = vec![0.123456789; p.len()];
        opt.step(&mut p, &g);
        let ck = PolicyCheckpoint::new(cfg, net, opt, ChaCha8Rng::seed_from_u64(3), 42);
        let back = PolicyCheckpoint::from_json(&ck.to_json()).unwrap();
        assert_eq!(back, ck);
        for (a, b) in back.network.params().iter().zip(ck.network.params()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn shape_mismatch_is_rejected() {
        let cfg = TrainConfig::new(ScenarioKind::Vertical, ActionSpace::Vertical, RewardPreset::VerticalNavigation);
        let net = PolicyNetwork::new(8, 16, 5, 0);
        let opt = Adam::new(net.param_count(), 1e-4);
        let ck = PolicyCheckpoint::new(cfg, net, opt, ChaCha8Rng::seed_from_u64(0), 0);
        assert!(PolicyCheckpoint::from_json(&ck.to_json()).is_err());
    }
}
