use std::sync::Arc;

use atc_stack::airspace::Sector;
use atc_stack::env::{ActionSpace, AtcEnv, EnvConfig};
use atc_stack::ppo::{collect_rollout, log_softmax, PolicyNetwork, RolloutWorker};
use atc_stack::rewards::RewardPreset;
use atc_stack::scenario::ScenarioKind;
use atc_stack::dynamics::Performance;

fn workers(count: usize, seed: u64) -> Vec<RolloutWorker> {
    let sector = Arc::new(Sector::default_sector());
    let env = AtcEnv::new(Arc::clone(&sector), ActionSpace::LateralSmall, EnvConfig::new(RewardPreset::LateralNavigation.weights())).unwrap();
    RolloutWorker::pool(sector, &env, ScenarioKind::LateralNav, Performance::default(), seed, count).unwrap()
}

#[test]
fn logged_logprobs_match_the_collecting_policy() {
    let net = PolicyNetwork::new(8, 64, 5, 4);
    let batch = collect_rollout(&net, &mut workers(3, 1), 900).unwrap();
    assert_eq!(batch.len(), 900);
    for i in 0..batch.len() {
        let (logits, value) = net.forward(batch.observation(i));
        assert_eq!(log_softmax(&logits)[batch.actions[i]].to_bits(), batch.logprobs[i].to_bits());
        assert_eq!(value.to_bits(), batch.values[i].to_bits());
    }
}

#[test]
fn rollouts_are_deterministic_and_reset_between_episodes() {
    let net = PolicyNetwork::new(8, 64, 5, 4);
    let a = collect_rollout(&net, &mut workers(2, 7), 700).unwrap();
    let b = collect_rollout(&net, &mut workers(2, 7), 700).unwrap();
    assert_eq!(a, b);
    // no episode outlives the 300-step limit, so 350 steps per worker finish at least one
    assert!(a.finished.len() >= 2);
    assert!(a.finished.iter().all(|e| e.length <= 300));
    let ends = a.dones.iter().filter(|&&d| d).count();
    assert_eq!(ends, a.finished.len());
}
