//! Two-phase avoidance training: navigation first with the safety weight at
//! zero, then the full avoidance weighting. Prints the phase and the greedy
//! evaluation as training proceeds.
//!
//! `cargo run --release --example avoidance_curriculum -- [pretrain] [total]`

use std::sync::Arc;

use atc_stack::airspace::Sector;
use atc_stack::env::ActionSpace;
use atc_stack::ppo::{Curriculum, TrainConfig, Trainer};
use atc_stack::rewards::RewardPreset;
use atc_stack::scenario::ScenarioKind;

fn main() -> atc_stack::Result<()> {
    let args: Vec<u64> = std::env::args().skip(1).map(|a| a.parse().expect("step count")).collect();
    let pretrain = args.first().copied().unwrap_or(100_000);
    let total = args.get(1).copied().unwrap_or(2 * pretrain);
    let mut config = TrainConfig::new(
        ScenarioKind::LateralAvoidance,
        ActionSpace::LateralSmall,
        RewardPreset::LateralNavigationAndAvoidance,
    );
    config.ppo.total_steps = total;
    config.curriculum = Some(Curriculum { pretrain_steps: pretrain });
    config.eval_interval = 10;
    println!("phase 1 weights {:?}", config.phase_weights(1));
    println!("phase 2 weights {:?}", config.phase_weights(2));

    let mut trainer = Trainer::new(Arc::new(Sector::default_sector()), config)?;
    while !trainer.is_finished() {
        let r = trainer.step_update()?;
        if let Some(e) = r.eval {
            println!(
                "phase {} {:>8} steps  reward {:>8.2}  actions {:>6.1}  success {:.2}  safety {:.4}",
                r.phase, r.steps, e.mean_reward, e.mean_actions, e.success_rate, e.mean_safety
            );
        }
    }
    Ok(())
}
