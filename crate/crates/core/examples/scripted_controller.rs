//! A hand-written heading-tracking controller flown unstacked and stacked on
//! the same seeds. Shows that the environment is solvable without learning
//! and how stacking compresses a burst of primitives into one clearance.

use std::sync::Arc;

use atc_stack::airspace::Sector;
use atc_stack::dynamics::Performance;
use atc_stack::env::{ActionSpace, AtcEnv, EnvConfig};
use atc_stack::rewards::RewardPreset;
use atc_stack::scenario::{generate, ScenarioKind};
use atc_stack::stacking::{run_mode, EvalMode, FnSelector};

/// Turns whichever aircraft is furthest off its next-fix bearing by 10°
/// toward it, once that error exceeds 10°.
fn track_next_fix(obs: &[f64]) -> usize {
    let mut best = (0, 10.0);
    for ac in 0..2 {
        let theta = obs[4 * ac] * 360.0 - 180.0;
        if theta.abs() > best.1 {
            best = (if theta > 0.0 { 2 + 2 * ac } else { 1 + 2 * ac }, theta.abs());
        }
    }
    best.0
}

fn main() -> atc_stack::Result<()> {
    let sector = Arc::new(Sector::default_sector());
    let config = EnvConfig::new(RewardPreset::LateralNavigation.weights());
    let mut env = AtcEnv::new(Arc::clone(&sector), ActionSpace::LateralSmall, config)?;
    for mode in [EvalMode::Unstacked, EvalMode::Stacked] {
        let (mut instructions, mut success, mut reward) = (0u32, 0u32, 0.0);
        let n = 100;
        for seed in 0..n {
            let sc = generate(&sector, seed, ScenarioKind::LateralNav, Performance::default())?;
            let rec = run_mode(&mut FnSelector(track_next_fix), &mut env, &sc, mode)?;
            instructions += rec.instructions;
            success += u32::from(rec.success);
            reward += rec.total_reward;
        }
        println!(
            "{:>9}: mean instructions {:>6.2}  success {:>3}%  mean reward {:>8.2}",
            mode.name(),
            f64::from(instructions) / n as f64,
            success,
            reward / n as f64
        );
    }
    Ok(())
}
