//! Trains a policy and writes a checkpoint plus a JSON-lines log.
//!
//! `cargo run --release --example train_policy -- lateral_nav lateral_small lateral_navigation 200000 out/`

use std::sync::Arc;
use std::time::Instant;

use atc_stack::airspace::Sector;
use atc_stack::env::ActionSpace;
use atc_stack::ppo::{TrainConfig, Trainer};
use atc_stack::rewards::RewardPreset;
use atc_stack::scenario::ScenarioKind;

fn main() -> atc_stack::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let arg = |i: usize, d: &str| args.get(i).cloned().unwrap_or_else(|| d.to_string());
    let kind: ScenarioKind = arg(0, "lateral_nav").parse()?;
    let space: ActionSpace = arg(1, "lateral_small").parse()?;
    let preset: RewardPreset = arg(2, "lateral_navigation").parse()?;
    let steps: u64 = arg(3, "200000").parse().expect("step count");
    let out = std::path::PathBuf::from(arg(4, "target/train_policy"));
    std::fs::create_dir_all(&out).map_err(|e| atc_stack::Error::Config(e.to_string()))?;

    let mut config = TrainConfig::new(kind, space, preset);
    config.ppo.total_steps = steps;
    config.eval_interval = 10;
    let mut trainer = Trainer::new(Arc::new(Sector::default_sector()), config)?;
    let t0 = Instant::now();
    while !trainer.is_finished() {
        let r = trainer.step_update()?;
        if let Some(e) = r.eval {
            println!(
                "{:>8} steps  {:>6.1}s  reward {:>8.2}  actions {:>6.1}  success {:.2}  entropy {:.3}",
                r.steps,
                t0.elapsed().as_secs_f64(),
                e.mean_reward,
                e.mean_actions,
                e.success_rate,
                r.metrics.entropy
            );
        }
    }
    let path = out.join(format!("{}_{}.json", kind, preset.name()));
    trainer.checkpoint().save(&path)?;
    println!("wrote {}", path.display());
    Ok(())
}
