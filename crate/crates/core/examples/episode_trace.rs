//! Flies one scenario with a fixed action script and writes its trace and
//! macro table as CSV.
//!
//! `cargo run --example episode_trace -- <seed> <out-dir> [stacked]`

use std::sync::Arc;

use atc_stack::airspace::Sector;
use atc_stack::dynamics::Performance;
use atc_stack::env::{ActionSpace, AtcEnv, EnvConfig};
use atc_stack::rewards::RewardPreset;
use atc_stack::scenario::{generate, ScenarioKind};
use atc_stack::stacking::{run_mode, EvalMode, Scripted};
use atc_stack::trace::{save_macros, save_trace};

fn main() -> atc_stack::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let seed: u64 = args.first().map_or(3, |s| s.parse().expect("seed"));
    let out = std::path::PathBuf::from(args.get(1).map_or("target/episode_trace", String::as_str));
    let mode = if args.get(2).is_some_and(|m| m == "stacked") {
        EvalMode::Stacked
    } else {
        EvalMode::Unstacked
    };
    std::fs::create_dir_all(&out).map_err(|e| atc_stack::Error::Config(e.to_string()))?;

    let sector = Arc::new(Sector::default_sector());
    let scenario = generate(&sector, seed, ScenarioKind::LateralNav, Performance::default())?;
    for ac in &scenario.aircraft {
        println!("{} on {} exiting at {}", ac.state.callsign, ac.state.route.id, ac.exit_fix);
    }
    let config = EnvConfig::new(RewardPreset::LateralNavigation.weights());
    let mut env = AtcEnv::new(sector, ActionSpace::LateralSmall, config)?;
    // a three-step right burst for AC1, then hands off
    let record = run_mode(&mut Scripted::new([2, 2, 2]), &mut env, &scenario, mode)?;
    save_trace(&record, out.join("trace.csv"))?;
    save_macros(&record, out.join("macros.csv"))?;
    println!(
        "{} steps, {} instructions, reward {:.2}, terminal {:?}",
        record.steps.len(),
        record.instructions,
        record.total_reward,
        record.terminal
    );
    Ok(())
}
