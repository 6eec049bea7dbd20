//! One frozen decision point, query by query: a scripted burst of heading
//! primitives compiles into macros while positions stay put. Then a
//! fifteen-step climb burst in a vertical scenario.
//!
//! `cargo run --example stacking_decision`

use std::sync::Arc;

use atc_stack::airspace::Sector;
use atc_stack::dynamics::Performance;
use atc_stack::env::{ActionSpace, AtcEnv, EnvConfig};
use atc_stack::rewards::RewardPreset;
use atc_stack::scenario::{generate, ScenarioKind};
use atc_stack::stacking::{stacked_decision, Scripted};

fn main() -> atc_stack::Result<()> {
    let sector = Arc::new(Sector::default_sector());
    let weights = RewardPreset::LateralNavigation.weights();
    let mut env = AtcEnv::new(Arc::clone(&sector), ActionSpace::LateralSmall, EnvConfig::new(weights))?;
    env.reset(&generate(&sector, 4, ScenarioKind::LateralNav, Performance::default())?)?;

    // right, right, right, left for AC1, then two rights for AC2
    let d = stacked_decision(&mut Scripted::new([2, 2, 2, 1, 4, 4, 0]), &mut env)?;
    for e in &d.trace.entries {
        let theta1 = e.observation[0] * 360.0 - 180.0;
        let theta2 = e.observation[4] * 360.0 - 180.0;
        println!("query {} action {}  theta_f AC1 {theta1:>7.1}  AC2 {theta2:>7.1}", e.query, e.action);
    }
    println!("stopped: {:?}", d.trace.stop);
    for m in &d.macros {
        println!("  {m}  (x{})", m.primitive_count);
    }

    let weights = RewardPreset::VerticalNavigation.weights();
    let mut venv = AtcEnv::new(Arc::clone(&sector), ActionSpace::Vertical, EnvConfig::new(weights))?;
    let low = (0..)
        .map(|s| generate(&sector, s, ScenarioKind::Vertical, Performance::default()))
        .find(|sc| sc.as_ref().is_ok_and(|sc| sc.aircraft[0].state.selected_fl <= 150))
        .expect("a low start")?;
    venv.reset(&low)?;
    let mut burst = vec![2; 15];
    burst.push(0);
    let v = stacked_decision(&mut Scripted::new(burst), &mut venv)?;
    println!("vertical: {} queries -> {}", v.trace.entries.len(), v.macros[0]);
    Ok(())
}
