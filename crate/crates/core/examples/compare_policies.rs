//! Pairs two checkpoints on the same evaluation seeds, for instance a damped
//! policy flown unstacked against the same policy stacked.
//!
//! `cargo run --release --example compare_policies -- a.json b.json [episodes]`

use std::sync::Arc;

use atc_stack::airspace::Sector;
use atc_stack::eval::{compare, format_stats, EvalSettings};
use atc_stack::ppo::PolicyCheckpoint;
use atc_stack::stacking::EvalMode;

fn main() -> atc_stack::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let (Some(a), Some(b)) = (args.first(), args.get(1)) else {
        eprintln!("usage: compare_policies <a.json> <b.json> [episodes]");
        std::process::exit(2);
    };
    let settings = EvalSettings {
        episodes: args.get(2).map_or(100, |n| n.parse().expect("episode count")),
        ..EvalSettings::default()
    };
    let (a, b) = (PolicyCheckpoint::load(a)?, PolicyCheckpoint::load(b)?);
    let sector = Arc::new(Sector::default_sector());
    let report = compare(&a, EvalMode::Unstacked, &b, EvalMode::Stacked, sector, &settings)?;
    print!("A unstacked: {}", format_stats(&report.a));
    print!("B stacked:   {}", format_stats(&report.b));
    let fewer = report.pairs.iter().filter(|p| p.b_instructions < p.a_instructions).count();
    println!("B issued fewer instructions on {fewer} of {} seeds", report.pairs.len());
    Ok(())
}
