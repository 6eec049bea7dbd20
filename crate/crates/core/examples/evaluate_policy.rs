//! Evaluates a checkpoint greedily on seeded episodes, unstacked and
//! stacked, and writes statistics, per-episode rows, the first episode's
//! trace and an SVG of its tracks.
//!
//! `cargo run --release --example evaluate_policy -- ckpt.json 100 out/`

use std::sync::Arc;

use atc_stack::airspace::Sector;
use atc_stack::eval::{evaluate, format_stats, render_svg, save_json, write_episode_rows, EvalSettings};
use atc_stack::ppo::PolicyCheckpoint;
use atc_stack::stacking::EvalMode;
use atc_stack::trace::save_trace;

fn main() -> atc_stack::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let checkpoint = PolicyCheckpoint::load(args.first().map(String::as_str).unwrap_or("checkpoint.json"))?;
    let episodes = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(100);
    let out = std::path::PathBuf::from(args.get(2).cloned().unwrap_or_else(|| "target/evaluate_policy".into()));
    std::fs::create_dir_all(&out).map_err(|e| atc_stack::Error::Config(e.to_string()))?;
    let sector = Arc::new(Sector::default_sector());

    for mode in [EvalMode::Unstacked, EvalMode::Stacked] {
        let settings = EvalSettings {
            episodes,
            mode,
            ..EvalSettings::default()
        };
        let (stats, records) = evaluate(&checkpoint, Arc::clone(&sector), &settings)?;
        print!("{}", format_stats(&stats));
        let name = mode.name();
        save_json(&stats, out.join(format!("{name}_stats.json")))?;
        let rows = std::fs::File::create(out.join(format!("{name}_episodes.csv")))
            .map_err(|e| atc_stack::Error::Config(e.to_string()))?;
        write_episode_rows(&records, rows)?;
        if let Some(first) = records.first() {
            save_trace(first, out.join(format!("{name}_trace.csv")))?;
            std::fs::write(out.join(format!("{name}_tracks.svg")), render_svg(&sector, first))
                .map_err(|e| atc_stack::Error::Config(e.to_string()))?;
        }
    }
    println!("wrote {}", out.display());
    Ok(())
}
