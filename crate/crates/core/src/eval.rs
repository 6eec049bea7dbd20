//! Seeded evaluation of trained policies, paired comparison of two
//! checkpoints, and the files both produce.
//!
//! Episode `i` of an evaluation always uses scenario seed `base_seed + i`,
//! so a population of N episodes is fixed by `(base_seed, N)` and two
//! policies evaluated with the same pair see identical scenarios.

use std::fmt::Write as _;
use std::path::Path;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::airspace::Sector;
use crate::env::AtcEnv;
use crate::error::{Error, Result};
use crate::ppo::PolicyCheckpoint;
use crate::safety::SEPARATION_MINIMUM_NM;
use crate::scenario::generate;
use crate::stacking::{run_mode, EpisodeRecord, EvalMode, Greedy, Sampled};

pub const STATS_FORMAT_VERSION: u32 = 1;
pub const HISTOGRAM_BIN_WIDTH: u32 = 5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalSettings {
    pub episodes: usize,
    pub base_seed: u64,
    pub mode: EvalMode,
    /// Sample actions from this seed instead of taking the argmax.
    pub sampled: Option<u64>,
    /// Parallel episodes; results are ordered by episode index regardless.
    pub workers: usize,
}

impl Default for EvalSettings {
    fn default() -> Self {
        Self {
            episodes: 100,
            base_seed: 0,
            mode: EvalMode::Unstacked,
            sampled: None,
            workers: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramBin {
    pub from: u32,
    pub to: u32,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionStats {
    pub mean: f64,
    pub std: f64,
    pub min: u32,
    pub max: u32,
    /// Bins of width five covering `[0, max]`; counts sum to the episode count.
    pub histogram: Vec<HistogramBin>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SuccessRates {
    pub exited_correctly: f64,
    pub within_bounds: f64,
    pub within_action_budget: f64,
    pub overall: f64,
    pub final_level_correct: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalStats {
    pub format_version: u32,
    pub kind: String,
    pub action_space: String,
    pub preset: String,
    pub mode: EvalMode,
    pub episodes: usize,
    pub base_seed: u64,
    pub actions: ActionStats,
    pub mean_primitives: f64,
    pub mean_reward: f64,
    /// Per-episode minimum pairwise distance, absent for one-aircraft runs.
    pub min_separation_nm: Vec<Option<f64>>,
    pub losses_of_separation: usize,
    pub success: SuccessRates,
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (0.0, 0.0);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

pub fn action_stats(counts: &[u32]) -> ActionStats {
    let as_f: Vec<f64> = counts.iter().map(|&c| f64::from(c)).collect();
    let (mean, std) = mean_std(&as_f);
    let max = counts.iter().copied().max().unwrap_or(0);
    let min = counts.iter().copied().min().unwrap_or(0);
    let bins = max / HISTOGRAM_BIN_WIDTH + 1;
    let histogram = (0..bins)
        .map(|b| {
            let from = b * HISTOGRAM_BIN_WIDTH;
            let to = from + HISTOGRAM_BIN_WIDTH - 1;
            HistogramBin {
                from,
                to,
                count: counts.iter().filter(|&&c| c >= from && c <= to).count(),
            }
        })
        .collect();
    ActionStats {
        mean,
        std,
        min,
        max,
        histogram,
    }
}

/// Aggregates finished episodes. `records` must share one mode.
pub fn summarize(checkpoint: &PolicyCheckpoint, settings: &EvalSettings, records: &[EpisodeRecord]) -> EvalStats {
    let n = records.len().max(1) as f64;
    let rate = |f: &dyn Fn(&EpisodeRecord) -> bool| records.iter().filter(|r| f(r)).count() as f64 / n;
    let counts: Vec<u32> = records.iter().map(|r| r.instructions).collect();
    EvalStats {
        format_version: STATS_FORMAT_VERSION,
        kind: checkpoint.kind.name().to_string(),
        action_space: checkpoint.action_space.name().to_string(),
        preset: checkpoint.preset.clone(),
        mode: settings.mode,
        episodes: records.len(),
        base_seed: settings.base_seed,
        actions: action_stats(&counts),
        mean_primitives: records.iter().map(|r| f64::from(r.primitives)).sum::<f64>() / n,
        mean_reward: records.iter().map(|r| r.total_reward).sum::<f64>() / n,
        min_separation_nm: records.iter().map(|r| r.min_separation_nm).collect(),
        losses_of_separation: records.iter().filter(|r| r.loss_of_separation()).count(),
        success: SuccessRates {
            exited_correctly: rate(&|r| r.terminal.exited_correctly),
            within_bounds: rate(&|r| r.terminal.within_bounds),
            within_action_budget: rate(&|r| r.terminal.within_action_budget),
            overall: rate(&|r| r.success),
            final_level_correct: rate(&|r| r.final_level_correct),
        },
    }
}

/// Environment matching the checkpoint's final training phase.
pub fn env_for(checkpoint: &PolicyCheckpoint, sector: Arc<Sector>) -> Result<AtcEnv> {
    let cfg = &checkpoint.config;
    AtcEnv::new(sector, checkpoint.action_space, cfg.env_config(cfg.weights))
}

/// Runs one episode of the evaluation population.
pub fn evaluate_episode(
    checkpoint: &PolicyCheckpoint,
    sector: &Arc<Sector>,
    settings: &EvalSettings,
    index: usize,
) -> Result<EpisodeRecord> {
    let seed = settings.base_seed + index as u64;
    let scenario = generate(sector, seed, checkpoint.kind, checkpoint.config.performance)?;
    let mut env = env_for(checkpoint, Arc::clone(sector))?;
    let policy = &checkpoint.network;
    match settings.sampled {
        None => run_mode(&mut Greedy(policy), &mut env, &scenario, settings.mode),
        Some(s) => {
            let mut rng = ChaCha8Rng::seed_from_u64(s);
            rng.set_stream(seed);
            run_mode(&mut Sampled { policy, rng }, &mut env, &scenario, settings.mode)
        }
    }
}

/// Evaluates `settings.episodes` seeded episodes and returns the aggregate
/// plus every episode record in index order.
pub fn evaluate(
    checkpoint: &PolicyCheckpoint,
    sector: Arc<Sector>,
    settings: &EvalSettings,
) -> Result<(EvalStats, Vec<EpisodeRecord>)> {
    let run = || -> Result<Vec<EpisodeRecord>> {
        (0..settings.episodes)
            .into_par_iter()
            .map(|i| evaluate_episode(checkpoint, &sector, settings, i))
            .collect()
    };
    let records = if settings.workers <= 1 {
        (0..settings.episodes)
            .map(|i| evaluate_episode(checkpoint, &sector, settings, i))
            .collect::<Result<Vec<_>>>()?
    } else {
        rayon::ThreadPoolBuilder::new()
            .num_threads(settings.workers)
            .build()
            .map_err(|e| Error::Config(format!("worker pool: {e}")))?
            .install(run)?
    };
    Ok((summarize(checkpoint, settings, &records), records))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairRow {
    pub seed: u64,
    pub a_instructions: u32,
    pub b_instructions: u32,
    pub a_min_separation_nm: Option<f64>,
    pub b_min_separation_nm: Option<f64>,
    pub a_success: bool,
    pub b_success: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareReport {
    pub format_version: u32,
    pub a: EvalStats,
    pub b: EvalStats,
    pub pairs: Vec<PairRow>,
}

/// Paired evaluation of two checkpoints on one seed schedule.
pub fn compare(
    a: &PolicyCheckpoint,
    a_mode: EvalMode,
    b: &PolicyCheckpoint,
    b_mode: EvalMode,
    sector: Arc<Sector>,
    settings: &EvalSettings,
) -> Result<CompareReport> {
    if a.kind != b.kind || a.network.input_len() != b.network.input_len() {
        return Err(Error::Incompatible(format!(
            "observation layouts differ: {} ({} inputs) vs {} ({} inputs)",
            a.kind,
            a.network.input_len(),
            b.kind,
            b.network.input_len()
        )));
    }
    let sa = EvalSettings { mode: a_mode, ..*settings };
    let sb = EvalSettings { mode: b_mode, ..*settings };
    let (stats_a, rec_a) = evaluate(a, Arc::clone(&sector), &sa)?;
    let (stats_b, rec_b) = evaluate(b, sector, &sb)?;
    let pairs = rec_a
        .iter()
        .zip(&rec_b)
        .map(|(x, y)| PairRow {
            seed: x.scenario_seed,
            a_instructions: x.instructions,
            b_instructions: y.instructions,
            a_min_separation_nm: x.min_separation_nm,
            b_min_separation_nm: y.min_separation_nm,
            a_success: x.success,
            b_success: y.success,
        })
        .collect();
    Ok(CompareReport {
        format_version: STATS_FORMAT_VERSION,
        a: stats_a,
        b: stats_b,
        pairs,
    })
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// One row per episode.
pub fn write_episode_rows(records: &[EpisodeRecord], out: impl std::io::Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "seed",
        "mode",
        "instructions",
        "primitives",
        "total_reward",
        "steps",
        "exited_correctly",
        "within_bounds",
        "within_action_budget",
        "success",
        "final_level_correct",
        "min_separation_nm",
    ])?;
    for r in records {
        w.write_record([
            r.scenario_seed.to_string(),
            r.mode.name().to_string(),
            r.instructions.to_string(),
            r.primitives.to_string(),
            r.total_reward.to_string(),
            r.steps.len().to_string(),
            r.terminal.exited_correctly.to_string(),
            r.terminal.within_bounds.to_string(),
            r.terminal.within_action_budget.to_string(),
            r.success.to_string(),
            r.final_level_correct.to_string(),
            opt(r.min_separation_nm),
        ])?;
    }
    w.flush().map_err(|e| Error::io("episode rows", e))?;
    Ok(())
}

pub fn write_pairs(report: &CompareReport, out: impl std::io::Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "seed",
        "a_instructions",
        "b_instructions",
        "a_min_separation_nm",
        "b_min_separation_nm",
        "a_success",
        "b_success",
    ])?;
    for p in &report.pairs {
        w.write_record([
            p.seed.to_string(),
            p.a_instructions.to_string(),
            p.b_instructions.to_string(),
            opt(p.a_min_separation_nm),
            opt(p.b_min_separation_nm),
            p.a_success.to_string(),
            p.b_success.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io("pairs", e))?;
    Ok(())
}

pub fn save_json<T: Serialize>(value: &T, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Error::parse("json output", e))?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Plain-text block for terminal output.
pub fn format_stats(s: &EvalStats) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{} {} / {} / {} over {} episodes (seeds {}..)", s.mode.name(), s.kind, s.action_space, s.preset, s.episodes, s.base_seed);
    let _ = writeln!(out, "  instructions   mean {:.2}  std {:.2}  range {}..{}", s.actions.mean, s.actions.std, s.actions.min, s.actions.max);
    let _ = writeln!(out, "  primitives     mean {:.2}", s.mean_primitives);
    let _ = writeln!(out, "  reward         mean {:.2}", s.mean_reward);
    let _ = writeln!(
        out,
        "  success        overall {:.2}  exit {:.2}  bounds {:.2}  budget {:.2}  level {:.2}",
        s.success.overall, s.success.exited_correctly, s.success.within_bounds, s.success.within_action_budget, s.success.final_level_correct
    );
    let seps: Vec<f64> = s.min_separation_nm.iter().flatten().copied().collect();
    if !seps.is_empty() {
        let lowest = seps.iter().copied().fold(f64::INFINITY, f64::min);
        let _ = writeln!(
            out,
            "  separation     losses (<{SEPARATION_MINIMUM_NM} nm) {}  lowest {:.2} nm",
            s.losses_of_separation, lowest
        );
    }
    out
}

/// Standalone SVG of the sector routes and the flown tracks.
pub fn render_svg(sector: &Sector, record: &EpisodeRecord) -> String {
    let half = sector.half_box();
    let size = 600.0;
    let scale = size / (2.0 * half);
    let px = |e: f64, n: f64| ((e + half) * scale, (half - n) * scale);
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" viewBox="0 0 {size} {size}">"#);
    let _ = writeln!(s, r##"<rect width="{size}" height="{size}" fill="#fbfbf8" stroke="#444"/>"##);
    let width = 2.0 * sector.airway_half_width_nm * scale;
    for r in &sector.routes {
        let pts: Vec<String> = r
            .fixes
            .iter()
            .map(|f| {
                let (x, y) = px(f.position.east, f.position.north);
                format!("{x:.1},{y:.1}")
            })
            .collect();
        let _ = writeln!(
            s,
            r##"<polyline points="{}" fill="none" stroke="#e4e4dc" stroke-width="{width:.1}" stroke-linejoin="round"/>"##,
            pts.join(" ")
        );
    }
    for f in &sector.fixes {
        let (x, y) = px(f.position.east, f.position.north);
        let _ = writeln!(s, r##"<circle cx="{x:.1}" cy="{y:.1}" r="3" fill="#777"/><text x="{:.1}" y="{:.1}" font-size="10" fill="#555">{}</text>"##, x + 4.0, y - 4.0, f.name);
    }
    let colours = ["#c0392b", "#2471a3", "#1e8449", "#7d3c98"];
    for (i, callsign) in record.callsigns.iter().enumerate() {
        let mut pts = Vec::with_capacity(record.steps.len() + 1);
        if let Some(a) = record.start.get(i) {
            pts.push(px(a.east, a.north));
        }
        pts.extend(record.steps.iter().filter_map(|st| st.aircraft.get(i)).map(|a| px(a.east, a.north)));
        let text: Vec<String> = pts.iter().map(|(x, y)| format!("{x:.1},{y:.1}")).collect();
        let c = colours[i % colours.len()];
        let _ = writeln!(s, r#"<polyline points="{}" fill="none" stroke="{c}" stroke-width="2"/>"#, text.join(" "));
        if let Some((x, y)) = pts.first() {
            let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" font-size="12" fill="{c}">{callsign}</text>"#, x + 5.0, y + 12.0);
        }
    }
    for m in &record.macros {
        if let Some(a) = record.steps.get(m.step).and_then(|st| st.aircraft.get(m.command.aircraft)) {
            let (x, y) = px(a.east, a.north);
            let _ = writeln!(s, r##"<circle cx="{x:.1}" cy="{y:.1}" r="4" fill="none" stroke="#111"><title>{}</title></circle>"##, m.command);
        }
    }
    let _ = writeln!(
        s,
        r##"<text x="8" y="{:.1}" font-size="12" fill="#111">seed {} {} : {} instructions</text>"##,
        size - 8.0,
        record.scenario_seed,
        record.mode.name(),
        record.instructions
    );
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn histogram_covers_every_episode() {
        let counts = [0, 3, 4, 5, 9, 10, 22];
        let h = action_stats(&counts);
        assert_eq!(h.histogram.iter().map(|b| b.count).sum::<usize>(), counts.len());
        assert_eq!(h.histogram[0].count, 3);
        assert_eq!(h.histogram.last().unwrap().to, 24);
        assert_eq!(h.max, 22);
    }

    #[test]
    fn mean_and_population_std() {
        let (m, s) = mean_std(&[2.0, 4.0, 4.0, 4.0, 5.0, 5.0, 7.0, 9.0]);
        assert_eq!(m, 5.0);
        assert_eq!(s, 2.0);
    }
}
