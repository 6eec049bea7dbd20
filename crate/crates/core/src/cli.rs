//! The `atc-stack` command line: `train`, `eval` and `compare`.
//!
//! Errors are printed to standard error as `error: <message>` and the
//! process exits with status 1 (2 for malformed arguments).

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::config::{load_sector, CompareArgs, ConfigFile, EvalArgs, TrainArgs};
use crate::error::{Error, Result};
use crate::eval::{compare, evaluate, format_stats, render_svg, save_json, write_episode_rows, write_pairs, EvalSettings};
use crate::ppo::{train, PolicyCheckpoint};
use crate::stacking::EvalMode;
use crate::trace::{save_macros, save_trace};

#[derive(Debug, Parser)]
#[command(name = "atc-stack", version, about = "Train, evaluate and compare en-route ATC policies")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train a policy and write a checkpoint plus a JSON-lines log.
    Train {
        /// TOML file whose `[train]` table supplies unset flags.
        #[arg(long)]
        config: Option<PathBuf>,
        #[command(flatten)]
        args: TrainArgs,
    },
    /// Evaluate a checkpoint on seeded episodes.
    Eval {
        #[arg(long)]
        config: Option<PathBuf>,
        #[command(flatten)]
        args: EvalArgs,
    },
    /// Evaluate two checkpoints on the same seeds.
    Compare {
        #[arg(long)]
        config: Option<PathBuf>,
        #[command(flatten)]
        args: CompareArgs,
    },
}

/// Parses `args`, runs the command and returns the process exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Train { config, mut args } => {
            if let Some(path) = config {
                args.fill_from(&ConfigFile::load(path)?.train);
            }
            let path = cmd_train(&args)?;
            println!("{}", path.display());
        }
        Command::Eval { config, mut args } => {
            if let Some(path) = config {
                args.fill_from(&ConfigFile::load(path)?.eval);
            }
            cmd_eval(&args)?;
        }
        Command::Compare { config, mut args } => {
            if let Some(path) = config {
                args.fill_from(&ConfigFile::load(path)?.compare);
            }
            cmd_compare(&args)?;
        }
    }
    Ok(())
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn create_file(path: &Path) -> Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| Error::io(path, e))
}

/// Trains and returns the checkpoint path. Also writes `train_log.jsonl`
/// and the resolved configuration as `train_config.json`.
pub fn cmd_train(args: &TrainArgs) -> Result<PathBuf> {
    let config = args.to_train_config()?;
    let sector = load_sector(args.sector.as_deref())?;
    let dir = args.output_dir();
    create_dir(&dir)?;
    save_json(&config, dir.join("train_config.json"))?;
    let log_path = dir.join("train_log.jsonl");
    let mut log = create_file(&log_path)?;
    let outcome = train(sector, config, Some(&mut log))?;
    log.flush().map_err(|e| Error::io(&log_path, e))?;
    let path = dir.join("checkpoint.json");
    outcome.checkpoint.save(&path)?;
    Ok(path)
}

fn settings(episodes: Option<usize>, seed: Option<u64>, workers: Option<usize>) -> EvalSettings {
    let d = EvalSettings::default();
    EvalSettings {
        episodes: episodes.unwrap_or(d.episodes),
        base_seed: seed.unwrap_or(d.base_seed),
        workers: workers.unwrap_or(d.workers),
        ..d
    }
}

fn load_checkpoint(path: Option<&Path>, flag: &str) -> Result<PolicyCheckpoint> {
    let path = path.ok_or_else(|| Error::Config(format!("{flag} is required")))?;
    PolicyCheckpoint::load(path)
}

/// Writes `<mode>_stats.json` and `<mode>_episodes.csv` per mode, plus
/// per-episode traces and renderings on request.
pub fn cmd_eval(args: &EvalArgs) -> Result<()> {
    let checkpoint = load_checkpoint(args.checkpoint.as_deref(), "--checkpoint")?;
    if let Some(kind) = args.kind {
        if kind != checkpoint.kind {
            return Err(Error::Incompatible(format!(
                "checkpoint was trained on {} but {} was requested",
                checkpoint.kind, kind
            )));
        }
    }
    let sector = load_sector(args.sector.as_deref())?;
    let dir = args.output_dir();
    create_dir(&dir)?;
    let base = EvalSettings {
        sampled: args.sampled,
        ..settings(args.episodes, args.seed, args.workers)
    };
    for mode in args.modes() {
        let s = EvalSettings { mode, ..base };
        let (stats, records) = evaluate(&checkpoint, sector.clone(), &s)?;
        print!("{}", format_stats(&stats));
        let name = mode.name();
        save_json(&stats, dir.join(format!("{name}_stats.json")))?;
        let rows_path = dir.join(format!("{name}_episodes.csv"));
        write_episode_rows(&records, create_file(&rows_path)?)?;
        if args.trace.unwrap_or(false) {
            let tdir = dir.join("traces");
            create_dir(&tdir)?;
            for r in &records {
                save_trace(r, tdir.join(format!("{name}_seed{}.csv", r.scenario_seed)))?;
                save_macros(r, tdir.join(format!("{name}_seed{}_macros.csv", r.scenario_seed)))?;
            }
        }
        if args.render.unwrap_or(false) {
            let rdir = dir.join("renders");
            create_dir(&rdir)?;
            for r in &records {
                let path = rdir.join(format!("{name}_seed{}.svg", r.scenario_seed));
                std::fs::write(&path, render_svg(&sector, r)).map_err(|e| Error::io(&path, e))?;
            }
        }
    }
    Ok(())
}

/// Writes `compare.json` and `pairs.csv` and prints both stat blocks.
pub fn cmd_compare(args: &CompareArgs) -> Result<()> {
    let a = load_checkpoint(args.a.as_deref(), "--a")?;
    let b = load_checkpoint(args.b.as_deref(), "--b")?;
    let sector = load_sector(args.sector.as_deref())?;
    let dir = args.output_dir();
    create_dir(&dir)?;
    let s = settings(args.episodes, args.seed, args.workers);
    let report = compare(
        &a,
        args.mode_a.unwrap_or(EvalMode::Unstacked),
        &b,
        args.mode_b.unwrap_or(EvalMode::Unstacked),
        sector,
        &s,
    )?;
    print!("A: {}", format_stats(&report.a));
    print!("B: {}", format_stats(&report.b));
    println!("{:>8} {:>6} {:>6} {:>9} {:>9}", "seed", "a", "b", "a_sep", "b_sep");
    let sep = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |d| format!("{d:.2}"));
    for p in &report.pairs {
        println!(
            "{:>8} {:>6} {:>6} {:>9} {:>9}",
            p.seed,
            p.a_instructions,
            p.b_instructions,
            sep(p.a_min_separation_nm),
            sep(p.b_min_separation_nm)
        );
    }
    save_json(&report, dir.join("compare.json"))?;
    write_pairs(&report, create_file(&dir.join("pairs.csv"))?)?;
    Ok(())
}
