//! Delimiter-separated episode exports.
//!
//! A trace file starts with one comment line naming the schema version,
//! followed by a CSV header and one row per environment step:
//!
//! ```text
//! # atc-stack trace v1
//! step,ac1_east,ac1_north,ac1_heading,ac1_cleared,ac1_altitude_ft,ac1_selected_fl,...,action,command,
//!   r_centreline,r_damping,r_safety,r_vertical,r_terminal,reward,separation_nm,projected_min_nm
//! ```
//!
//! Stacked episodes leave `action` empty and list their macros in `command`.
//! The macro table has the columns `step,target,kind,magnitude,primitive_count`.

use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::stacking::{EpisodeRecord, MacroKind};

pub const TRACE_SCHEMA_VERSION: u32 = 1;
pub const MACRO_SCHEMA_VERSION: u32 = 1;

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn trace_header(aircraft: usize) -> Vec<String> {
    let mut h = vec!["step".to_string()];
    for i in 1..=aircraft {
        for f in ["east", "north", "heading", "cleared", "altitude_ft", "selected_fl"] {
            h.push(format!("ac{i}_{f}"));
        }
    }
    for f in [
        "action",
        "command",
        "r_centreline",
        "r_damping",
        "r_safety",
        "r_vertical",
        "r_terminal",
        "reward",
        "separation_nm",
        "projected_min_nm",
    ] {
        h.push(f.to_string());
    }
    h
}

pub fn write_trace(record: &EpisodeRecord, out: impl Write) -> Result<()> {
    let mut out = out;
    writeln!(out, "# atc-stack trace v{TRACE_SCHEMA_VERSION}").map_err(|e| Error::io("trace", e))?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(trace_header(record.callsigns.len()))?;
    for s in &record.steps {
        let mut row = vec![s.step.to_string()];
        for a in &s.aircraft {
            row.extend([
                a.east.to_string(),
                a.north.to_string(),
                a.heading.to_string(),
                a.cleared_heading.to_string(),
                a.altitude_ft.to_string(),
                a.selected_fl.to_string(),
            ]);
        }
        let c = &s.components;
        row.extend([
            s.action.map(|a| a.to_string()).unwrap_or_default(),
            s.command.clone(),
            c.centreline.to_string(),
            c.damping.to_string(),
            c.safety.to_string(),
            c.vertical.to_string(),
            c.terminal.to_string(),
            s.reward.to_string(),
            opt(s.separation_nm),
            opt(s.projected_min_nm),
        ]);
        w.write_record(row)?;
    }
    w.flush().map_err(|e| Error::io("trace", e))?;
    Ok(())
}

pub fn write_macros(record: &EpisodeRecord, out: impl Write) -> Result<()> {
    let mut out = out;
    writeln!(out, "# atc-stack macros v{MACRO_SCHEMA_VERSION}").map_err(|e| Error::io("macros", e))?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["step", "target", "kind", "magnitude", "primitive_count"])?;
    for m in &record.macros {
        let kind = match m.command.kind {
            MacroKind::Heading => "heading",
            MacroKind::Level => "level",
        };
        w.write_record([
            m.step.to_string(),
            m.command.target.clone(),
            kind.to_string(),
            m.command.magnitude.to_string(),
            m.command.primitive_count.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io("macros", e))?;
    Ok(())
}

pub fn save_trace(record: &EpisodeRecord, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_trace(record, std::io::BufWriter::new(f))
}

pub fn save_macros(record: &EpisodeRecord, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_macros(record, std::io::BufWriter::new(f))
}

/// Reads a trace back as (header, rows), checking the schema line.
pub fn read_trace(text: &str) -> Result<(Vec<String>, Vec<Vec<String>>)> {
    let (first, rest) = text.split_once('\n').unwrap_or((text, ""));
    if first.trim() != format!("# atc-stack trace v{TRACE_SCHEMA_VERSION}") {
        return Err(Error::parse("trace", format!("unexpected schema line {first:?}")));
    }
    let mut r = csv::Reader::from_reader(rest.as_bytes());
    let header = r.headers()?.iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.map(|r| r.iter().map(String::from).collect()))
        .collect::<std::result::Result<Vec<Vec<String>>, _>>()?;
    Ok((header, rows))
}
