//! File emission and parsing. Every emitted file starts with a `#`-prefixed
//! metadata block carrying the command, the seed, and the full resolved
//! configuration, so any output is reproducible from its own header.

use std::fs;
use std::io::{self, Write};
use std::path::Path;

use qslp_core::solver::SimulationRecord;
use qslp_core::stats::Histogram;

use crate::config::AppConfig;
use crate::runner::{Metric, ScenarioReport, SweepTable};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Metadata header shared by every emitted file.
pub fn metadata_block(command: &str, seed: u64, cfg: &AppConfig) -> String {
    let mut out = String::new();
    out.push_str(&format!("# qslp {VERSION}\n"));
    out.push_str(&format!("# command = {command}\n"));
    out.push_str(&format!("# seed = {seed}\n"));
    for (k, v) in cfg.echo() {
        out.push_str(&format!("# {k} = {v}\n"));
    }
    out
}

fn write_atomic(path: &Path, content: &str) -> io::Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    let mut f = fs::File::create(path)?;
    f.write_all(content.as_bytes())?;
    Ok(())
}

/// Boundary-output trace CSV: one row per recorded instant.
pub fn write_record(path: &Path, rec: &SimulationRecord, meta: &str) -> io::Result<()> {
    let mut s = String::with_capacity(rec.times.len() * 96 + meta.len());
    s.push_str(meta);
    s.push_str(&format!("# scenario = {}\n", rec.scenario));
    if let Some(t) = rec.events.storage_time {
        s.push_str(&format!("# storage_time_s = {t:e}\n"));
    }
    if let Some(t) = rec.events.release_time {
        s.push_str(&format!("# release_time_s = {t:e}\n"));
    }
    if let Some((a, b)) = rec.events.hold {
        s.push_str(&format!("# hold_start_s = {a:e}\n# hold_end_s = {b:e}\n"));
    }
    s.push_str(
        "t_s,re_Eplus_out,im_Eplus_out,re_Eminus_out,im_Eminus_out,photonic_energy,spin_energy,higher_coherence_energy\n",
    );
    for i in 0..rec.times.len() {
        s.push_str(&format!(
            "{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e}\n",
            rec.times[i],
            rec.e_plus_out[i].re,
            rec.e_plus_out[i].im,
            rec.e_minus_out[i].re,
            rec.e_minus_out[i].im,
            rec.photonic_energy[i],
            rec.spin_energy[i],
            rec.higher_coherence_energy[i],
        ));
    }
    write_atomic(path, &s)
}

/// Histogram CSV: `bin_start_s,normalized_count`.
pub fn write_histogram(path: &Path, h: &Histogram, meta: &str) -> io::Result<()> {
    let mut s = String::with_capacity(h.counts.len() * 32 + meta.len());
    s.push_str(meta);
    s.push_str(&format!("# heralds = {}\n", h.heralds));
    s.push_str("bin_start_s,normalized_count\n");
    for (j, &c) in h.counts.iter().enumerate() {
        s.push_str(&format!("{:e},{:e}\n", h.bin_start(j), c));
    }
    write_atomic(path, &s)
}

/// Event-stream CSV: `channel,time_s` with channels `herald` and `signal`.
pub fn write_events(
    path: &Path,
    heralds: &[f64],
    signals: &[f64],
    meta: &str,
) -> io::Result<()> {
    let mut s = String::with_capacity((heralds.len() + signals.len()) * 28 + meta.len());
    s.push_str(meta);
    s.push_str("channel,time_s\n");
    for &t in heralds {
        s.push_str(&format!("herald,{t:e}\n"));
    }
    for &t in signals {
        s.push_str(&format!("signal,{t:e}\n"));
    }
    write_atomic(path, &s)
}

/// Reads an event-stream CSV back into (heralds, signals).
pub fn read_events(path: &Path) -> io::Result<(Vec<f64>, Vec<f64>)> {
    let text = fs::read_to_string(path)?;
    let mut heralds = Vec::new();
    let mut signals = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with("channel") {
            continue;
        }
        let parse_err = || {
            io::Error::new(
                io::ErrorKind::InvalidData,
                format!("line {}: expected `channel,time_s`, got `{line}`", idx + 1),
            )
        };
        let (channel, time) = line.split_once(',').ok_or_else(parse_err)?;
        let t: f64 = time.trim().parse().map_err(|_| parse_err())?;
        match channel.trim() {
            "herald" => heralds.push(t),
            "signal" => signals.push(t),
            _ => return Err(parse_err()),
        }
    }
    Ok((heralds, signals))
}

fn metric_line(m: &Metric) -> String {
    match m.window {
        Some(w) => format!(
            "{},{:e},{},{:e},{:e}\n",
            m.name, m.value, m.unit, w.t_start, w.t_end
        ),
        None => format!("{},{:e},{},,\n", m.name, m.value, m.unit),
    }
}

/// Metrics table CSV: `name,value,unit,window_start_s,window_end_s`.
pub fn write_metrics(path: &Path, metrics: &[Metric], meta: &str) -> io::Result<()> {
    let mut s = String::from(meta);
    s.push_str("name,value,unit,window_start_s,window_end_s\n");
    for m in metrics {
        s.push_str(&metric_line(m));
    }
    write_atomic(path, &s)
}

/// Human-readable scenario report.
pub fn write_report(path: &Path, report: &ScenarioReport, meta: &str) -> io::Result<()> {
    let mut s = String::new();
    s.push_str(&format!("qslp scenario report: {}\n\n", report.scenario));
    s.push_str("metrics:\n");
    for m in &report.metrics {
        match m.window {
            Some(w) => s.push_str(&format!(
                "  {} = {:.6e} {} (window {:.3e}..{:.3e} s)\n",
                m.name, m.value, m.unit, w.t_start, w.t_end
            )),
            None => s.push_str(&format!("  {} = {:.6e} {}\n", m.name, m.value, m.unit)),
        }
    }
    if !report.notes.is_empty() {
        s.push_str("\nnotes:\n");
        for note in &report.notes {
            s.push_str(&format!("  - {note}\n"));
        }
    }
    s.push_str("\nartifacts:\n");
    for a in &report.artifacts {
        s.push_str(&format!("  {a}\n"));
    }
    s.push_str("\nresolved configuration:\n");
    for line in meta.lines() {
        s.push_str(&format!("  {}\n", line.trim_start_matches("# ")));
    }
    write_atomic(path, &s)
}

/// Sweep table CSV: one row per grid point, failures marked, order stable.
pub fn write_sweep(path: &Path, table: &SweepTable, meta: &str) -> io::Result<()> {
    let mut s = String::from(meta);
    s.push_str("index,");
    s.push_str(&table.parameter_names.join(","));
    s.push_str(",status,error");
    for name in &table.metric_names {
        s.push(',');
        s.push_str(name);
    }
    s.push('\n');
    for row in &table.rows {
        s.push_str(&format!("{}", row.index));
        for v in &row.parameter_values {
            s.push_str(&format!(",{v}"));
        }
        match &row.error {
            None => s.push_str(",ok,"),
            Some(e) => s.push_str(&format!(",failed,\"{}\"", e.replace('"', "'"))),
        }
        for name in &table.metric_names {
            match row.metrics.iter().find(|m| m.name == *name) {
                Some(m) => s.push_str(&format!(",{:e}", m.value)),
                None => s.push_str(",nan"),
            }
        }
        s.push('\n');
    }
    write_atomic(path, &s)
}
