//! CSV, JSON-lines and plot-series output for experiment results.

use std::io::{Read, Write};

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::experiment::{Report, ResultRow, TrialRow};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Format {
    #[default]
    Csv,
    Jsonl,
}

impl std::str::FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(Format::Csv),
            "jsonl" | "json" => Ok(Format::Jsonl),
            _ => Err(format!("unknown format {s:?}")),
        }
    }
}

pub fn write_csv<R: Serialize>(rows: &[R], w: impl Write) -> csv::Result<()> {
    let mut out = csv::Writer::from_writer(w);
    for r in rows {
        out.serialize(r)?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_csv<R: DeserializeOwned>(r: impl Read) -> csv::Result<Vec<R>> {
    csv::Reader::from_reader(r).deserialize().collect()
}

pub fn write_jsonl<R: Serialize>(rows: &[R], mut w: impl Write) -> std::io::Result<()> {
    for r in rows {
        serde_json::to_writer(&mut w, r)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_jsonl<R: DeserializeOwned>(r: impl std::io::BufRead) -> std::io::Result<Vec<R>> {
    r.lines()
        .filter(|l| l.as_ref().map_or(true, |l| !l.trim().is_empty()))
        .map(|l| Ok(serde_json::from_str(&l?)?))
        .collect()
}

pub fn write_rows<R: Serialize>(rows: &[R], format: Format, w: impl Write) -> std::io::Result<()> {
    match format {
        Format::Csv => write_csv(rows, w).map_err(std::io::Error::other),
        Format::Jsonl => write_jsonl(rows, w),
    }
}

pub fn write_trials(report: &Report, format: Format, w: impl Write) -> std::io::Result<()> {
    write_rows::<TrialRow>(&report.trials, format, w)
}

pub fn write_summary(report: &Report, format: Format, w: impl Write) -> std::io::Result<()> {
    write_rows::<ResultRow>(&report.summary, format, w)
}

/// One `series,x,y` line per method and budget: x is the budget, y the mean error.
pub fn write_plot_data(rows: &[ResultRow], mut w: impl Write) -> std::io::Result<()> {
    writeln!(w, "series,x,y")?;
    let mut sorted: Vec<&ResultRow> = rows.iter().collect();
    sorted.sort_by_key(|r| (r.method, r.budget));
    for r in sorted {
        writeln!(w, "{},{},{}", r.method, r.budget, r.error)?;
    }
    Ok(())
}

/// Fixed-width table for terminals.
pub fn write_table(report: &Report, mut w: impl Write) -> std::io::Result<()> {
    writeln!(w, "{:<14}{:>8}{:>12}{:>12}{:>12}{:>14}", "method", "budget", "stored", "error", "seconds", "tuned")?;
    for r in &report.summary {
        let t = report.tuning_for(r.method, r.budget);
        let tuned = t.map_or(String::new(), |t| format!("{:.4}{}", t.parameter, if t.feasible { "" } else { "*" }));
        writeln!(w, "{:<14}{:>8}{:>12.1}{:>12.4}{:>12.4}{:>14}", r.method.name(), r.budget, r.stored_edges, r.error, r.seconds, tuned)?;
    }
    if report.infeasible().next().is_some() {
        writeln!(w, "* budget not reached within tolerance after tuning")?;
    }
    Ok(())
}
