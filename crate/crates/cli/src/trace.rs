//! CSV traces with a `#` header block.
//!
//! ```text
//! # ch-parareal trace
//! # algorithm = pa1
//! # ...
//! #> converged_at = 7
//! k,error,bound,energy_T,mass_T,wall_seconds
//! 0,0.0123,0.0123,...
//! ```
//!
//! `# key = value` lines hold the resolved [`RunConfig`]; `#> key = value`
//! lines are run results that do not feed back into a re-run.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::config::RunConfig;
use crate::error::{CliError, Result};

pub const COLUMNS: [&str; 6] = ["k", "error", "bound", "energy_T", "mass_T", "wall_seconds"];

const TITLE: &str = "ch-parareal trace";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub k: usize,
    pub error: f64,
    pub bound: Option<f64>,
    pub energy: f64,
    pub mass: f64,
    pub wall_seconds: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceFile {
    pub config: RunConfig,
    /// Run results, in header order.
    pub summary: Vec<(String, String)>,
    pub rows: Vec<TraceRow>,
}

impl TraceFile {
    pub fn errors(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.error).collect()
    }

    pub fn summary_value(&self, key: &str) -> Option<&str> {
        self.summary.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn write<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "# {TITLE}")?;
        for (key, value) in self.config.to_pairs() {
            writeln!(w, "# {key} = {value}")?;
        }
        for (key, value) in &self.summary {
            writeln!(w, "#> {key} = {value}")?;
        }
        let mut csv = csv::Writer::from_writer(w);
        csv.write_record(COLUMNS)?;
        for r in &self.rows {
            csv.write_record([
                r.k.to_string(),
                format_f64(r.error),
                r.bound.map(format_f64).unwrap_or_default(),
                format_f64(r.energy),
                format_f64(r.mass),
                format_f64(r.wall_seconds),
            ])?;
        }
        csv.flush()?;
        Ok(())
    }

    pub fn read<R: BufRead>(mut r: R) -> Result<TraceFile> {
        let mut config_pairs = Vec::new();
        let mut summary = Vec::new();
        let mut line = String::new();
        loop {
            line.clear();
            if r.read_line(&mut line)? == 0 {
                return Err(CliError::Trace("no column header line".into()));
            }
            let text = line.trim_end();
            if let Some(rest) = text.strip_prefix("#>") {
                summary.push(split_pair(rest)?);
            } else if let Some(rest) = text.strip_prefix('#') {
                if rest.trim() != TITLE {
                    config_pairs.push(split_pair(rest)?);
                }
            } else {
                if text != COLUMNS.join(",") {
                    return Err(CliError::Trace(format!("unexpected column header `{text}`")));
                }
                break;
            }
        }
        let config = RunConfig::from_pairs(config_pairs.iter().map(|(k, v)| (k.as_str(), v.as_str())))?;

        let mut csv = csv::ReaderBuilder::new().has_headers(false).from_reader(r);
        let mut rows = Vec::new();
        for record in csv.records() {
            let record = record?;
            if record.len() != COLUMNS.len() {
                return Err(CliError::Trace(format!(
                    "expected {} fields, got {}",
                    COLUMNS.len(),
                    record.len()
                )));
            }
            let num = |i: usize| -> Result<f64> {
                record[i]
                    .parse()
                    .map_err(|_| CliError::Trace(format!("`{}` in column {} is not a number", &record[i], COLUMNS[i])))
            };
            rows.push(TraceRow {
                k: record[0]
                    .parse()
                    .map_err(|_| CliError::Trace(format!("`{}` is not an iteration index", &record[0])))?,
                error: num(1)?,
                bound: if record[2].is_empty() { None } else { Some(num(2)?) },
                energy: num(3)?,
                mass: num(4)?,
                wall_seconds: num(5)?,
            });
        }
        Ok(TraceFile { config, summary, rows })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir)?;
        }
        let mut w = BufWriter::new(File::create(path)?);
        self.write(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<TraceFile> {
        TraceFile::read(BufReader::new(File::open(path)?))
    }
}

/// Shortest text that parses back to the same `f64`, in exponent form for
/// very small or large magnitudes.
pub fn format_f64(x: f64) -> String {
    let a = x.abs();
    if a != 0.0 && !(1e-3..1e7).contains(&a) {
        format!("{x:e}")
    } else {
        x.to_string()
    }
}

fn split_pair(text: &str) -> Result<(String, String)> {
    let (k, v) = text
        .split_once('=')
        .ok_or_else(|| CliError::Trace(format!("header line `#{text}` is not `key = value`")))?;
    Ok((k.trim().to_owned(), v.trim().to_owned()))
}
