use std::fmt::Write as _;
use std::fs;
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::sweep::{SweepPoint, SweepResult};
use crate::error::{Error, Result};

pub const JSON_SCHEMA: &str = "v2rdm-sweep/1";

/// Column order of the CSV tables.
pub const CSV_COLUMNS: [&str; 13] =
    ["t", "U", "V", "u_over_v", "L", "level", "energy_sdp", "energy_ref", "error", "gap", "iters", "wall_ms", "status"];

#[derive(Serialize)]
struct JsonOut<'a> {
    schema: &'static str,
    #[serde(flatten)]
    point: &'a SweepPoint,
}

#[derive(Deserialize)]
struct JsonIn {
    schema: String,
    #[serde(flatten)]
    point: SweepPoint,
}

/// Writes `path` through a sibling temporary file and a rename, so readers
/// never observe a half-written table.
pub fn write_atomic(path: &Path, fill: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(dir)?;
    let name = path.file_name().ok_or_else(|| Error::Config(format!("{} is not a file path", path.display())))?;
    let tmp = dir.join(format!(".{}.{}.tmp", name.to_string_lossy(), std::process::id()));
    let written = (|| {
        let mut w = BufWriter::new(fs::File::create(&tmp)?);
        fill(&mut w)?;
        w.into_inner().map_err(|e| e.into_error())?.sync_all()?;
        Ok(())
    })();
    if let Err(e) = written {
        let _ = fs::remove_file(&tmp);
        return Err(e);
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

pub fn write_csv<W: Write>(points: &[SweepPoint], out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    // Written by hand so an empty table still carries its header.
    w.write_record(CSV_COLUMNS)?;
    for p in points {
        w.serialize(p)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<R: Read>(input: R) -> Result<Vec<SweepPoint>> {
    let mut r = csv::Reader::from_reader(input);
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    if header != CSV_COLUMNS {
        return Err(Error::Config(format!("unexpected CSV header {header:?}")));
    }
    Ok(r.deserialize().collect::<std::result::Result<_, _>>()?)
}

pub fn write_json<W: Write>(points: &[SweepPoint], out: W) -> Result<()> {
    let records: Vec<JsonOut> = points.iter().map(|point| JsonOut { schema: JSON_SCHEMA, point }).collect();
    serde_json::to_writer_pretty(out, &records)?;
    Ok(())
}

pub fn read_json<R: Read>(input: R) -> Result<Vec<SweepPoint>> {
    let records: Vec<JsonIn> = serde_json::from_reader(input)?;
    records
        .into_iter()
        .map(|r| {
            if r.schema != JSON_SCHEMA {
                return Err(Error::Config(format!("unsupported schema '{}'", r.schema)));
            }
            Ok(r.point)
        })
        .collect()
}

/// Paths written by [`emit_results`].
#[derive(Debug, Clone, PartialEq)]
pub struct Emitted {
    pub csv: PathBuf,
    pub json: PathBuf,
    pub summary: String,
}

/// Writes `<dir>/<stem>.csv` and `<dir>/<stem>.json` and renders a summary.
pub fn emit_results(result: &SweepResult, dir: &Path, stem: &str) -> Result<Emitted> {
    let csv = dir.join(format!("{stem}.csv"));
    let json = dir.join(format!("{stem}.json"));
    write_atomic(&csv, |w| write_csv(&result.points, w))?;
    write_atomic(&json, |w| write_json(&result.points, w))?;
    Ok(Emitted { csv, json, summary: summary(stem, result) })
}

/// Point counts by status followed by one line per failure.
pub fn summary(stem: &str, result: &SweepResult) -> String {
    let count = |s: &str| result.points.iter().filter(|p| p.status_str() == s).count();
    let mut out = format!(
        "{stem}: {} points, {} converged, {} maxiter, {} flagged\n",
        result.points.len(),
        count("converged"),
        count("maxiter"),
        count("flagged"),
    );
    for p in result.unconverged() {
        let _ = writeln!(
            out,
            "  not converged: L={} {} V={} U/V={} after {} iterations",
            p.sites, p.level, p.v, p.u_over_v, p.iters
        );
    }
    for f in &result.failures {
        let _ = writeln!(out, "  FAILED {f}");
    }
    out
}

/// Process exit status for a finished sweep: 1 when any check failed.
pub fn exit_code(result: &SweepResult) -> i32 {
    i32::from(!result.failures.is_empty())
}

impl SweepPoint {
    pub fn status_str(&self) -> &'static str {
        match self.status {
            super::sweep::PointStatus::Converged => "converged",
            super::sweep::PointStatus::Maxiter => "maxiter",
            super::sweep::PointStatus::Flagged => "flagged",
        }
    }
}
