//! CSV and JSON result files.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::ResultRecord;
use crate::error::{Error, Result};

pub const CSV_HEADER: &str = "config_hash,q,shots,failures,rate,ci_low,ci_high,seconds";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

/// One CSV line.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CsvRow {
    pub config_hash: String,
    pub q: f64,
    pub shots: usize,
    pub failures: usize,
    pub rate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub seconds: f64,
}

impl From<&ResultRecord> for CsvRow {
    fn from(r: &ResultRecord) -> Self {
        Self {
            config_hash: r.config_hash.clone(),
            q: r.q,
            shots: r.shots,
            failures: r.failures,
            rate: r.rate,
            ci_low: r.ci_low,
            ci_high: r.ci_high,
            seconds: r.seconds,
        }
    }
}

fn csv_error(e: csv::Error) -> Error {
    Error::InvalidConfig(format!("csv: {e}"))
}

/// CSV text of the completed records. Failed points appear only in JSON.
pub fn to_csv_string(records: &[ResultRecord]) -> Result<String> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    for r in records.iter().filter(|r| r.completed()) {
        w.serialize(CsvRow::from(r)).map_err(csv_error)?;
    }
    let body = String::from_utf8(w.into_inner().map_err(|e| csv_error(e.into_error().into()))?)
        .expect("csv output is utf-8");
    Ok(format!("{CSV_HEADER}\n{body}"))
}

pub fn parse_csv(text: &str) -> Result<Vec<CsvRow>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header = r.headers().map_err(csv_error)?.iter().collect::<Vec<_>>().join(",");
    if header != CSV_HEADER {
        return Err(Error::Parse {
            line: 1,
            msg: format!("unexpected header `{header}`"),
        });
    }
    r.deserialize().collect::<std::result::Result<_, _>>().map_err(csv_error)
}

fn write(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(format!("creating {}", dir.display()), e))?;
    }
    std::fs::write(path, text).map_err(|e| Error::io(format!("writing {}", path.display()), e))
}

/// Writes `records` to `path` in `format`.
pub fn emit_results(records: &[ResultRecord], path: &Path, format: OutputFormat) -> Result<()> {
    let text = match format {
        OutputFormat::Csv => to_csv_string(records)?,
        OutputFormat::Json => serde_json::to_string_pretty(records).expect("records serialise") + "\n",
    };
    write(path, &text)
}

/// Writes one CSV per `(code, experiment)` group into `dir`, named
/// `<code>_<experiment>.csv`, and returns the paths in name order.
pub fn emit_grouped(records: &[ResultRecord], dir: &Path) -> Result<Vec<PathBuf>> {
    let mut groups: BTreeMap<String, Vec<ResultRecord>> = BTreeMap::new();
    for r in records {
        groups.entry(format!("{}_{}", r.code, r.experiment)).or_default().push(r.clone());
    }
    groups
        .into_iter()
        .map(|(name, recs)| {
            let path = dir.join(format!("{name}.csv"));
            emit_results(&recs, &path, OutputFormat::Csv)?;
            Ok(path)
        })
        .collect()
}
