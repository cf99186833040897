//! CSV and JSON serialization of scaling results, with matching readers.

use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::fit::LogLogFit;
use super::harness::{ComponentFit, ScalingResult, ScalingRow};
use crate::error::{Error, Result};

pub const CSV_HEADER: [&str; 13] = [
    "task",
    "method",
    "target",
    "alpha",
    "N",
    "repetitions",
    "mean_infidelity",
    "std_infidelity",
    "mean_infidelity_dp",
    "mean_mse",
    "mean_tail_eigensum",
    "gm_bound",
    "excluded_trials",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
    Both,
}

impl std::str::FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            "both" => Ok(OutputFormat::Both),
            other => Err(Error::Config(format!("unknown format `{other}`"))),
        }
    }
}

/// 17 significant digits, enough to round-trip any `f64`.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// One CSV line as read back.
#[derive(Clone, Debug, PartialEq)]
pub struct CsvRow {
    pub task: String,
    pub method: String,
    pub target: String,
    pub alpha: f64,
    pub n: u64,
    pub repetitions: usize,
    pub mean_infidelity: f64,
    pub std_infidelity: f64,
    pub mean_infidelity_dp: f64,
    pub mean_mse: f64,
    pub mean_tail_eigensum: f64,
    pub gm_bound: Option<f64>,
    pub excluded_trials: usize,
}

impl CsvRow {
    pub fn from_result(result: &ScalingResult) -> Vec<CsvRow> {
        let c = &result.config;
        result
            .rows
            .iter()
            .map(|r| CsvRow {
                task: c.task.as_str().to_string(),
                method: c.method.as_str().to_string(),
                target: c.target.clone(),
                alpha: c.alpha,
                n: r.n,
                repetitions: c.repetitions,
                mean_infidelity: r.mean_infidelity,
                std_infidelity: r.std_infidelity,
                mean_infidelity_dp: r.mean_infidelity_dp,
                mean_mse: r.mean_mse,
                mean_tail_eigensum: r.mean_tail_eigensum,
                gm_bound: r.gm_bound,
                excluded_trials: r.excluded_trials,
            })
            .collect()
    }

    fn fields(&self) -> Vec<String> {
        vec![
            self.task.clone(),
            self.method.clone(),
            self.target.clone(),
            format_float(self.alpha),
            self.n.to_string(),
            self.repetitions.to_string(),
            format_float(self.mean_infidelity),
            format_float(self.std_infidelity),
            format_float(self.mean_infidelity_dp),
            format_float(self.mean_mse),
            format_float(self.mean_tail_eigensum),
            self.gm_bound.map(format_float).unwrap_or_default(),
            self.excluded_trials.to_string(),
        ]
    }
}

pub fn write_csv<W: Write>(result: &ScalingResult, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let err = |e: csv::Error| Error::Format(e.to_string());
    w.write_record(CSV_HEADER).map_err(err)?;
    for row in CsvRow::from_result(result) {
        w.write_record(row.fields()).map_err(err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn csv_string(result: &ScalingResult) -> Result<String> {
    let mut buf = Vec::new();
    write_csv(result, &mut buf)?;
    String::from_utf8(buf).map_err(|e| Error::Format(e.to_string()))
}

fn parse<T: std::str::FromStr>(field: &str, column: &str) -> Result<T> {
    field
        .parse()
        .map_err(|_| Error::Format(format!("bad value `{field}` in column {column}")))
}

pub fn read_csv<R: Read>(input: R) -> Result<Vec<CsvRow>> {
    let mut r = csv::Reader::from_reader(input);
    let header = r.headers().map_err(|e| Error::Format(e.to_string()))?;
    if header.iter().ne(CSV_HEADER.iter().copied()) {
        return Err(Error::Format(format!(
            "unexpected header `{}`",
            header.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| Error::Format(e.to_string()))?;
        let f = |i: usize| &rec[i];
        rows.push(CsvRow {
            task: f(0).to_string(),
            method: f(1).to_string(),
            target: f(2).to_string(),
            alpha: parse(f(3), CSV_HEADER[3])?,
            n: parse(f(4), CSV_HEADER[4])?,
            repetitions: parse(f(5), CSV_HEADER[5])?,
            mean_infidelity: parse(f(6), CSV_HEADER[6])?,
            std_infidelity: parse(f(7), CSV_HEADER[7])?,
            mean_infidelity_dp: parse(f(8), CSV_HEADER[8])?,
            mean_mse: parse(f(9), CSV_HEADER[9])?,
            mean_tail_eigensum: parse(f(10), CSV_HEADER[10])?,
            gm_bound: if f(11).is_empty() {
                None
            } else {
                Some(parse(f(11), CSV_HEADER[11])?)
            },
            excluded_trials: parse(f(12), CSV_HEADER[12])?,
        });
    }
    Ok(rows)
}

/// JSON document: the rows plus fit, configuration and provenance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JsonReport {
    pub version: String,
    pub seed: u64,
    pub config: ExperimentConfig,
    pub dim: usize,
    pub slope: Option<f64>,
    pub intercept: Option<f64>,
    pub r2: Option<f64>,
    pub rows: Vec<ScalingRow>,
    pub component_names: Vec<String>,
    pub component_fits: Vec<ComponentFit>,
}

impl JsonReport {
    pub fn from_result(result: &ScalingResult) -> Self {
        JsonReport {
            version: result.version.clone(),
            seed: result.config.seed,
            config: result.config.clone(),
            dim: result.dim,
            slope: result.fit.map(|f| f.slope),
            intercept: result.fit.map(|f| f.intercept),
            r2: result.fit.map(|f| f.r2),
            rows: result.rows.clone(),
            component_names: result.component_names.clone(),
            component_fits: result.component_fits.clone(),
        }
    }

    pub fn into_result(self) -> ScalingResult {
        let fit = match (self.slope, self.intercept, self.r2) {
            (Some(slope), Some(intercept), Some(r2)) => Some(LogLogFit {
                slope,
                intercept,
                r2,
            }),
            _ => None,
        };
        ScalingResult {
            config: self.config,
            dim: self.dim,
            component_names: self.component_names,
            rows: self.rows,
            fit,
            component_fits: self.component_fits,
            version: self.version,
        }
    }
}

pub fn write_json<W: Write>(result: &ScalingResult, out: W) -> Result<()> {
    serde_json::to_writer_pretty(out, &JsonReport::from_result(result))
        .map_err(|e| Error::Format(e.to_string()))
}

pub fn read_json<R: Read>(input: R) -> Result<JsonReport> {
    serde_json::from_reader(input).map_err(|e| Error::Format(e.to_string()))
}

/// Writes to `path` (with `.csv`/`.json` extensions when both formats are
/// requested) and returns the files written.
pub fn emit_results(
    result: &ScalingResult,
    path: &Path,
    format: OutputFormat,
) -> Result<Vec<PathBuf>> {
    let targets: Vec<(PathBuf, bool)> = match format {
        OutputFormat::Csv => vec![(path.to_path_buf(), true)],
        OutputFormat::Json => vec![(path.to_path_buf(), false)],
        OutputFormat::Both => vec![
            (path.with_extension("csv"), true),
            (path.with_extension("json"), false),
        ],
    };
    for (p, is_csv) in &targets {
        let file = std::io::BufWriter::new(std::fs::File::create(p)?);
        if *is_csv {
            write_csv(result, file)?;
        } else {
            write_json(result, file)?;
        }
    }
    Ok(targets.into_iter().map(|(p, _)| p).collect())
}
