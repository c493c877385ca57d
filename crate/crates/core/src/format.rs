//! Stable JSON and CSV documents emitted by the CLI and the HTTP service.
//!
//! Floats are written by serde_json in shortest round-trip form, so parsing a
//! document and emitting it again reproduces the same bytes.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::TailEstimate;
use crate::montecarlo::McReport;
use crate::selection::{DetectionResult, UTest};
use crate::series::Series;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionDoc {
    pub k0_hat: usize,
    pub rejection_index: Option<usize>,
    pub tests: Vec<UTest>,
}

impl From<&DetectionResult> for DetectionDoc {
    fn from(d: &DetectionResult) -> Self {
        Self {
            k0_hat: d.k0_hat,
            rejection_index: d.rejection_index,
            tests: d.u_tested.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateDoc {
    pub tail_estimate: TailEstimate,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detection: Option<DetectionDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectDoc {
    pub detection: DetectionDoc,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesDoc {
    pub series: Series,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McReportDoc {
    pub mc_report: McReport,
}

pub fn to_json<T: Serialize>(doc: &T) -> String {
    let mut s = serde_json::to_string_pretty(doc).expect("documents serialise");
    s.push('\n');
    s
}

fn csv_error(e: impl std::fmt::Display) -> Error {
    Error::Config(format!("csv output: {e}"))
}

fn finish(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w.into_inner().map_err(csv_error)?;
    String::from_utf8(bytes).map_err(csv_error)
}

/// Columns `x,y` or `x,y,lo,hi` when the series carries a band.
pub fn series_csv(series: &Series) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    match &series.band {
        Some(band) => {
            w.write_record(["x", "y", "lo", "hi"]).map_err(csv_error)?;
            for ((x, y), (_, lo, hi)) in series.points.iter().zip(band) {
                w.serialize((x, y, lo, hi)).map_err(csv_error)?;
            }
        }
        None => {
            w.write_record(["x", "y"]).map_err(csv_error)?;
            for p in &series.points {
                w.serialize(p).map_err(csv_error)?;
            }
        }
    }
    finish(w)
}

/// Several band-free series in long form, columns `series,x,y`.
pub fn multi_series_csv(series: &[(&str, &Series)]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["series", "x", "y"]).map_err(csv_error)?;
    for (name, s) in series {
        for (x, y) in &s.points {
            w.serialize((name, x, y)).map_err(csv_error)?;
        }
    }
    finish(w)
}

pub fn estimate_csv(e: &TailEstimate, detection: Option<&DetectionDoc>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.serialize(EstimateRow {
        kind: e.kind,
        k0: e.k0,
        k: e.k,
        xi_hat: e.xi_hat,
        se: e.se,
        k0_hat: detection.map(|d| d.k0_hat),
    })
    .map_err(csv_error)?;
    finish(w)
}

#[derive(Serialize)]
struct EstimateRow {
    kind: crate::estimators::EstimatorKind,
    k0: usize,
    k: usize,
    xi_hat: f64,
    se: f64,
    k0_hat: Option<usize>,
}

pub fn detection_csv(d: &DetectionDoc) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for t in &d.tests {
        w.serialize(t).map_err(csv_error)?;
    }
    if d.tests.is_empty() {
        w.write_record(["j", "u", "threshold", "rejected"])
            .map_err(csv_error)?;
    }
    finish(w)
}

/// One row per record; statistics that do not apply to an estimator are empty cells.
pub fn mc_report_csv(report: &McReport) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "estimator",
        "k0",
        "k",
        "rmse",
        "bias",
        "k0_mean",
        "k0_sd",
        "type1_rate",
        "k0_true_mean",
        "k0_hit_rate",
    ])
    .map_err(csv_error)?;
    fn cell<T: ToString>(v: Option<T>) -> String {
        v.map(|v| v.to_string()).unwrap_or_default()
    }
    for r in &report.records {
        w.write_record([
            r.estimator.clone(),
            cell(r.k0),
            r.k.to_string(),
            r.rmse.to_string(),
            r.bias.to_string(),
            cell(r.k0_mean),
            cell(r.k0_sd),
            cell(r.type1_rate),
            cell(r.k0_true_mean),
            cell(r.k0_hit_rate),
        ])
        .map_err(csv_error)?;
    }
    finish(w)
}
