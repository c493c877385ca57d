//! CSV ingestion with tie handling.

use std::io::Read;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sample::Sample;

/// Default dithering amplitude.
pub const DEFAULT_DITHER_EPSILON: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ColumnSelector {
    /// First column whose first data cell is numeric.
    #[default]
    Auto,
    Name(String),
    /// Zero-based column index.
    Index(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HeaderMode {
    /// The first row is a header when it contains a non-numeric cell.
    #[default]
    Auto,
    Yes,
    No,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "policy", rename_all = "snake_case")]
pub enum TiePolicy {
    None,
    /// Keep one copy of each exactly repeated value.
    #[default]
    Unique,
    /// Add i.i.d. U(0, epsilon) noise to every value.
    Dither {
        epsilon: f64,
        seed: u64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IngestOptions {
    pub column: ColumnSelector,
    pub header: HeaderMode,
    pub tie_policy: TiePolicy,
    pub delimiter: u8,
}

impl Default for IngestOptions {
    fn default() -> Self {
        Self {
            column: ColumnSelector::Auto,
            header: HeaderMode::Auto,
            tie_policy: TiePolicy::Unique,
            delimiter: b',',
        }
    }
}

fn parse_cell(cell: &str) -> Option<f64> {
    cell.trim().parse::<f64>().ok()
}

/// Reads one numeric column from delimited text and builds a [`Sample`].
pub fn ingest_csv<R: Read>(input: R, opts: &IngestOptions) -> Result<Sample> {
    if let TiePolicy::Dither { epsilon, .. } = opts.tie_policy {
        if !(epsilon.is_finite() && epsilon > 0.0) {
            return Err(Error::Domain(format!(
                "dither epsilon {epsilon} must be > 0"
            )));
        }
    }
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .delimiter(opts.delimiter)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(input);
    let mut rows = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| Error::Parse {
            row: e.position().map_or(i + 1, |p| p.line() as usize),
            column: "-".into(),
            message: e.to_string(),
        })?;
        if rec.iter().all(|c| c.is_empty()) {
            continue;
        }
        rows.push((i + 1, rec));
    }
    let Some((_, first)) = rows.first() else {
        return Err(Error::EmptyColumn);
    };

    let has_header = match opts.header {
        HeaderMode::Yes => true,
        HeaderMode::No => false,
        HeaderMode::Auto => match &opts.column {
            ColumnSelector::Name(_) => true,
            ColumnSelector::Index(c) => first.get(*c).is_some_and(|v| parse_cell(v).is_none()),
            ColumnSelector::Auto => first.iter().any(|v| parse_cell(v).is_none()),
        },
    };
    let header = has_header.then(|| first.clone());
    let data = if has_header { &rows[1..] } else { &rows[..] };

    let column = match &opts.column {
        ColumnSelector::Index(c) => *c,
        ColumnSelector::Name(name) => header
            .as_ref()
            .and_then(|h| h.iter().position(|c| c == name))
            .ok_or_else(|| Error::Parse {
                row: 1,
                column: name.clone(),
                message: "no such column in header".into(),
            })?,
        ColumnSelector::Auto => match data.first() {
            Some((_, rec)) => rec
                .iter()
                .position(|v| parse_cell(v).is_some())
                .ok_or_else(|| Error::Parse {
                    row: data[0].0,
                    column: "-".into(),
                    message: "no numeric column found".into(),
                })?,
            None => return Err(Error::EmptyColumn),
        },
    };
    let column_label = header
        .as_ref()
        .and_then(|h| h.get(column))
        .map_or_else(|| column.to_string(), |h| format!("{column} ({h})"));

    let mut values = Vec::with_capacity(data.len());
    for (row, rec) in data {
        let cell = rec.get(column).ok_or_else(|| Error::Parse {
            row: *row,
            column: column_label.clone(),
            message: "missing field".into(),
        })?;
        let v = parse_cell(cell).ok_or_else(|| Error::Parse {
            row: *row,
            column: column_label.clone(),
            message: format!("'{cell}' is not a number"),
        })?;
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::NonPositiveValue {
                index: *row,
                value: v,
            });
        }
        values.push(v);
    }
    if values.is_empty() {
        return Err(Error::EmptyColumn);
    }

    match opts.tie_policy {
        TiePolicy::None => {}
        TiePolicy::Unique => {
            values.sort_by(|a, b| b.total_cmp(a));
            values.dedup();
        }
        TiePolicy::Dither { epsilon, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for v in &mut values {
                *v += epsilon * rng.random::<f64>();
            }
        }
    }
    Sample::new(values)
}
