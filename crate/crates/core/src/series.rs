//! Numeric series behind the analyst plots: the trimmed Hill diagnostic plot,
//! classic/trimmed/biased Hill plots and the Pareto quantile plot.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::{biased_hill, check_k, classic_hill, trimmed_hill};
use crate::sample::Sample;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
    /// `(x, low, high)` on the same x-grid as `points`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub band: Option<Vec<(f64, f64, f64)>>,
}

impl Series {
    pub fn ys(&self) -> impl Iterator<Item = f64> + '_ {
        self.points.iter().map(|p| p.1)
    }
}

/// Trimmed Hill estimate against `k0 = 0..k-1` at fixed `k`, with a band of
/// one plug-in standard error either side.
pub fn diagnostic_series(s: &Sample, k: usize) -> Result<Series> {
    check_k(s, k, 2)?;
    let mut points = Vec::with_capacity(k);
    let mut band = Vec::with_capacity(k);
    for k0 in 0..k {
        let e = trimmed_hill(s, k0, k)?;
        let x = k0 as f64;
        points.push((x, e.xi_hat));
        band.push((x, e.xi_hat - e.se, e.xi_hat + e.se));
    }
    Ok(Series {
        label: format!("trimmed Hill diagnostic (k={k})"),
        points,
        band: Some(band),
    })
}

/// Classic, trimmed and biased Hill plots over `k_min..=k_max`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HillSeries {
    pub classic: Series,
    pub trimmed: Series,
    pub biased: Series,
}

pub fn hill_series(s: &Sample, k0: usize, k_min: usize, k_max: usize) -> Result<HillSeries> {
    if k_min > k_max {
        return Err(Error::Domain(format!(
            "k_min = {k_min} exceeds k_max = {k_max}"
        )));
    }
    check_k(s, k_max, 1)?;
    if k0 >= k_min {
        return Err(Error::K0OutOfRange { k0, k: k_min });
    }
    let mut classic = Vec::new();
    let mut trimmed = Vec::new();
    let mut biased = Vec::new();
    for k in k_min..=k_max {
        let x = k as f64;
        classic.push((x, classic_hill(s, k)?.xi_hat));
        trimmed.push((x, trimmed_hill(s, k0, k)?.xi_hat));
        biased.push((x, biased_hill(s, k0, k)?.xi_hat));
    }
    let series = |label: String, points| Series {
        label,
        points,
        band: None,
    };
    Ok(HillSeries {
        classic: series("classic Hill".into(), classic),
        trimmed: series(format!("trimmed Hill (k0={k0})"), trimmed),
        biased: series(format!("biased Hill (k0={k0})"), biased),
    })
}

/// Pareto quantile plot: `(-log(i / (n + 1)), log X_(n-i+1,n))` for `i = n..=1`,
/// so x increases along the series.
pub fn pareto_qq_series(s: &Sample) -> Series {
    let n = s.len();
    let denom = (n + 1) as f64;
    let points = (1..=n)
        .rev()
        .map(|i| (-(i as f64 / denom).ln(), s.logs()[i - 1]))
        .collect();
    Series {
        label: "Pareto quantile plot".into(),
        points,
        band: None,
    }
}
