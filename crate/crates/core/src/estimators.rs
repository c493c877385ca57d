//! Hill-family point estimators over the top order statistics of a [`Sample`].
//!
//! With `L_i = log X_(n-i+1,n)` (so `L_1` is the log maximum) and base
//! `L_{k+1} = log X_(n-k,n)`, for `0 <= k0 < k <= n-1`:
//!
//! * trimmed: `(k0 (L_{k0+1} - L_{k+1}) + sum_{i=k0+1}^{k} (L_i - L_{k+1})) / (k - k0)`
//! * biased:  `sum_{i=k0+1}^{k} (L_i - L_{k+1}) / (k - k0)`
//! * classic: the trimmed estimator at `k0 = 0`.
//!
//! The trimmed estimator is the minimum variance linear unbiased estimator of
//! the tail index among statistics that ignore the top `k0` order statistics.
//! Under Pareto data `(k - k0) xi_hat / xi` is exactly Gamma(k - k0, 1), which
//! gives the plug-in standard error `xi_hat / sqrt(k - k0)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sample::Sample;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimatorKind {
    Classic,
    Trimmed,
    Biased,
}

/// Output of any Hill-family estimator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailEstimate {
    pub kind: EstimatorKind,
    pub k0: usize,
    pub k: usize,
    pub xi_hat: f64,
    pub se: f64,
}

impl TailEstimate {
    fn new(kind: EstimatorKind, k0: usize, k: usize, xi_hat: f64) -> Self {
        Self {
            kind,
            k0,
            k,
            xi_hat,
            se: xi_hat / ((k - k0) as f64).sqrt(),
        }
    }
}

pub(crate) fn check_k(s: &Sample, k: usize, min: usize) -> Result<()> {
    if k < min || k >= s.len() {
        return Err(Error::KOutOfRange { k, n: s.len(), min });
    }
    Ok(())
}

fn check_k0(k0: usize, k: usize) -> Result<()> {
    if k0 >= k {
        return Err(Error::K0OutOfRange { k0, k });
    }
    Ok(())
}

/// Sum of `L_i - L_{k+1}` for `i = k0+1..=k`, accumulated from the bottom
/// (`i = k`) upwards. [`crate::selection::ratio_statistics`] accumulates in
/// the same order so both paths agree to the last bit.
pub(crate) fn spacing_sum(logs: &[f64], k0: usize, k: usize) -> f64 {
    let base = logs[k];
    logs[k0..k]
        .iter()
        .rev()
        .fold(0.0, |acc, &l| acc + (l - base))
}

/// `(k - k0)` times the trimmed estimate.
pub(crate) fn trimmed_numerator(logs: &[f64], k0: usize, k: usize, spacing: f64) -> f64 {
    k0 as f64 * (logs[k0] - logs[k]) + spacing
}

pub fn classic_hill(s: &Sample, k: usize) -> Result<TailEstimate> {
    check_k(s, k, 1)?;
    let logs = s.logs();
    let num = trimmed_numerator(logs, 0, k, spacing_sum(logs, 0, k));
    Ok(TailEstimate::new(
        EstimatorKind::Classic,
        0,
        k,
        num / k as f64,
    ))
}

pub fn trimmed_hill(s: &Sample, k0: usize, k: usize) -> Result<TailEstimate> {
    check_k(s, k, 1)?;
    check_k0(k0, k)?;
    let logs = s.logs();
    let num = trimmed_numerator(logs, k0, k, spacing_sum(logs, k0, k));
    Ok(TailEstimate::new(
        EstimatorKind::Trimmed,
        k0,
        k,
        num / (k - k0) as f64,
    ))
}

/// Classic Hill applied to ranks `k0+1..=k` with no correction for the
/// discarded top block. Always at or below [`trimmed_hill`].
pub fn biased_hill(s: &Sample, k0: usize, k: usize) -> Result<TailEstimate> {
    check_k(s, k, 1)?;
    check_k0(k0, k)?;
    let spacing = spacing_sum(s.logs(), k0, k);
    Ok(TailEstimate::new(
        EstimatorKind::Biased,
        k0,
        k,
        spacing / (k - k0) as f64,
    ))
}
