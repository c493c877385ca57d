//! Automatic choice of the trimming parameter k0.
//!
//! Under Pareto data the ratios of consecutive trimmed Hill estimates
//!
//! ```text
//! T_j = (k - j - 1) xi_hat(j + 1, k) / ((k - j) xi_hat(j, k)),   j = 0..=k-2
//! ```
//!
//! are independent Beta(k - j - 1, 1), so `U_j = 2 |T_j^(k-j-1) - 1/2|` are
//! i.i.d. U(0, 1). Outliers confined to the top `k0` order statistics only
//! disturb `T_j` for `j < k0`. The weighted sequential test scans `j` from
//! `k - 2` down to 0 and stops at the first `U_j >= 1 - alpha_j`, returning
//! `k0_hat = j + 1`. The levels satisfy `prod (1 - alpha_j) = 1 - q`, so on
//! clean Pareto data `P(k0_hat > 0) = q` exactly.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::{check_k, trimmed_hill, trimmed_numerator, TailEstimate};
use crate::sample::Sample;

pub const DEFAULT_LEVEL: f64 = 0.05;
pub const DEFAULT_WEIGHT: f64 = 1.2;

/// Ratio statistics `T_j` and their uniformised versions `U_j` for `j = 0..=k-2`.
#[derive(Debug, Clone, PartialEq)]
pub struct RatioSeries {
    pub k: usize,
    pub t_values: Vec<f64>,
    pub u_values: Vec<f64>,
}

pub fn ratio_statistics(s: &Sample, k: usize) -> Result<RatioSeries> {
    check_k(s, k, 2)?;
    let logs = s.logs();
    let base = logs[k];

    // numerators[j] = (k - j) * trimmed_hill(j, k), suffix sums taken bottom-up
    // so that numerators[j] only reads logs[j..=k].
    let mut numerators = vec![0.0; k];
    let mut spacing = 0.0;
    for j in (0..k).rev() {
        spacing += logs[j] - base;
        numerators[j] = trimmed_numerator(logs, j, k, spacing);
    }
    if let Some(j) = numerators.iter().position(|&a| a <= 0.0) {
        return Err(Error::DegenerateEstimate { k0: j, k });
    }

    let t_values: Vec<f64> = (0..k - 1)
        .map(|j| numerators[j + 1] / numerators[j])
        .collect();
    let u_values = t_values
        .iter()
        .enumerate()
        .map(|(j, &t)| {
            let power = (k - j - 1) as f64;
            2.0 * ((power * t.ln()).exp() - 0.5).abs()
        })
        .collect();
    Ok(RatioSeries {
        k,
        t_values,
        u_values,
    })
}

/// Per-index test levels `alpha_j = 1 - (1 - q)^{w_j}`, `j = 0..=k-2`, with
/// geometric weights `w_j ∝ a^{k-j-1}` summing to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlphaSchedule {
    pub k: usize,
    pub q: f64,
    pub a: f64,
    pub alphas: Vec<f64>,
}

impl AlphaSchedule {
    /// Rejection threshold `1 - alpha_j` for `U_j`.
    pub fn threshold(&self, j: usize) -> f64 {
        1.0 - self.alphas[j]
    }
}

pub fn alpha_schedule(k: usize, q: f64, a: f64) -> Result<AlphaSchedule> {
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::InvalidLevel(q));
    }
    if !(a.is_finite() && a > 1.0) {
        return Err(Error::InvalidWeight(a));
    }
    if k < 2 {
        return Err(Error::Domain(format!(
            "alpha schedule needs k >= 2, got {k}"
        )));
    }
    // w_j = a^{k-j-1} / sum_{m=1}^{k-1} a^m = a^{-(j+1)} (a - 1) / (1 - a^{-(k-1)})
    let ln_a = a.ln();
    let log_norm = (a - 1.0).ln() - (-(-((k - 1) as f64) * ln_a).exp_m1()).ln();
    let log_keep = (-q).ln_1p();
    let alphas = (0..k - 1)
        .map(|j| {
            let w = (log_norm - (j + 1) as f64 * ln_a).exp();
            -(w * log_keep).exp_m1()
        })
        .collect();
    Ok(AlphaSchedule { k, q, a, alphas })
}

/// One visited index of the sequential scan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UTest {
    pub j: usize,
    pub u: f64,
    pub threshold: f64,
    pub rejected: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DetectionResult {
    pub k0_hat: usize,
    /// First index (scanning downward) whose `U_j` reached its threshold.
    pub rejection_index: Option<usize>,
    /// Visited indices in scan order, `k - 2` first.
    pub u_tested: Vec<UTest>,
    pub schedule: AlphaSchedule,
}

pub fn select_k0(r: &RatioSeries, sched: &AlphaSchedule) -> Result<DetectionResult> {
    if r.k != sched.k {
        return Err(Error::MismatchedK {
            series: r.k,
            schedule: sched.k,
        });
    }
    let mut u_tested = Vec::new();
    let mut rejection_index = None;
    for j in (0..r.k - 1).rev() {
        let u = r.u_values[j];
        let threshold = sched.threshold(j);
        let rejected = u >= threshold;
        u_tested.push(UTest {
            j,
            u,
            threshold,
            rejected,
        });
        if rejected {
            rejection_index = Some(j);
            break;
        }
    }
    Ok(DetectionResult {
        k0_hat: rejection_index.map_or(0, |j| j + 1),
        rejection_index,
        u_tested,
        schedule: sched.clone(),
    })
}

/// Detects `k0` and returns the trimmed Hill estimate at the detected value.
pub fn adaptive_trimmed_hill(
    s: &Sample,
    k: usize,
    q: f64,
    a: f64,
) -> Result<(DetectionResult, TailEstimate)> {
    let ratios = ratio_statistics(s, k)?;
    let sched = alpha_schedule(k, q, a)?;
    let detection = select_k0(&ratios, &sched)?;
    let estimate = trimmed_hill(s, detection.k0_hat, k)?;
    Ok((detection, estimate))
}
