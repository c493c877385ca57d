//! Asymptotically MSE-optimal number of order statistics for the classic
//! Hill estimator in the Hall class `1 - F(x) = C x^{-1/xi} (1 + D x^{-rho/xi} + ...)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::ModelSpec;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KOptParams {
    pub c: f64,
    pub d: f64,
    /// Second-order rate; `f64::INFINITY` denotes an exact Pareto tail.
    pub rho: f64,
}

/// Reference sample size of the calibrated anchors below.
const ANCHOR_N: usize = 1000;
/// Optimal k at `ANCHOR_N` for Burr(1, 0.5, 2).
const BURR_ANCHOR_K: usize = 97;
/// Optimal k at `ANCHOR_N` for |T|(2).
const ABS_T_ANCHOR_K: usize = 464;

impl KOptParams {
    pub fn validate(&self) -> Result<()> {
        let ok = self.rho > 0.0
            && (self.rho.is_infinite()
                || (self.c.is_finite() && self.c > 0.0 && self.d.is_finite() && self.d != 0.0));
        if ok {
            Ok(())
        } else {
            Err(Error::Domain(format!("invalid k_opt parameters {self:?}")))
        }
    }

    /// Parameters with `D = 1` whose optimal k at sample size `n_ref` is `k_ref`.
    pub fn anchored(rho: f64, n_ref: usize, k_ref: usize) -> Self {
        // C^{2 rho} = k^{2 rho + 1} n^{-2 rho} 2 rho^3 / (rho + 1)^2
        let log_c2rho = (2.0 * rho + 1.0) * (k_ref as f64).ln() - 2.0 * rho * (n_ref as f64).ln()
            + (2.0 * rho.powi(3) / (rho + 1.0).powi(2)).ln();
        Self {
            c: (log_c2rho / (2.0 * rho)).exp(),
            d: 1.0,
            rho,
        }
    }
}

pub fn k_opt(n: usize, p: &KOptParams) -> Result<usize> {
    if n < 2 {
        return Err(Error::TooSmall { n });
    }
    p.validate()?;
    if p.rho.is_infinite() {
        return Ok(n - 1);
    }
    let rho = p.rho;
    let log_const =
        2.0 * rho * p.c.ln() + 2.0 * (rho + 1.0).ln() - (2.0 * p.d * p.d * rho.powi(3)).ln();
    let log_k = (log_const + 2.0 * rho * (n as f64).ln()) / (2.0 * rho + 1.0);
    let k = log_k.exp().round();
    Ok((k as usize).clamp(1, n - 1))
}

/// Optimal k for the calibrated models: any Pareto, Burr(1, 0.5, 2) and |T|(2).
pub fn k_opt_default(m: &ModelSpec, n: usize) -> Result<usize> {
    m.validate()?;
    let params = match *m {
        ModelSpec::Pareto { .. } => KOptParams {
            c: 1.0,
            d: 1.0,
            rho: f64::INFINITY,
        },
        ModelSpec::Burr { eta, lambda, xi } if (eta, lambda, xi) == (1.0, 0.5, 2.0) => {
            KOptParams::anchored(m.rho(), ANCHOR_N, BURR_ANCHOR_K)
        }
        ModelSpec::AbsT { xi: 2.0 } => KOptParams::anchored(m.rho(), ANCHOR_N, ABS_T_ANCHOR_K),
        _ => return Err(Error::NoDefaultAvailable(m.to_string())),
    };
    k_opt(n, &params)
}
