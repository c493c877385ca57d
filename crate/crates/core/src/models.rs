//! Heavy-tailed data-generating models used by the simulation harness.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, Open01, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sample::Sample;

/// A heavy-tailed distribution with tail index `xi`.
///
/// * `Pareto { sigma, xi }`: `1 - F(x) = (x / sigma)^{-1/xi}` for `x >= sigma`.
/// * `Burr { eta, lambda, xi }`: `F(x) = (1 + x^{-1/xi} / eta)^{-lambda}`.
/// * `AbsT { xi }`: absolute value of a Student t with `1/xi` degrees of freedom.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelSpec {
    Pareto { sigma: f64, xi: f64 },
    Burr { eta: f64, lambda: f64, xi: f64 },
    AbsT { xi: f64 },
}

impl ModelSpec {
    pub fn validate(&self) -> Result<()> {
        let params: &[f64] = match self {
            ModelSpec::Pareto { sigma, xi } => &[*sigma, *xi],
            ModelSpec::Burr { eta, lambda, xi } => &[*eta, *lambda, *xi],
            ModelSpec::AbsT { xi } => &[*xi],
        };
        if params.iter().all(|p| p.is_finite() && *p > 0.0) {
            Ok(())
        } else {
            Err(Error::Domain(format!(
                "{self}: parameters must be finite and > 0"
            )))
        }
    }

    pub fn xi(&self) -> f64 {
        match *self {
            ModelSpec::Pareto { xi, .. } | ModelSpec::Burr { xi, .. } | ModelSpec::AbsT { xi } => {
                xi
            }
        }
    }

    /// Second-order regular variation index: infinite for Pareto, 1 for Burr,
    /// `2 xi` for |T|.
    pub fn rho(&self) -> f64 {
        match *self {
            ModelSpec::Pareto { .. } => f64::INFINITY,
            ModelSpec::Burr { .. } => 1.0,
            ModelSpec::AbsT { xi } => 2.0 * xi,
        }
    }
}

impl fmt::Display for ModelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelSpec::Pareto { sigma, xi } => write!(f, "pareto({sigma},{xi})"),
            ModelSpec::Burr { eta, lambda, xi } => write!(f, "burr({eta},{lambda},{xi})"),
            ModelSpec::AbsT { xi } => write!(f, "abst({xi})"),
        }
    }
}

/// Parses `pareto(1,2)`, `burr(1,0.5,2)` or `abst(2)` (case-insensitive,
/// `t` and `|t|` accepted for `abst`).
impl FromStr for ModelSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Domain(format!("cannot parse model '{s}'"));
        let s_trim = s.trim();
        let open = s_trim.find('(').ok_or_else(bad)?;
        let inner = s_trim[open + 1..].strip_suffix(')').ok_or_else(bad)?;
        let params = inner
            .split(',')
            .map(|p| p.trim().parse::<f64>().map_err(|_| bad()))
            .collect::<Result<Vec<_>>>()?;
        let model = match (
            s_trim[..open].trim().to_ascii_lowercase().as_str(),
            params.as_slice(),
        ) {
            ("pareto", &[sigma, xi]) => ModelSpec::Pareto { sigma, xi },
            ("burr", &[eta, lambda, xi]) => ModelSpec::Burr { eta, lambda, xi },
            ("abst" | "t" | "|t|", &[xi]) => ModelSpec::AbsT { xi },
            _ => return Err(bad()),
        };
        model.validate()?;
        Ok(model)
    }
}

/// Inverse CDF at probability `u` in `[0, 1)`.
pub fn quantile(m: &ModelSpec, u: f64) -> Result<f64> {
    m.validate()?;
    if !(0.0..1.0).contains(&u) {
        return Err(Error::Domain(format!("probability {u} not in [0, 1)")));
    }
    match *m {
        ModelSpec::Pareto { sigma, xi } => Ok(sigma * (-xi * (-u).ln_1p()).exp()),
        ModelSpec::Burr { eta, lambda, xi } => Ok(burr_quantile(eta, lambda, xi, u)),
        ModelSpec::AbsT { .. } => Err(Error::UnsupportedQuantile),
    }
}

fn burr_quantile(eta: f64, lambda: f64, xi: f64, u: f64) -> f64 {
    // u^{-1/lambda} - 1, accurate for u near 1
    let excess = (-u.ln() / lambda).exp_m1();
    (eta * excess).powf(-xi)
}

fn draw<R: Rng + ?Sized>(m: &ModelSpec, rng: &mut R, abs_t: Option<&Gamma<f64>>) -> f64 {
    match *m {
        ModelSpec::Pareto { sigma, xi } => {
            let u: f64 = rng.random();
            sigma * (-xi * (-u).ln_1p()).exp()
        }
        ModelSpec::Burr { eta, lambda, xi } => {
            let u: f64 = Open01.sample(rng);
            burr_quantile(eta, lambda, xi, u)
        }
        ModelSpec::AbsT { xi } => {
            let nu = 1.0 / xi;
            let chi2 = abs_t.expect("gamma sampler for |T|");
            loop {
                let z: f64 = StandardNormal.sample(rng);
                let v = chi2.sample(rng);
                let x = (z / (v / nu).sqrt()).abs();
                if x.is_finite() && x > 0.0 {
                    break x;
                }
            }
        }
    }
}

/// Draws `n` i.i.d. observations from `m` using `rng`.
pub fn sample_with_rng<R: Rng + ?Sized>(m: &ModelSpec, n: usize, rng: &mut R) -> Result<Sample> {
    m.validate()?;
    if n < 2 {
        return Err(Error::TooSmall { n });
    }
    // chi-square(nu) as Gamma(nu / 2, scale 2)
    let chi2 = match *m {
        ModelSpec::AbsT { xi } => {
            Some(Gamma::new(0.5 / xi, 2.0).map_err(|e| Error::Domain(format!("{m}: {e}")))?)
        }
        _ => None,
    };
    let raw: Vec<f64> = (0..n).map(|_| draw(m, rng, chi2.as_ref())).collect();
    Sample::new(raw)
}

/// Draws `n` observations from `m`; the output is a function of `seed` alone.
pub fn sample(m: &ModelSpec, n: usize, seed: u64) -> Result<Sample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample_with_rng(m, n, &mut rng)
}
