//! Contamination of the upper order statistics.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sample::Sample;

/// Outlier mechanism applied to a clean sample.
///
/// With `b = X_(n-k0,n)`, the top `k0` order statistics `x` become
/// `b + (x - b)^power` (exponentiated) or `b + factor (x - b)` (scaled).
/// Mixed replaces every value above `tau` with `multiplier * tau`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OutlierSpec {
    Exponentiated { k0: usize, power: f64 },
    Scaled { k0: usize, factor: f64 },
    Mixed { tau: f64, multiplier: f64 },
}

impl OutlierSpec {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            OutlierSpec::Exponentiated { k0, power } => k0 >= 1 && power.is_finite() && power > 0.0,
            OutlierSpec::Scaled { k0, factor } => k0 >= 1 && factor.is_finite() && factor > 0.0,
            OutlierSpec::Mixed { tau, multiplier } => {
                tau.is_finite() && tau > 0.0 && multiplier.is_finite() && multiplier > 1.0
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Domain(format!(
                "invalid outlier specification {self:?}"
            )))
        }
    }
}

/// A contaminated sample and the number of order statistics that were moved.
#[derive(Debug, Clone, PartialEq)]
pub struct Injected {
    pub sample: Sample,
    pub perturbed: usize,
}

pub fn inject(s: &Sample, spec: &OutlierSpec) -> Result<Injected> {
    spec.validate()?;
    let mut values = s.values().to_vec();
    let perturbed = match *spec {
        OutlierSpec::Exponentiated { k0, power } => {
            shift_top(&mut values, k0, power == 1.0, |gap| gap.powf(power))?;
            k0
        }
        OutlierSpec::Scaled { k0, factor } => {
            shift_top(&mut values, k0, factor == 1.0, |gap| factor * gap)?;
            k0
        }
        OutlierSpec::Mixed { tau, multiplier } => {
            let moved = values.iter().take_while(|&&x| x > tau).count();
            values[..moved].fill(multiplier * tau);
            moved
        }
    };
    if let Some((index, &value)) = values[..perturbed]
        .iter()
        .enumerate()
        .find(|(_, x)| !x.is_finite())
    {
        return Err(Error::NonPositiveValue { index, value });
    }
    // the transforms are monotone in the gap, so the order is preserved
    Ok(Injected {
        sample: Sample::from_sorted(values),
        perturbed,
    })
}

fn shift_top(values: &mut [f64], k0: usize, identity: bool, f: impl Fn(f64) -> f64) -> Result<()> {
    if k0 >= values.len() {
        return Err(Error::K0TooLarge {
            k0,
            n: values.len(),
        });
    }
    // base + (x - base) does not always round back to x
    if identity {
        return Ok(());
    }
    let base = values[k0];
    for x in &mut values[..k0] {
        *x = base + f(*x - base);
    }
    Ok(())
}
