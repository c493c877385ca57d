use crate::error::{Error, Result};

/// Validated positive observations held as descending order statistics.
///
/// `values()[0]` is the sample maximum X_(n,n) and `values()[n-1]` the
/// minimum. Natural logarithms are computed once on construction; every
/// estimator works on log-spacings only.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    values: Vec<f64>,
    logs: Vec<f64>,
}

impl Sample {
    /// Validates and sorts `raw` into a sample.
    pub fn new(raw: Vec<f64>) -> Result<Self> {
        if let Some((index, &value)) = raw
            .iter()
            .enumerate()
            .find(|(_, x)| !(x.is_finite() && **x > 0.0))
        {
            return Err(Error::NonPositiveValue { index, value });
        }
        if raw.len() < 2 {
            return Err(Error::TooSmall { n: raw.len() });
        }
        let mut values = raw;
        values.sort_by(|a, b| b.total_cmp(a));
        Ok(Self::from_sorted(values))
    }

    /// Builds a sample from values already validated and sorted descending.
    pub(crate) fn from_sorted(values: Vec<f64>) -> Self {
        debug_assert!(values.windows(2).all(|w| w[0] >= w[1]));
        let logs = values.iter().map(|x| x.ln()).collect();
        Self { values, logs }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Order statistics, largest first.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Logarithms of `values()`, in the same order.
    pub fn logs(&self) -> &[f64] {
        &self.logs
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
}

/// Validates `raw` and returns it as a descending [`Sample`].
pub fn make_sample(raw: &[f64]) -> Result<Sample> {
    Sample::new(raw.to_vec())
}
