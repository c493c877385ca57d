//! Seeded, parallel Monte Carlo harness.
//!
//! Replication `r` draws from the ChaCha8 stream `r` of the master seed, so a
//! replication's data does not depend on which worker runs it. Outcomes are
//! collected in replication order and reduced sequentially, which keeps every
//! reported number bit-identical across thread counts.

use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::{biased_hill, classic_hill, trimmed_hill};
use crate::models::{sample_with_rng, ModelSpec};
use crate::outliers::{inject, OutlierSpec};
use crate::selection::{adaptive_trimmed_hill, alpha_schedule, DEFAULT_LEVEL, DEFAULT_WEIGHT};

pub const DEFAULT_REPS: usize = 2500;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimatorSpec {
    Classic,
    /// Trimmed Hill at a fixed k0.
    Trimmed(usize),
    /// Biased Hill at a fixed k0.
    Biased(usize),
    /// Trimmed Hill at the k0 chosen by the sequential test.
    Adaptive,
}

impl EstimatorSpec {
    pub fn name(&self) -> &'static str {
        match self {
            EstimatorSpec::Classic => "classic",
            EstimatorSpec::Trimmed(_) => "trimmed",
            EstimatorSpec::Biased(_) => "biased",
            EstimatorSpec::Adaptive => "adaptive",
        }
    }

    pub fn fixed_k0(&self) -> Option<usize> {
        match *self {
            EstimatorSpec::Trimmed(k0) | EstimatorSpec::Biased(k0) => Some(k0),
            _ => None,
        }
    }
}

fn default_reps() -> usize {
    DEFAULT_REPS
}
fn default_q() -> f64 {
    DEFAULT_LEVEL
}
fn default_a() -> f64 {
    DEFAULT_WEIGHT
}
fn default_estimators() -> Vec<EstimatorSpec> {
    vec![EstimatorSpec::Classic, EstimatorSpec::Adaptive]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McConfig {
    pub model: ModelSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outliers: Option<OutlierSpec>,
    pub n: usize,
    pub k_grid: Vec<usize>,
    #[serde(default = "default_reps")]
    pub reps: usize,
    #[serde(default = "default_q")]
    pub q: f64,
    #[serde(default = "default_a")]
    pub a: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_estimators")]
    pub estimators: Vec<EstimatorSpec>,
}

impl McConfig {
    pub fn new(model: ModelSpec, n: usize, k_grid: Vec<usize>) -> Self {
        Self {
            model,
            outliers: None,
            n,
            k_grid,
            reps: DEFAULT_REPS,
            q: DEFAULT_LEVEL,
            a: DEFAULT_WEIGHT,
            seed: 0,
            estimators: default_estimators(),
        }
    }

    /// Parses and validates a TOML experiment description.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Parses and validates a JSON experiment description.
    pub fn from_json_str(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Work units, `reps * n * |k_grid|`.
    pub fn cost(&self) -> u128 {
        self.reps as u128 * self.n as u128 * self.k_grid.len() as u128
    }

    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        if let Some(o) = &self.outliers {
            o.validate()?;
            if let OutlierSpec::Exponentiated { k0, .. } | OutlierSpec::Scaled { k0, .. } = *o {
                if k0 >= self.n {
                    return Err(Error::K0TooLarge { k0, n: self.n });
                }
            }
        }
        if self.reps == 0 {
            return Err(Error::Config("reps must be >= 1".into()));
        }
        if self.k_grid.is_empty() {
            return Err(Error::Config("k_grid is empty".into()));
        }
        if self.estimators.is_empty() {
            return Err(Error::Config("no estimators selected".into()));
        }
        for &k in &self.k_grid {
            if k < 2 || k >= self.n {
                return Err(Error::KOutOfRange {
                    k,
                    n: self.n,
                    min: 2,
                });
            }
            for e in &self.estimators {
                if let Some(k0) = e.fixed_k0() {
                    if k0 >= k {
                        return Err(Error::K0OutOfRange { k0, k });
                    }
                }
            }
        }
        alpha_schedule(2, self.q, self.a)?;
        Ok(())
    }

    fn has_adaptive(&self) -> bool {
        self.estimators.contains(&EstimatorSpec::Adaptive)
    }
}

/// Aggregates for one (estimator, k) cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McRecord {
    pub estimator: String,
    /// Fixed trimming of `trimmed` / `biased` estimators.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k0: Option<usize>,
    pub k: usize,
    pub rmse: f64,
    pub bias: f64,
    /// Mean and standard deviation of the detected k0 (adaptive only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k0_mean: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k0_sd: Option<f64>,
    /// Fraction of replications with k0_hat > 0 (adaptive, clean data only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub type1_rate: Option<f64>,
    /// Mean realised number of perturbed order statistics (contaminated runs).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k0_true_mean: Option<f64>,
    /// Fraction of replications with k0_hat equal to the realised count.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k0_hit_rate: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McReport {
    pub model: ModelSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outliers: Option<OutlierSpec>,
    pub n: usize,
    pub reps_used: usize,
    pub seed: u64,
    pub q: f64,
    pub a: f64,
    pub records: Vec<McRecord>,
    /// Wall time; not serialised so reports stay reproducible.
    #[serde(skip)]
    pub elapsed: Duration,
}

impl McReport {
    pub fn record(&self, estimator: EstimatorSpec, k: usize) -> Option<&McRecord> {
        self.records
            .iter()
            .find(|r| r.estimator == estimator.name() && r.k == k && r.k0 == estimator.fixed_k0())
    }
}

/// Streaming mean and variance (Welford), mergeable (Chan et al.).
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Moments {
    pub count: u64,
    pub mean: f64,
    m2: f64,
}

impl Moments {
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn merge(&mut self, other: &Moments) {
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = *other;
            return;
        }
        let total = self.count + other.count;
        let delta = other.mean - self.mean;
        self.mean += delta * other.count as f64 / total as f64;
        self.m2 +=
            other.m2 + delta * delta * (self.count as f64 * other.count as f64) / total as f64;
        self.count = total;
    }

    pub fn population_variance(&self) -> f64 {
        if self.count == 0 {
            f64::NAN
        } else {
            self.m2 / self.count as f64
        }
    }

    pub fn sample_variance(&self) -> Option<f64> {
        (self.count > 1).then(|| self.m2 / (self.count - 1) as f64)
    }
}

struct Replication {
    /// Estimates indexed `[k_index * estimators + estimator_index]`.
    xi: Vec<f64>,
    /// Detected k0 per k (empty unless adaptive is requested).
    k0_hat: Vec<usize>,
    perturbed: usize,
}

fn replicate(cfg: &McConfig, r: usize) -> Result<Replication> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(r as u64);
    let clean = sample_with_rng(&cfg.model, cfg.n, &mut rng)?;
    let (s, perturbed) = match &cfg.outliers {
        Some(spec) => {
            let out = inject(&clean, spec)?;
            (out.sample, out.perturbed)
        }
        None => (clean, 0),
    };
    let mut xi = Vec::with_capacity(cfg.k_grid.len() * cfg.estimators.len());
    let mut k0_hat = Vec::new();
    for &k in &cfg.k_grid {
        let adaptive = if cfg.has_adaptive() {
            let (d, e) = adaptive_trimmed_hill(&s, k, cfg.q, cfg.a)?;
            k0_hat.push(d.k0_hat);
            Some(e.xi_hat)
        } else {
            None
        };
        for est in &cfg.estimators {
            let v = match *est {
                EstimatorSpec::Classic => classic_hill(&s, k)?.xi_hat,
                EstimatorSpec::Trimmed(k0) => trimmed_hill(&s, k0, k)?.xi_hat,
                EstimatorSpec::Biased(k0) => biased_hill(&s, k0, k)?.xi_hat,
                EstimatorSpec::Adaptive => adaptive.expect("computed above"),
            };
            xi.push(v);
        }
    }
    Ok(Replication {
        xi,
        k0_hat,
        perturbed,
    })
}

/// Runs the configured experiment on the current rayon pool.
pub fn run_mc(cfg: &McConfig) -> Result<McReport> {
    cfg.validate()?;
    let start = Instant::now();
    let reps = (0..cfg.reps)
        .into_par_iter()
        .map(|r| replicate(cfg, r))
        .collect::<Result<Vec<_>>>()?;
    Ok(summarise(cfg, &reps, start.elapsed()))
}

/// Runs the configured experiment on a dedicated pool of `threads` workers.
pub fn run_mc_with_threads(cfg: &McConfig, threads: usize) -> Result<McReport> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Config(format!("cannot build thread pool: {e}")))?;
    pool.install(|| run_mc(cfg))
}

fn summarise(cfg: &McConfig, reps: &[Replication], elapsed: Duration) -> McReport {
    let xi_true = cfg.model.xi();
    let n_est = cfg.estimators.len();
    let mut records = Vec::with_capacity(cfg.k_grid.len() * n_est);
    let mut perturbed = Moments::default();
    for rep in reps {
        perturbed.push(rep.perturbed as f64);
    }

    for (ki, &k) in cfg.k_grid.iter().enumerate() {
        for (ei, est) in cfg.estimators.iter().enumerate() {
            let mut err = Moments::default();
            for rep in reps {
                err.push(rep.xi[ki * n_est + ei] - xi_true);
            }
            let mut rec = McRecord {
                estimator: est.name().to_string(),
                k0: est.fixed_k0(),
                k,
                rmse: (err.population_variance() + err.mean * err.mean).sqrt(),
                bias: err.mean,
                k0_mean: None,
                k0_sd: None,
                type1_rate: None,
                k0_true_mean: None,
                k0_hit_rate: None,
            };
            if *est == EstimatorSpec::Adaptive {
                let mut k0 = Moments::default();
                let mut positive = 0usize;
                let mut hits = 0usize;
                for rep in reps {
                    let hat = rep.k0_hat[ki];
                    k0.push(hat as f64);
                    positive += usize::from(hat > 0);
                    hits += usize::from(hat == rep.perturbed);
                }
                rec.k0_mean = Some(k0.mean);
                rec.k0_sd = k0.sample_variance().map(f64::sqrt);
                if cfg.outliers.is_none() {
                    rec.type1_rate = Some(positive as f64 / reps.len() as f64);
                } else {
                    rec.k0_true_mean = Some(perturbed.mean);
                    rec.k0_hit_rate = Some(hits as f64 / reps.len() as f64);
                }
            }
            records.push(rec);
        }
    }
    McReport {
        model: cfg.model,
        outliers: cfg.outliers,
        n: cfg.n,
        reps_used: reps.len(),
        seed: cfg.seed,
        q: cfg.q,
        a: cfg.a,
        records,
        elapsed,
    }
}

/// One-sample Kolmogorov–Smirnov test against U(0, 1).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KsOutcome {
    pub statistic: f64,
    /// Whether the statistic exceeds the asymptotic 1% critical value `1.628 / sqrt(m)`.
    pub reject_at_1pct: bool,
}

pub const KS_CRITICAL_1PCT: f64 = 1.628;

pub fn ks_uniformity(values: &[f64]) -> Result<KsOutcome> {
    if values.is_empty() {
        return Err(Error::Empty);
    }
    if let Some((index, &value)) = values
        .iter()
        .enumerate()
        .find(|(_, v)| !(0.0..=1.0).contains(*v))
    {
        return Err(Error::Domain(format!(
            "value {value} at position {index} is outside [0, 1]"
        )));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let m = sorted.len() as f64;
    let statistic = sorted
        .iter()
        .enumerate()
        .map(|(i, &u)| ((i + 1) as f64 / m - u).max(u - i as f64 / m))
        .fold(0.0, f64::max);
    Ok(KsOutcome {
        statistic,
        reject_at_1pct: statistic > KS_CRITICAL_1PCT / m.sqrt(),
    })
}
