//! Tail-index estimation for heavy-tailed data with the trimmed Hill
//! estimator, automatic selection of the number of trimmed extremes by
//! weighted sequential testing, simulation models with outlier injection,
//! and a reproducible Monte Carlo harness.
//!
//! ```
//! use trimhill::{adaptive_trimmed_hill, make_sample};
//!
//! let s = make_sample(&[54.6, 20.1, 7.39, 2.72, 1.0]).unwrap();
//! let (detection, estimate) = adaptive_trimmed_hill(&s, 4, 0.05, 1.2).unwrap();
//! assert_eq!(detection.k0_hat, 0);
//! assert!((estimate.xi_hat - 2.5).abs() < 1e-2);
//! ```

pub mod error;
pub mod estimators;
pub mod format;
pub mod ingest;
pub mod kopt;
pub mod models;
pub mod montecarlo;
pub mod outliers;
pub mod sample;
pub mod selection;
pub mod series;

pub use error::{Error, Result};
pub use estimators::{biased_hill, classic_hill, trimmed_hill, EstimatorKind, TailEstimate};
pub use ingest::{ingest_csv, ColumnSelector, HeaderMode, IngestOptions, TiePolicy};
pub use kopt::{k_opt, k_opt_default, KOptParams};
pub use models::{quantile, sample, sample_with_rng, ModelSpec};
pub use montecarlo::{
    ks_uniformity, run_mc, run_mc_with_threads, EstimatorSpec, KsOutcome, McConfig, McRecord,
    McReport,
};
pub use outliers::{inject, Injected, OutlierSpec};
pub use sample::{make_sample, Sample};
pub use selection::{
    adaptive_trimmed_hill, alpha_schedule, ratio_statistics, select_k0, AlphaSchedule,
    DetectionResult, RatioSeries, UTest, DEFAULT_LEVEL, DEFAULT_WEIGHT,
};
pub use series::{diagnostic_series, hill_series, pareto_qq_series, HillSeries, Series};
