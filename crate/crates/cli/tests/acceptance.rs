//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.
//!
//! Reference numbers are the published simulation results; every tolerance below is
//! the one the criterion states.

use std::path::PathBuf;
use std::time::{Duration, Instant};

use axum::body::Body;
use axum::http::{Request, StatusCode};
use http_body_util::BodyExt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ContinuousCDF, Gamma};
use tower::ServiceExt;

use trimhill::format::{to_json, McReportDoc};
use trimhill::{
    alpha_schedule, biased_hill, classic_hill, ks_uniformity, make_sample, ratio_statistics,
    run_mc, run_mc_with_threads, sample, trimmed_hill, EstimatorSpec, McConfig, ModelSpec,
    OutlierSpec,
};
use trimhill_service::{router, ServiceConfig};

const PARETO: ModelSpec = ModelSpec::Pareto {
    sigma: 1.0,
    xi: 2.0,
};
const REPS: usize = 2500;

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn s5() -> trimhill::Sample {
    make_sample(&[4f64.exp(), 3f64.exp(), 2f64.exp(), 1f64.exp(), 1.0]).unwrap()
}

fn hand_cases() -> Outcome {
    let start = Instant::now();
    let s = s5();
    let mut worst: f64 = 0.0;
    let mut check = |got: f64, want: f64| worst = worst.max((got - want).abs());
    check(classic_hill(&s, 4).unwrap().xi_hat, 2.5);
    check(trimmed_hill(&s, 1, 4).unwrap().xi_hat, 3.0);
    check(trimmed_hill(&s, 2, 4).unwrap().xi_hat, 3.5);
    check(biased_hill(&s, 1, 4).unwrap().xi_hat, 2.0);
    check(biased_hill(&s, 2, 4).unwrap().xi_hat, 1.5);
    let r = ratio_statistics(&s, 4).unwrap();
    for (got, want) in r.t_values.iter().zip([0.9, 7.0 / 9.0, 4.0 / 7.0]) {
        check(*got, want);
    }
    // U_j = 2|T_j^(k-j-1) - 1/2|
    let u_want = [
        2.0 * (0.9f64.powi(3) - 0.5).abs(),
        2.0 * ((7.0f64 / 9.0).powi(2) - 0.5).abs(),
        2.0 * (4.0f64 / 7.0 - 0.5).abs(),
    ];
    for (got, want) in r.u_values.iter().zip(u_want) {
        check(*got, want);
    }
    let elapsed = start.elapsed();
    outcome(
        worst <= 1e-12 && elapsed < Duration::from_secs(1),
        format!("max abs error {worst:.1e}, {elapsed:.2?}"),
    )
}

fn reduction_and_ordering() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(20_240_101);
    let mut reduction_failures = 0;
    let mut ordering_failures = 0;
    for _ in 0..10_000 {
        let n = rng.random_range(3..300);
        let model = match rng.random_range(0..3) {
            0 => PARETO,
            1 => ModelSpec::Burr {
                eta: 1.0,
                lambda: 0.5,
                xi: 2.0,
            },
            _ => ModelSpec::AbsT {
                xi: rng.random_range(0.2..2.0),
            },
        };
        let s = sample(&model, n, rng.random()).unwrap();
        let k = rng.random_range(1..n);
        let k0 = rng.random_range(0..k);
        let c = classic_hill(&s, k).unwrap().xi_hat;
        if trimmed_hill(&s, 0, k).unwrap().xi_hat.to_bits() != c.to_bits() {
            reduction_failures += 1;
        }
        if biased_hill(&s, k0, k).unwrap().xi_hat > trimmed_hill(&s, k0, k).unwrap().xi_hat {
            ordering_failures += 1;
        }
    }
    outcome(
        reduction_failures == 0 && ordering_failures == 0,
        format!("10000 triples, reduction failures {reduction_failures}, ordering failures {ordering_failures}"),
    )
}

fn gamma_law() -> Outcome {
    let start = Instant::now();
    let (n, k, k0, xi) = (500, 499, 10, 2.0);
    let m = (k - k0) as f64;
    let est: Vec<f64> = (0..REPS as u64)
        .map(|seed| {
            trimmed_hill(&sample(&PARETO, n, 1_000_000 + seed).unwrap(), k0, k)
                .unwrap()
                .xi_hat
        })
        .collect();
    let mean = est.iter().sum::<f64>() / est.len() as f64;
    let var = est.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (est.len() - 1) as f64;
    let gamma = Gamma::new(m, 1.0).unwrap();
    let u: Vec<f64> = est.iter().map(|x| gamma.cdf(m * x / xi)).collect();
    let ks = ks_uniformity(&u).unwrap();
    let want_var = xi * xi / m;
    let mean_ok = (mean - xi).abs() <= 3.0 * xi / m.sqrt();
    let var_ok = (var / want_var - 1.0).abs() <= 0.1;
    let elapsed = start.elapsed();
    outcome(
        mean_ok && var_ok && !ks.reject_at_1pct && elapsed < Duration::from_secs(60),
        format!(
            "mean {mean:.4}, var {var:.5} vs {want_var:.5} ({:+.1}%), KS D = {:.4}, {elapsed:.2?}",
            100.0 * (var / want_var - 1.0),
            ks.statistic
        ),
    )
}

fn type_one() -> Outcome {
    let grid = vec![50, 100, 200, 500, 800];
    let mut cfg = McConfig::new(PARETO, 1000, grid.clone());
    cfg.seed = 1;
    cfg.estimators = vec![EstimatorSpec::Adaptive];
    let report = run_mc(&cfg).unwrap();
    let rates: Vec<f64> = grid
        .iter()
        .map(|&k| {
            report
                .record(EstimatorSpec::Adaptive, k)
                .unwrap()
                .type1_rate
                .unwrap()
        })
        .collect();
    let pass = rates.iter().all(|r| (r - 0.05).abs() <= 0.015);
    let shown: Vec<String> = grid
        .iter()
        .zip(&rates)
        .map(|(k, r)| format!("k={k}: {r:.4}"))
        .collect();
    outcome(pass, shown.join(", "))
}

/// Mean and SD of k0_hat at k = n - 1 with the given outliers.
fn recovery(n: usize, k: usize, model: ModelSpec, outliers: OutlierSpec, seed: u64) -> (f64, f64) {
    let mut cfg = McConfig::new(model, n, vec![k]);
    cfg.outliers = Some(outliers);
    cfg.seed = seed;
    cfg.estimators = vec![EstimatorSpec::Adaptive];
    let report = run_mc(&cfg).unwrap();
    let r = report.record(EstimatorSpec::Adaptive, k).unwrap();
    (r.k0_mean.unwrap(), r.k0_sd.unwrap())
}

fn exponentiated_recovery() -> Outcome {
    let mut pass = true;
    let mut shown = Vec::new();
    for (n, k0, want_mean, want_sd) in [
        (100, 5, 5.10, 1.04),
        (300, 15, 14.98, 0.44),
        (500, 30, 29.85, 0.39),
    ] {
        let (mean, sd) = recovery(
            n,
            n - 1,
            PARETO,
            OutlierSpec::Exponentiated { k0, power: 3.0 },
            2,
        );
        let ok = (mean - want_mean).abs() <= 0.3 && sd >= want_sd / 2.0 && sd <= want_sd * 2.0;
        pass &= ok;
        shown.push(format!(
            "n={n} k0={k0}: {mean:.2} ± {sd:.2} (ref {want_mean} ± {want_sd})"
        ));
    }
    outcome(pass, shown.join("; "))
}

fn scaled_recovery() -> Outcome {
    let mut pass = true;
    let mut shown = Vec::new();
    for (k0, want) in [(15, 14.91), (30, 29.97)] {
        let (mean, sd) = recovery(
            500,
            499,
            PARETO,
            OutlierSpec::Scaled { k0, factor: 200.0 },
            3,
        );
        pass &= (mean - want).abs() <= 0.3;
        shown.push(format!("k0={k0}: {mean:.2} ± {sd:.2} (ref {want})"));
    }
    outcome(pass, shown.join("; "))
}

fn abs_t_recovery() -> Outcome {
    let (mean, sd) = recovery(
        1000,
        200,
        ModelSpec::AbsT { xi: 2.0 },
        OutlierSpec::Exponentiated { k0: 10, power: 3.0 },
        4,
    );
    outcome(
        (mean - 10.02).abs() <= 0.4,
        format!("{mean:.2} ± {sd:.2} (ref 10.02)"),
    )
}

fn clean_adaptivity() -> Outcome {
    let mut pass = true;
    let mut worst = (0.0, String::new());
    for (model, grid) in [
        (PARETO, vec![50, 100, 200, 500, 800]),
        (
            ModelSpec::Burr {
                eta: 1.0,
                lambda: 0.5,
                xi: 2.0,
            },
            vec![50, 80, 100, 150, 200],
        ),
        (ModelSpec::AbsT { xi: 2.0 }, vec![50, 100, 200, 400, 600]),
    ] {
        let mut cfg = McConfig::new(model, 1000, grid.clone());
        cfg.seed = 5;
        let report = run_mc(&cfg).unwrap();
        for k in grid {
            let c = report.record(EstimatorSpec::Classic, k).unwrap().rmse;
            let a = report.record(EstimatorSpec::Adaptive, k).unwrap().rmse;
            pass &= a <= 1.15 * c;
            if a / c > worst.0 {
                worst = (a / c, format!("{model} k={k}"));
            }
        }
    }
    outcome(
        pass,
        format!("worst rmse ratio {:.4} at {}", worst.0, worst.1),
    )
}

fn alpha_calibration() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut non_finite = 0;
    let mut flushed = 0;
    for k in [4, 100, 10_000, 100_000] {
        for q in [0.01, 0.05, 0.2] {
            for a in [1.01, 1.2, 2.0] {
                let sched = alpha_schedule(k, q, a).unwrap();
                non_finite += sched
                    .alphas
                    .iter()
                    .filter(|x| !x.is_finite() || **x < 0.0)
                    .count();
                flushed += sched.alphas.iter().filter(|x| **x == 0.0).count();
                let product: f64 = sched.alphas.iter().map(|x| 1.0 - x).product();
                worst = worst.max((product - (1.0 - q)).abs());
            }
        }
    }
    outcome(
        worst <= 1e-10 && non_finite == 0,
        format!(
            "max |prod - (1-q)| {worst:.1e}, non-finite {non_finite}, \
             alphas below the smallest positive double {flushed}"
        ),
    )
}

fn determinism() -> Outcome {
    let mut cfg = McConfig::new(PARETO, 400, vec![50, 200, 399]);
    cfg.reps = 500;
    cfg.seed = 77;
    cfg.outliers = Some(OutlierSpec::Exponentiated { k0: 8, power: 3.0 });
    cfg.estimators = vec![
        EstimatorSpec::Classic,
        EstimatorSpec::Trimmed(8),
        EstimatorSpec::Biased(8),
        EstimatorSpec::Adaptive,
    ];
    let docs: Vec<String> = [1, 4, 8]
        .iter()
        .map(|&t| {
            to_json(&McReportDoc {
                mc_report: run_mc_with_threads(&cfg, t).unwrap(),
            })
        })
        .collect();
    let same = docs.iter().all(|d| d == &docs[0]);
    outcome(
        same,
        format!(
            "{} bytes at 1/4/8 workers, identical: {same}",
            docs[0].len()
        ),
    )
}

fn service_contract() -> Outcome {
    const S5_CSV: &str =
        "x\n54.598150033144236\n20.085536923187668\n7.38905609893065\n2.718281828459045\n1\n";
    let golden_dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../service/tests/golden");
    let rt = tokio::runtime::Runtime::new().unwrap();
    rt.block_on(async {
        let app = router(ServiceConfig::default());
        let call = |method: &'static str, uri: String, body: &'static str| {
            let app = app.clone();
            async move {
                let req = Request::builder()
                    .method(method)
                    .uri(uri)
                    .body(Body::from(body))
                    .unwrap();
                let resp = app.oneshot(req).await.unwrap();
                let status = resp.status();
                let bytes = resp.into_body().collect().await.unwrap().to_bytes();
                (status, String::from_utf8(bytes.to_vec()).unwrap())
            }
        };
        let mut mismatches = Vec::new();
        let (status, body) = call("POST", "/v1/datasets".into(), S5_CSV).await;
        let mut compare = |name: &str, status: StatusCode, want_status: StatusCode, body: &str| {
            let want = std::fs::read_to_string(golden_dir.join(name)).unwrap_or_default();
            if status != want_status || body != want {
                mismatches.push(name.to_string());
            }
        };
        compare("upload.json", status, StatusCode::CREATED, &body);
        let id = "ds1";
        for (name, uri, want_status) in [
            (
                "estimate_k4_k0_1.json",
                format!("/v1/datasets/{id}/estimate?k=4&k0=1"),
                StatusCode::OK,
            ),
            (
                "estimate_k4_classic.json",
                format!("/v1/datasets/{id}/estimate?k=4"),
                StatusCode::OK,
            ),
            (
                "estimate_k4_auto.json",
                format!("/v1/datasets/{id}/estimate?k=4&k0=auto&q=0.05&a=1.2"),
                StatusCode::OK,
            ),
            (
                "detect_k4.json",
                format!("/v1/datasets/{id}/detect?k=4"),
                StatusCode::OK,
            ),
            (
                "diagnostic_k4.json",
                format!("/v1/datasets/{id}/diagnostic?k=4"),
                StatusCode::OK,
            ),
            (
                "hillplot_k0_1.json",
                format!("/v1/datasets/{id}/hillplot?k0=1&kmin=2&kmax=4"),
                StatusCode::OK,
            ),
            ("qq.json", format!("/v1/datasets/{id}/qq"), StatusCode::OK),
            (
                "error_k_out_of_range.json",
                format!("/v1/datasets/{id}/estimate?k=9999"),
                StatusCode::UNPROCESSABLE_ENTITY,
            ),
        ] {
            let (status, body) = call("GET", uri, "").await;
            compare(name, status, want_status, &body);
        }
        outcome(
            mismatches.is_empty(),
            if mismatches.is_empty() {
                "9 golden responses match".to_string()
            } else {
                format!("mismatched: {}", mismatches.join(", "))
            },
        )
    })
}

fn main() {
    let criteria: [Criterion; 11] = [
        ("exact hand cases on S5", hand_cases),
        ("reduction and ordering invariants", reduction_and_ordering),
        ("gamma-law oracle", gamma_law),
        ("type-I calibration", type_one),
        (
            "k0 recovery, exponentiated outliers",
            exponentiated_recovery,
        ),
        ("k0 recovery, scaled outliers", scaled_recovery),
        ("k0 recovery, |t| model", abs_t_recovery),
        ("clean-data adaptivity", clean_adaptivity),
        ("alpha-schedule calibration", alpha_calibration),
        ("determinism across workers", determinism),
        ("service golden contract", service_contract),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        let start = Instant::now();
        let o = run();
        if !o.pass {
            failed += 1;
        }
        println!(
            "{} {name}: {} [{:.1?}]",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail,
            start.elapsed()
        );
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
