use proptest::prelude::*;

use trimhill::{
    alpha_schedule, biased_hill, classic_hill, diagnostic_series, hill_series, ingest_csv, inject,
    make_sample, ratio_statistics, sample, select_k0, trimmed_hill, IngestOptions, ModelSpec,
    OutlierSpec, TiePolicy,
};

/// Sample values with a k and k0 that are valid for it.
fn sample_k0_k() -> impl Strategy<Value = (Vec<f64>, usize, usize)> {
    prop::collection::vec(1e-3f64..1e6, 3..80).prop_flat_map(|v| {
        let n = v.len();
        (Just(v), 1..n).prop_flat_map(|(v, k)| (Just(v), 0..k, Just(k)))
    })
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(1e-300)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn trimmed_at_zero_is_classic((v, _, k) in sample_k0_k()) {
        let s = make_sample(&v).unwrap();
        let c = classic_hill(&s, k).unwrap().xi_hat;
        let t = trimmed_hill(&s, 0, k).unwrap().xi_hat;
        prop_assert_eq!(c.to_bits(), t.to_bits());
    }

    #[test]
    fn biased_never_exceeds_trimmed((v, k0, k) in sample_k0_k()) {
        let s = make_sample(&v).unwrap();
        prop_assert!(biased_hill(&s, k0, k).unwrap().xi_hat <= trimmed_hill(&s, k0, k).unwrap().xi_hat);
    }

    #[test]
    fn estimators_are_scale_invariant((v, k0, k) in sample_k0_k(), c in 1e-3f64..1e3) {
        let s = make_sample(&v).unwrap();
        let scaled: Vec<f64> = v.iter().map(|x| x * c).collect();
        let sc = make_sample(&scaled).unwrap();
        // a spacing that is exactly zero stays zero only up to rounding of log(c x)
        let tol = 1e-9 * (1.0 + s.logs()[0].abs() + c.ln().abs());
        for f in [trimmed_hill, biased_hill] {
            let a = f(&s, k0, k).unwrap().xi_hat;
            let b = f(&sc, k0, k).unwrap().xi_hat;
            prop_assert!((a - b).abs() <= tol, "{} vs {}", a, b);
        }
        let a = classic_hill(&s, k).unwrap().xi_hat;
        let b = classic_hill(&sc, k).unwrap().xi_hat;
        prop_assert!((a - b).abs() <= tol);
    }

    #[test]
    fn estimators_are_power_equivariant((v, k0, k) in sample_k0_k(), p in 0.2f64..5.0) {
        let s = make_sample(&v).unwrap();
        let powered: Vec<f64> = v.iter().map(|x| x.powf(p)).collect();
        let sp = make_sample(&powered).unwrap();
        let tol = 1e-9 * p * (1.0 + s.logs()[0].abs() + s.logs()[s.len() - 1].abs());
        for f in [trimmed_hill, biased_hill] {
            let a = f(&s, k0, k).unwrap().xi_hat;
            let b = f(&sp, k0, k).unwrap().xi_hat;
            prop_assert!((p * a - b).abs() <= tol, "{} * {} vs {}", p, a, b);
        }
    }

    #[test]
    fn detection_is_invariant_under_scale_and_power(
        (v, _, k) in sample_k0_k(),
        c in 1e-2f64..1e2,
        p in 0.25f64..4.0,
    ) {
        prop_assume!(k >= 2);
        let s = make_sample(&v).unwrap();
        let r = ratio_statistics(&s, k);
        prop_assume!(r.is_ok());
        let r = r.unwrap();
        let moved: Vec<f64> = v.iter().map(|x| c * x.powf(p)).collect();
        let r2 = ratio_statistics(&make_sample(&moved).unwrap(), k).unwrap();
        for (a, b) in r.u_values.iter().zip(&r2.u_values) {
            prop_assert!((a - b).abs() < 1e-6, "{} vs {}", a, b);
        }
        let sched = alpha_schedule(k, 0.05, 1.2).unwrap();
        let near_threshold = r
            .u_values
            .iter()
            .enumerate()
            .any(|(j, u)| (u - sched.threshold(j)).abs() < 1e-6);
        prop_assume!(!near_threshold);
        prop_assert_eq!(
            select_k0(&r, &sched).unwrap().k0_hat,
            select_k0(&r2, &sched).unwrap().k0_hat
        );
    }

    #[test]
    fn top_contamination_leaves_lower_ratios_untouched(
        (v, _, k) in sample_k0_k(),
        m_frac in 0.0f64..1.0,
        boost in prop::collection::vec(1.0f64..10.0, 80),
    ) {
        prop_assume!(k >= 2);
        let s = make_sample(&v).unwrap();
        let r = ratio_statistics(&s, k);
        prop_assume!(r.is_ok());
        let r = r.unwrap();
        let m = ((k - 1) as f64 * m_frac) as usize;
        // multiply the top m by factors >= 1, accumulated from the bottom so order is kept
        let mut values = s.values().to_vec();
        let mut factor = 1.0;
        for i in (0..m).rev() {
            factor *= boost[i];
            values[i] *= factor;
        }
        let r2 = ratio_statistics(&make_sample(&values).unwrap(), k).unwrap();
        for j in m..r.t_values.len() {
            prop_assert_eq!(r.t_values[j].to_bits(), r2.t_values[j].to_bits(), "j = {}", j);
        }
    }

    #[test]
    fn alpha_schedule_is_calibrated(k in 2usize..200_000, q in 0.001f64..0.5, a in 1.001f64..3.0) {
        let sched = alpha_schedule(k, q, a).unwrap();
        prop_assert_eq!(sched.alphas.len(), k - 1);
        let log_prod: f64 = sched.alphas.iter().map(|x| (-x).ln_1p()).sum();
        prop_assert!(close(log_prod.exp(), 1.0 - q, 1e-10), "{} vs {}", log_prod.exp(), 1.0 - q);
        for w in sched.alphas.windows(2) {
            prop_assert!(w[0] >= w[1]);
        }
        prop_assert!(sched.alphas.iter().all(|x| (0.0..1.0).contains(x)));
    }

    #[test]
    fn injection_preserves_bottom_and_order(
        seed in any::<u64>(),
        n in 20usize..300,
        k0_frac in 0.01f64..0.3,
        power in 1.0f64..4.0,
        factor in 1.0f64..500.0,
    ) {
        let s = sample(&ModelSpec::Pareto { sigma: 1.0, xi: 2.0 }, n, seed).unwrap();
        let k0 = ((n as f64 * k0_frac) as usize).max(1);
        for spec in [
            OutlierSpec::Exponentiated { k0, power },
            OutlierSpec::Scaled { k0, factor },
        ] {
            let out = inject(&s, &spec).unwrap().sample;
            prop_assert_eq!(out.len(), n);
            prop_assert!(out.values().windows(2).all(|w| w[0] >= w[1]));
            for i in k0..n {
                prop_assert_eq!(out.values()[i].to_bits(), s.values()[i].to_bits());
            }
        }
        for spec in [
            OutlierSpec::Exponentiated { k0, power: 1.0 },
            OutlierSpec::Scaled { k0, factor: 1.0 },
        ] {
            let out = inject(&s, &spec).unwrap().sample;
            prop_assert_eq!(out.values(), s.values());
        }
    }

    #[test]
    fn samplers_are_deterministic(seed in any::<u64>(), n in 2usize..200) {
        for m in [
            ModelSpec::Pareto { sigma: 1.0, xi: 2.0 },
            ModelSpec::Burr { eta: 1.0, lambda: 0.5, xi: 2.0 },
            ModelSpec::AbsT { xi: 2.0 },
        ] {
            let a = sample(&m, n, seed).unwrap();
            let b = sample(&m, n, seed).unwrap();
            prop_assert_eq!(a.values(), b.values());
        }
    }

    #[test]
    fn diagnostic_starts_at_classic((v, _, k) in sample_k0_k()) {
        prop_assume!(k >= 2);
        let s = make_sample(&v).unwrap();
        let d = diagnostic_series(&s, k).unwrap();
        prop_assert_eq!(d.points[0].1.to_bits(), classic_hill(&s, k).unwrap().xi_hat.to_bits());
        prop_assert_eq!(&d, &diagnostic_series(&s, k).unwrap());
        prop_assert!(d.points.windows(2).all(|w| w[0].0 < w[1].0));
    }

    #[test]
    fn hill_series_matches_pointwise((v, k0, k) in sample_k0_k()) {
        prop_assume!(k > k0 + 1);
        let s = make_sample(&v).unwrap();
        let h = hill_series(&s, k0, k0 + 1, k).unwrap();
        for &(x, y) in &h.trimmed.points {
            prop_assert_eq!(y.to_bits(), trimmed_hill(&s, k0, x as usize).unwrap().xi_hat.to_bits());
        }
        for &(x, y) in &h.classic.points {
            prop_assert_eq!(y.to_bits(), classic_hill(&s, x as usize).unwrap().xi_hat.to_bits());
        }
    }

    #[test]
    fn ingest_without_tie_policy_only_sorts(v in prop::collection::hash_set(1u32..1_000_000, 2..50)) {
        let raw: Vec<f64> = v.iter().map(|&x| x as f64 / 7.0).collect();
        let csv: String = raw.iter().map(|x| format!("{x}\n")).collect();
        let opts = IngestOptions { tie_policy: TiePolicy::None, ..Default::default() };
        let s = ingest_csv(csv.as_bytes(), &opts).unwrap();
        let mut want = raw.clone();
        want.sort_by(|a, b| b.total_cmp(a));
        prop_assert_eq!(s.values(), &want[..]);
    }
}
