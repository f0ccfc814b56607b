use num_complex::Complex64;
use proptest::prelude::*;
use scv_core::distance::DistanceOptions;
use scv_core::domains::DomainSpec;
use scv_core::exec::{substream, Exec};
use scv_core::kobayashi::*;

fn query(n: usize) -> impl Strategy<Value = (Vec<Complex64>, Vec<Complex64>)> {
    any::<u64>().prop_map(move |s| random_query(n, &mut substream(s, 0)))
}

fn scaled(v: &[Complex64], s: Complex64) -> Vec<Complex64> {
    v.iter().map(|c| c * s).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn estimators_are_homogeneous(n in 1usize..3, (z, v) in query(2)) {
        let d = DomainSpec::ball(n);
        let z = z[..n].to_vec();
        let v = v[..n].to_vec();
        let loc = Localization::certify(d.clone(), d.rho.clone(), 1.0, 1.0, 0).unwrap();
        let eval = |v: &[Complex64]| {
            let q = MetricQuery::new(d.clone(), z.clone(), v.to_vec()).unwrap();
            [
                upper_bound_inscribed(&q, &DistanceOptions::default()).unwrap(),
                exact_metric(&q).unwrap(),
                sibony_homogeneous_bracket(&q, &d.rho, 1.0).unwrap(),
                loc.bracket(&z, v).unwrap(),
            ]
        };
        let base = eval(&v);
        let double = eval(&scaled(&v, Complex64::new(2.0, 0.0)));
        let rot = eval(&scaled(&v, Complex64::new(0.0, 1.0)));
        for k in 0..4 {
            prop_assert!((double[k] - 2.0 * base[k]).abs() <= 1e-9 * base[k]);
            prop_assert!((rot[k] - base[k]).abs() <= 1e-9 * base[k]);
        }
        let q = MetricQuery::new(d.clone(), z.clone(), v.clone()).unwrap();
        let q2 = MetricQuery::new(d.clone(), z.clone(), scaled(&v, Complex64::new(2.0, 0.0))).unwrap();
        // the quadratic Sibony bracket scales with the square of v
        let s1 = sibony_lower_bracket(&q, &d.rho, 1.0).unwrap();
        let s2 = sibony_lower_bracket(&q2, &d.rho, 1.0).unwrap();
        prop_assert!((s2 - 4.0 * s1).abs() <= 1e-9 * s2);
    }

    #[test]
    fn exact_below_inscribed(n in 1usize..3, (z, v) in query(2)) {
        let d = DomainSpec::ball(n);
        let q = MetricQuery::new(d, z[..n].to_vec(), v[..n].to_vec()).unwrap();
        let e = exact_metric(&q).unwrap();
        prop_assert!(e <= upper_bound_inscribed(&q, &DistanceOptions::default()).unwrap() * (1.0 + 1e-12));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn search_is_feasible_and_monotone(n in 1usize..3, (z, v) in query(2)) {
        let d = DomainSpec::ball(n);
        let q = MetricQuery::new(d, z[..n].to_vec(), v[..n].to_vec()).unwrap();
        let e = exact_metric(&q).unwrap();
        let opts = SearchOptions { exec: Exec::Sequential, ..Default::default() };
        let mut prev: Option<DiscWitness> = None;
        for deg in 1..=3 {
            let w = extremal_disc_search_warm(&q, deg, 1, 9, &opts, prev.as_ref()).unwrap();
            prop_assert!(w.lambda >= e - 1e-9);
            if let Some(p) = &prev {
                prop_assert!(w.lambda <= p.lambda);
            }
            prev = Some(w);
        }
    }
}

#[test]
fn fitted_constants_are_stable_under_doubling() {
    for n in [1, 2] {
        let a = sandwich_sweep(n, 1000, 42, None, Exec::Parallel).unwrap();
        let b = sandwich_sweep(n, 2000, 42, None, Exec::Parallel).unwrap();
        assert_eq!(a.upper_violations, 0);
        for (x, y) in [
            (a.sibony_constant, b.sibony_constant),
            (a.localization_constant, b.localization_constant),
        ] {
            assert!(x > 0.0 && (x - y).abs() / x < 0.1, "n = {n}: {x} vs {y}");
        }
    }
}

#[test]
fn tangential_localization_window() {
    let rays = localization_rate_rays(2, 16, 11).unwrap();
    for ray in rays {
        let max = ray.iter().map(|r| r.1).fold(0.0, f64::max);
        let min = ray.iter().map(|r| r.1).fold(f64::INFINITY, f64::min);
        assert!(min > 0.0 && max / min <= 4.0);
    }
}
