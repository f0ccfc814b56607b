use std::sync::Arc;

use num_complex::Complex64;
use proptest::prelude::*;
use scv_core::domains::{holomorphic_tangent, levi_form, DomainConfig, DomainSpec, Hyperplane};
use scv_core::exec::{substream, Exec};
use scv_core::jet::RealPoly;
use scv_core::maps::{lift_map, BallAutomorphism, Compose, HolomorphicMap, Linear, MapUnderTest};

fn cvec(n: usize, scale: f64) -> impl Strategy<Value = Vec<Complex64>> {
    prop::collection::vec((-scale..scale, -scale..scale), n)
        .prop_map(|v| v.into_iter().map(|(a, b)| Complex64::new(a, b)).collect())
}

fn apply(u: &scv_core::jet::CMatrix, z: &[Complex64]) -> Vec<Complex64> {
    (0..z.len())
        .map(|j| (0..z.len()).map(|k| u[(j, k)] * z[k]).sum())
        .collect()
}

/// `Σ a_j |(Uz)_j|² - 1` written out in real coordinates.
fn rotated_ellipsoid(a: &[f64], u: &scv_core::jet::CMatrix) -> RealPoly {
    let n = a.len();
    let mut rho = RealPoly::constant(n, -1.0);
    for j in 0..n {
        let mut re = RealPoly::zero(n);
        let mut im = RealPoly::zero(n);
        for k in 0..n {
            let c = u[(j, k)];
            re = re
                .add(&RealPoly::x(n, k).scale(c.re))
                .add(&RealPoly::y(n, k).scale(-c.im));
            im = im
                .add(&RealPoly::x(n, k).scale(c.im))
                .add(&RealPoly::y(n, k).scale(c.re));
        }
        rho = rho.add(&re.mul(&re).add(&im.mul(&im)).scale(a[j]));
    }
    rho
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn levi_form_is_sesquilinear(a in prop::collection::vec(0.5..3.0f64, 3), p in cvec(3, 0.5), v in cvec(3, 1.0), lam in cvec(1, 2.0)) {
        let d = DomainSpec::ellipsoid(&a).unwrap();
        let l = lam[0];
        let lv: Vec<Complex64> = v.iter().map(|c| c * l).collect();
        let lhs = levi_form(&d, &p, &lv).unwrap();
        let rhs = l.norm_sqr() * levi_form(&d, &p, &v).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.abs().max(1.0));
    }

    #[test]
    fn levi_form_is_unitarily_invariant(
        a in prop::collection::vec(0.5..3.0f64, 3),
        angles in prop::collection::vec(0.0..6.3f64, 5),
        p in cvec(3, 0.5),
        v in cvec(3, 1.0),
    ) {
        let u = Linear::rotation(3, &angles).a;
        let d = DomainSpec::ellipsoid(&a).unwrap();
        let dr = DomainSpec::from_config(&DomainConfig::Polynomial { rho: rotated_ellipsoid(&a, &u) }).unwrap();
        let uinv = u.adjoint();
        let lhs = levi_form(&dr, &apply(&uinv, &p), &apply(&uinv, &v)).unwrap();
        let rhs = levi_form(&d, &p, &v).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-10, "{lhs} vs {rhs}");
    }

    #[test]
    fn tangent_basis_is_annihilated(a in prop::collection::vec(0.5..3.0f64, 3), seed in 0u64..1000) {
        let d = DomainSpec::ellipsoid(&a).unwrap();
        let p = d.boundary_sample(&mut substream(seed, 0)).unwrap();
        let grad = d.dz(&p);
        let h = holomorphic_tangent(&d, &p).unwrap();
        let basis = h.basis();
        prop_assert_eq!(basis.len(), 2);
        for b in basis {
            let s: Complex64 = grad.iter().zip(&b).map(|(g, v)| g * v).sum();
            prop_assert!(s.norm() < 1e-12);
        }
    }

    #[test]
    fn chart_round_trip(a in cvec(4, 1.0)) {
        prop_assume!(a.iter().map(|c| c.norm_sqr()).sum::<f64>() > 1e-4);
        let h = Hyperplane::new(&a).unwrap();
        let (w, pivot) = h.chart();
        let back = Hyperplane::from_chart(&w, pivot).unwrap();
        prop_assert!(h.distance(&back) < 1e-10);
    }

    #[test]
    fn lift_is_functorial(a in cvec(2, 0.45), b in cvec(2, 0.45), z in cvec(2, 0.5), seed in 0u64..1000) {
        let ball = DomainSpec::ball(2);
        let f: Arc<dyn HolomorphicMap> = Arc::new(BallAutomorphism::new(a).unwrap());
        let g: Arc<dyn HolomorphicMap> = Arc::new(BallAutomorphism::new(b).unwrap());
        let mf = MapUnderTest::new(f.clone(), ball.clone(), ball.clone()).unwrap();
        let mg = MapUnderTest::new(g.clone(), ball.clone(), ball.clone()).unwrap();
        let mgf = MapUnderTest::new(Arc::new(Compose { outer: g, inner: f }), ball.clone(), ball.clone()).unwrap();
        let p = ball.boundary_samples(1, seed, Exec::Sequential).unwrap().remove(0);
        let plane = holomorphic_tangent(&ball, &p).unwrap();
        let (z1, p1) = lift_map(&mf, &z, &plane).unwrap();
        let (z2, p2) = lift_map(&mg, &z1, &p1).unwrap();
        let (zc, pc) = lift_map(&mgf, &z, &plane).unwrap();
        let dz: f64 = z2.iter().zip(&zc).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
        prop_assert!(dz < 1e-8 && p2.distance(&pc) < 1e-8);
    }
}
