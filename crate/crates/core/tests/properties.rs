use accretive::bounds::{self, BoundsProfile};
use accretive::config::{ExperimentConfig, LambdaSpec, SamplerSpec};
use accretive::fixtures;
use accretive::holomap::{self, inner_product, CMatrix, CVector, GeneratorMap, HomogeneousTerm, Monomial, SphereSampler};
use accretive::numrange::{accretivity_constant, support_function};
use accretive::resolvent::ResolventFamily;
use num_complex::Complex64;
use proptest::prelude::*;

fn complex() -> impl Strategy<Value = Complex64> {
    (-1.0f64..1.0, -1.0f64..1.0).prop_map(|(re, im)| Complex64::new(re, im))
}

fn vector(dim: usize) -> impl Strategy<Value = CVector> {
    prop::collection::vec(complex(), dim).prop_map(CVector::new)
}

fn ball_point(dim: usize, max_radius: f64) -> impl Strategy<Value = CVector> {
    (vector(dim), 0.01f64..max_radius).prop_filter_map("nonzero", |(v, r)| v.normalized().map(|u| u.scale_real(r)))
}

fn matrix(dim: usize) -> impl Strategy<Value = CMatrix> {
    prop::collection::vec(prop::collection::vec(complex(), dim), dim).prop_map(|rows| CMatrix::from_rows(rows).unwrap())
}

fn term(dim: usize, degree: u32) -> impl Strategy<Value = HomogeneousTerm> {
    prop::collection::vec((0..dim, prop::collection::vec(0u32..=degree, dim), complex()), 1..4).prop_map(
        move |raw| {
            let monomials = raw
                .into_iter()
                .map(|(component, mut exps, coeff)| {
                    let total: u32 = exps.iter().sum();
                    if total < degree {
                        exps[0] += degree - total;
                    } else {
                        let mut excess = total - degree;
                        for e in exps.iter_mut() {
                            let cut = excess.min(*e);
                            *e -= cut;
                            excess -= cut;
                        }
                    }
                    Monomial::new(component, exps, coeff)
                })
                .collect();
            HomogeneousTerm::new(dim, degree, monomials).unwrap()
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn inner_product_is_hermitian(x in vector(3), y in vector(3), c in complex()) {
        let xy = inner_product(&x, &y).unwrap();
        let yx = inner_product(&y, &x).unwrap();
        prop_assert!((xy - yx.conj()).norm() <= 1e-14);
        let cx = inner_product(&x.scale(c), &y).unwrap();
        prop_assert!((cx - c * xy).norm() <= 1e-14);
        prop_assert!((inner_product(&x, &x).unwrap().re - x.norm_sqr()).abs() <= 1e-14);
    }

    #[test]
    fn homogeneous_term_scales(p in term(2, 3), x in vector(2), t in complex()) {
        let lhs = p.eval(&x.scale(t)).unwrap();
        let rhs = p.eval(&x).unwrap().scale(t.powu(3));
        prop_assert!(lhs.distance(&rhs) <= 1e-12 * rhs.norm().max(1.0));
    }

    #[test]
    fn frechet_matches_difference_quotient(x in ball_point(2, 0.9), v in vector(2)) {
        let f = fixtures::quadratic().generator;
        let h = 1e-6;
        let fp = f.eval(&x.axpy(Complex64::new(h, 0.0), &v)).unwrap();
        let fm = f.eval(&x.axpy(Complex64::new(-h, 0.0), &v)).unwrap();
        let fd = (&fp - &fm).scale_real(0.5 / h);
        let exact = f.frechet(&x).unwrap().mul_vec(&v).unwrap();
        prop_assert!(fd.distance(&exact) <= 1e-6);
    }

    #[test]
    fn rational_series_resums(d1 in complex(), n2 in complex(), z in ball_point(1, 0.5)) {
        let den = vec![Complex64::new(1.0, 0.0), d1 * 0.5];
        let num = vec![Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0), n2];
        let g = GeneratorMap::rational_disk(num, den).unwrap();
        let c = g.rational_series(60).unwrap();
        let zz = z[0];
        let series = c.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, ck| acc * zz + ck);
        prop_assert!((series - g.eval(&z).unwrap()[0]).norm() <= 1e-12);
    }

    #[test]
    fn support_function_is_sublinear(a in matrix(2), b in matrix(2), theta in 0.0f64..6.3, s in 0.1f64..10.0) {
        let ka = support_function(&a, theta);
        prop_assert!((support_function(&(&a * s), theta) - s * ka).abs() <= 1e-10 * ka.abs().max(1.0) * s);
        let kab = support_function(&(&a + &b), theta);
        prop_assert!(kab <= ka + support_function(&b, theta) + 1e-10);
    }

    #[test]
    fn numerical_range_lies_in_half_planes(a in matrix(2), x in vector(2), theta in 0.0f64..6.3) {
        if let Some(u) = x.normalized() {
            let w = a.mul_vec(&u).unwrap().inner(&u).unwrap();
            prop_assert!((Complex64::from_polar(1.0, -theta) * w).re <= support_function(&a, theta) + 1e-10);
        }
    }

    #[test]
    fn sampled_accretivity_scales(c in 0.1f64..5.0, seed in 0u64..1000) {
        let s = SphereSampler::with_default_radii(seed, 8).unwrap();
        for fx in fixtures::corpus() {
            let a1 = accretivity_constant(&fx.generator, &s).a_star;
            let ac = accretivity_constant(&fx.generator.scaled(c), &s).a_star;
            prop_assert!((ac - c * a1).abs() <= 1e-12 * c.max(1.0) * a1.abs().max(1.0));
        }
    }

    #[test]
    fn inverse_order_disk_equivalence(s in complex().prop_map(|z| z * 3.0), gamma in 0.01f64..1.0) {
        prop_assume!(s.norm() > 1e-6);
        let lhs = (1.0 / s).re - gamma;
        let rhs = 1.0 / (2.0 * gamma) - (s - 1.0 / (2.0 * gamma)).norm();
        prop_assume!(lhs.abs() > 1e-9 && rhs.abs() > 1e-9);
        prop_assert_eq!(lhs > 0.0, rhs > 0.0);
    }

    #[test]
    fn resolvent_solves_and_shrinks(x in ball_point(2, 0.9999), lambda in 0.01f64..100.0) {
        let q = fixtures::quadratic();
        let fam = ResolventFamily::new(q.generator.clone(), q.a).unwrap();
        let r = fam.solve(lambda, &x).unwrap();
        prop_assert!(r.converged);
        let lhs = r.w.axpy(Complex64::new(lambda, 0.0), &q.generator.eval(&r.w).unwrap());
        prop_assert!(lhs.distance(&x) <= 1e-10);
        prop_assert!(r.w.norm() <= x.norm() + 1e-12);
    }

    #[test]
    fn alpha_beta_ordered(a in 0.0f64..2.0, extra in 0.0f64..3.0, lambda in 0.001f64..1000.0) {
        let k = -(a + extra).max(1e-3);
        let m = a.max(-k);
        let p = BoundsProfile::new(a, k, a + 1.0).unwrap().with_sup_norm(move |r| m * r * (1.0 + r) / (1.0 - r));
        let alpha = bounds::alpha(&p, lambda);
        prop_assert!(alpha > 0.0 && alpha <= 1.0);
        let beta = bounds::beta(&p, lambda).unwrap().value;
        prop_assert!(beta >= 0.0 && beta <= alpha * (1.0 + 1e-14));
        prop_assert!((bounds::a_lambda(&p, lambda) - bounds::a_lambda_from_alpha(&p, lambda)).abs() <= 1e-12);
        prop_assert!(bounds::alpha(&p, lambda * 1.5) <= alpha);
    }

    #[test]
    fn gamma_order_decreasing(t1 in 1e-6f64..0.4721, t2 in 1e-6f64..0.4721) {
        let (lo, hi) = if t1 < t2 { (t1, t2) } else { (t2, t1) };
        let (g_lo, g_hi) = (bounds::gamma_order(lo).unwrap(), bounds::gamma_order(hi).unwrap());
        prop_assert!(g_hi <= g_lo + 1e-15);
        prop_assert!((0.0..=1.0).contains(&g_hi));
    }

    #[test]
    fn config_round_trips(seed in any::<u64>(), count in 1usize..500, lambdas in prop::collection::vec(0.001f64..1e4, 1..8), t_end in 0.1f64..10.0) {
        let mut cfg = ExperimentConfig::from_json(r#"{"sampler": {"seed": 0}}"#).unwrap();
        cfg.sampler = SamplerSpec { seed, count, ..cfg.sampler.clone() };
        cfg.lambdas = Some(LambdaSpec::List(lambdas));
        cfg.semigroup.t_end = t_end;
        cfg.certified_a = Some(0.25);
        let back = ExperimentConfig::from_json(&cfg.to_json().unwrap()).unwrap();
        prop_assert_eq!(back, cfg);
    }
}

#[test]
fn sup_norm_is_monotone() {
    let s = SphereSampler::with_default_radii(3, 32).unwrap();
    for fx in fixtures::corpus() {
        let m: Vec<f64> = (1..10)
            .map(|k| holomap::sup_norm(&fx.generator, k as f64 / 10.0, &s).unwrap())
            .collect();
        assert!(m.windows(2).all(|w| w[1] >= w[0]), "{}: {m:?}", fx.name);
    }
}
