use std::f64::consts::PI;

use proptest::prelude::*;
use torus_spec::bounds::{
    all_bounds, conformal_sandwich, laplace_dirac_gap_bound, limit_closed_form, limit_quotient, limit_test_function,
    positivity_upper_bound, potential_mean_bound, rayleigh_upper_dirac, rayleigh_upper_laplace, BoundKind,
    TestFunction,
};
use torus_spec::metric::{ConformalMetric, DeformationFamily};
use torus_spec::spectral::{Parity, SLProblem, SpectralFunctions};
use torus_spec::trigcalc::{GridFn, TrigPoly};

const M: usize = 4096;
const N: usize = 32;
const SLACK: f64 = 1e-8;

fn symmetric(a: f64, b: f64, c: f64) -> ConformalMetric {
    ConformalMetric::from_trig(TrigPoly::new(1.0, vec![a, b, c], vec![]), M).unwrap()
}

#[test]
fn limit_quotient_matches_closed_form() {
    for l in 1..=4 {
        let q = limit_quotient(l, &limit_test_function(l)).unwrap();
        let want = limit_closed_form(l);
        assert!((q - want).abs() <= 1e-6 * want, "l={l}: {q} vs {want}");
    }
    assert!((limit_closed_form(1) - 8.0 * PI * PI).abs() < 1e-12);
    assert!((limit_closed_form(3) - 600.0 * PI * PI / 19.0).abs() < 1e-10);
    for l in 3..=6 {
        assert!(limit_closed_form(l) < 4.0 * (l * l) as f64 * PI * PI);
    }
}

#[test]
fn dirac_rayleigh_limit_with_grid_witness() {
    let e = -0.999;
    let m = DeformationFamily::cosine(2).eval(e, 8192).unwrap();
    let f = GridFn::from_fn(8192, |t| (1.0 + e * (4.0 * PI * t).cos()).powf(0.25) * (2.0 * PI * t).sin());
    let v = rayleigh_upper_dirac(&m, TestFunction::Grid(&f)).unwrap();
    assert!((v - 5.0 * PI * PI).abs() < 0.05 * PI * PI, "{}", v / (PI * PI));
}

#[test]
fn mathieu_limit_respects_rayleigh_bounds() {
    let m = DeformationFamily::cosine(2).eval_allow_degenerate(-1.0, M).unwrap();
    let sf = SpectralFunctions::compute(&m, 64).unwrap();
    let s = TrigPoly::sin_mode(1, 1.0);
    assert!(sf.mu1 <= rayleigh_upper_laplace(&m, &s).unwrap());
    assert!(sf.mu1 >= 2.0 * PI * PI);
}

#[test]
fn all_bounds_dominate_on_mathieu_family() {
    for e in [-0.9, -0.3, 0.3, 0.9] {
        let m = DeformationFamily::cosine(2).eval(e, M).unwrap();
        let sf = SpectralFunctions::compute(&m, N).unwrap();
        let odd = SLProblem::laplace(&m, 0, N).with_parity(Parity::Odd).solve(1).unwrap().remove(0);
        let reports = all_bounds(&m, Some(&odd));
        assert_eq!(reports.len(), 7);
        for r in reports {
            assert!(r.value.is_finite());
            let target = match r.kind {
                BoundKind::SandwichLower => continue,
                BoundKind::SandwichUpper => sf.laplace_min().max(sf.dirac_min()),
                BoundKind::RayleighLaplace => sf.mu1,
                BoundKind::RayleighDirac | BoundKind::LaplaceDiracGap => sf.dirac_min(),
                _ => sf.lam3sq.unwrap(),
            };
            assert!(r.value >= target - SLACK, "{:?} at {e}: {} < {target}", r.kind, r.value);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn bounds_dominate_on_random_symmetric_metrics(a in -0.3f64..0.3, b in -0.3f64..0.3, c in -0.3f64..0.3) {
        let m = symmetric(a, b, c);
        let sf = SpectralFunctions::compute(&m, N).unwrap();
        let (lap, dir) = (sf.laplace_min(), sf.dirac_min());
        let (lo, hi) = conformal_sandwich(&m);
        for v in [lap, dir] {
            prop_assert!(lo - SLACK <= v && v <= hi + SLACK);
        }
        let s = TrigPoly::sin_mode(1, 1.0);
        prop_assert!(rayleigh_upper_laplace(&m, &s).unwrap() >= sf.mu1 - SLACK);
        prop_assert!(rayleigh_upper_dirac(&m, TestFunction::Poly(&s)).unwrap() >= dir - SLACK);
        let odd = SLProblem::laplace(&m, 0, N).with_parity(Parity::Odd).solve(1).unwrap().remove(0);
        prop_assert!(laplace_dirac_gap_bound(&m, &odd).unwrap() >= dir - SLACK);
        for (l, lam) in [(1, sf.lam3sq.unwrap()), (-1, sf.lam2sq.unwrap())] {
            prop_assert!(positivity_upper_bound(&m, l, &limit_test_function(l)).unwrap() >= lam - SLACK);
            prop_assert!(potential_mean_bound(&m, l).unwrap() >= lam - SLACK);
        }
    }

    #[test]
    fn positivity_bound_holds_for_any_phi(a0 in -1.0f64..1.0, c1 in -1.0f64..1.0, s1 in -1.0f64..1.0, s2 in -1.0f64..1.0) {
        prop_assume!(a0.abs() + c1.abs() + s1.abs() + s2.abs() > 0.1);
        let m = DeformationFamily::cosine(1).eval(-0.5, M).unwrap();
        let phi = TrigPoly::new(a0, vec![c1], vec![s1, s2]);
        let lam = SLProblem::dirac(&m, 1, N).solve(1).unwrap()[0].value;
        prop_assert!(positivity_upper_bound(&m, 1, &phi).unwrap() >= lam - SLACK);
    }
}
