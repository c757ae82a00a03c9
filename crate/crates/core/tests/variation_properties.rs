use proptest::prelude::*;
use torus_spec::metric::{ConformalMetric, DeformationFamily};
use torus_spec::spectral::{Parity, SLProblem};
use torus_spec::trigcalc::TrigPoly;
use torus_spec::variations::{
    corollary_residual, first_variation, general_first_variation, general_first_variation_grid, second_variation,
    LaplaceBranch,
};
use torus_spec::Error;

const M: usize = 4096;

fn even_poly() -> impl Strategy<Value = TrigPoly> {
    (-1.0f64..1.0, prop::collection::vec(-1.0f64..1.0, 1..6)).prop_map(|(a0, cos)| TrigPoly::new(a0, cos, vec![]))
}

/// Even `H` with `a₀ = a₂ = 0`, which is what `∫H sin² = ∫H cos² = 0` requires.
fn admissible_h() -> impl Strategy<Value = TrigPoly> {
    prop::collection::vec(-1.0f64..1.0, 3..6).prop_map(|mut cos| {
        cos[1] = 0.0;
        TrigPoly::new(0.0, cos, vec![])
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn first_variation_identity(h in even_poly()) {
        let r = first_variation(&h).unwrap();
        let (m1, m2, m3) = (r.mu1.unwrap(), r.mu2.unwrap(), r.mu3.unwrap());
        prop_assert!((m1 + m2 - 2.0 * m3).abs() <= 1e-12 * (1.0 + m3.abs()));
        prop_assert_eq!(r.mu3, r.lam1sq);
        prop_assert_eq!(r.mu3, r.lam23sq);
    }

    #[test]
    fn corollary_identity(h in admissible_h(), g in even_poly()) {
        let r = second_variation(&h, &g).unwrap();
        prop_assert!(corollary_residual(&r, &h).unwrap().abs() <= 1e-10);
    }

    #[test]
    fn odd_h_is_rejected(b in 0.1f64..1.0) {
        let h = TrigPoly::new(0.0, vec![], vec![b]);
        prop_assert!(
            matches!(first_variation(&h), Err(Error::SymmetryViolated { .. })),
            "odd H must be rejected"
        );
    }
}

#[test]
fn second_variation_needs_hypotheses() {
    let h = TrigPoly::cos_mode(2, 1.0);
    assert!(matches!(second_variation(&h, &TrigPoly::zero()), Err(Error::HypothesisViolated { .. })));
}

#[test]
fn second_variation_is_linear_in_g() {
    let h = TrigPoly::cos_mode(3, 1.0);
    let g = TrigPoly::new(0.2, vec![0.5, -0.3], vec![]);
    let a = second_variation(&h, &TrigPoly::zero()).unwrap();
    let b = second_variation(&h, &g).unwrap();
    let c = second_variation(&TrigPoly::zero(), &g).unwrap();
    for (x, y, z) in [(a.mu1, b.mu1, c.mu1), (a.mu3, b.mu3, c.mu3), (a.lam1sq, b.lam1sq, c.lam1sq), (a.lam23sq, b.lam23sq, c.lam23sq)] {
        assert!((x.unwrap() + z.unwrap() - y.unwrap()).abs() < 1e-10);
    }
}

/// Centered difference of `μ` and `λ` along `h₀⁴(1 + εH)`.
fn finite_difference(m0: &ConformalMetric, h: &TrigPoly, branch: LaplaceBranch, l: i32) -> (f64, f64) {
    let step = 1e-3;
    let at = |eps: f64| {
        let h4 = m0.h4().zip_with(&h.sample(M), |w, hv| w * (1.0 + eps * hv));
        let m = ConformalMetric::from_grid(h4).unwrap();
        let lap = SLProblem::laplace(&m, branch.k, 64).with_parity(branch.parity).solve(3).unwrap();
        let mu = lap.into_iter().find(|x| x.value > 1e-6).unwrap().value;
        let lam = SLProblem::dirac(&m, l, 64).solve(1).unwrap()[0].value.sqrt();
        (mu, lam)
    };
    let (p, q) = (at(step), at(-step));
    ((p.0 - q.0) / (2.0 * step), (p.1 - q.1) / (2.0 * step))
}

#[test]
fn general_first_variation_matches_finite_differences() {
    let m0 = DeformationFamily::cosine(2).eval(-0.3, M).unwrap();
    let cases = [
        (TrigPoly::cos_mode(1, 1.0), LaplaceBranch { k: 1, parity: Parity::Full }, 1),
        (TrigPoly::new(0.3, vec![0.0, 0.5, 0.2], vec![]), LaplaceBranch { k: 0, parity: Parity::Odd }, -1),
        (TrigPoly::new(0.0, vec![0.4], vec![0.3]), LaplaceBranch { k: 1, parity: Parity::Full }, 1),
    ];
    for (h, branch, l) in cases {
        let g = general_first_variation(&m0, &h, branch, l, 64).unwrap();
        let (mu_fd, lam_fd) = finite_difference(&m0, &h, branch, l);
        assert!((g.mu_dot - mu_fd).abs() < 1e-5 * g.mu.abs(), "{} vs {mu_fd}", g.mu_dot);
        assert!((g.lam_dot - lam_fd).abs() < 1e-5 * g.lam_sq.sqrt(), "{} vs {lam_fd}", g.lam_dot);
    }
}

#[test]
fn general_first_variation_along_mathieu_family() {
    // d/dE of h⁴ = 1 + E cos 4πt at E₀ is h₀⁴ · (cos 4πt / h₀⁴).
    let e0 = -0.3;
    let fam = DeformationFamily::cosine(2);
    let m0 = fam.eval(e0, M).unwrap();
    let c = TrigPoly::cos_mode(2, 1.0).sample(M);
    let h = c.zip_with(m0.h4(), |a, w| a / w);
    let branch = LaplaceBranch { k: 1, parity: Parity::Full };
    let g = general_first_variation_grid(&m0, &h, branch, 1, 64).unwrap();
    let step = 1e-3;
    let lam = |e: f64| SLProblem::dirac(&fam.eval(e, M).unwrap(), 1, 64).solve(1).unwrap()[0].value.sqrt();
    let mu = |e: f64| SLProblem::laplace(&fam.eval(e, M).unwrap(), 1, 64).solve(1).unwrap()[0].value;
    let lam_fd = (lam(e0 + step) - lam(e0 - step)) / (2.0 * step);
    let mu_fd = (mu(e0 + step) - mu(e0 - step)) / (2.0 * step);
    assert!((g.lam_dot - lam_fd).abs() < 1e-5, "{} vs {lam_fd}", g.lam_dot);
    assert!((g.mu_dot - mu_fd).abs() < 1e-5, "{} vs {mu_fd}", g.mu_dot);
}

#[test]
fn general_first_variation_rejects_multiple_eigenvalues() {
    // On the flat torus the first k = 0 positive eigenvalue is double.
    let flat = ConformalMetric::flat(M).unwrap();
    let h = TrigPoly::cos_mode(1, 1.0);
    let branch = LaplaceBranch { k: 0, parity: Parity::Full };
    assert!(matches!(
        general_first_variation(&flat, &h, branch, 1, 16),
        Err(Error::EigenvalueNotSimple { .. })
    ));
}
