//! Derivatives of the spectral functions at the flat metric along
//! `h⁴_E = 1 + E H + E² G`.
//!
//! The closed-form variations need auxiliary periodic functions `C(t)`, all
//! obtained from [`solve_poisson_periodic`] with kernel components set to zero.

use serde::Serialize;
use std::f64::consts::PI;

use crate::metric::ConformalMetric;
use crate::spectral::{OperatorKind, Parity, SLProblem, ZERO_MODE_THRESHOLD};
use crate::trigcalc::{solve_poisson_periodic, GridFn, TrigPoly};
use crate::{Error, Result, FOUR_PI_SQ};

/// Absolute tolerance on the defining integrals of the hypotheses.
pub const HYPOTHESIS_TOLERANCE: f64 = 1e-10;

/// Tolerance of the evenness test `H(t) = H(1 - t)`.
pub const SYMMETRY_TOLERANCE: f64 = 1e-10;

/// A named integral that a formula requires to vanish.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Hypothesis {
    pub name: String,
    pub residual: f64,
    pub holds: bool,
}

impl Hypothesis {
    fn new(name: &str, residual: f64) -> Self {
        Self { name: name.to_string(), residual, holds: residual.abs() <= HYPOTHESIS_TOLERANCE }
    }

    fn require(&self) -> Result<()> {
        if self.holds {
            Ok(())
        } else {
            Err(Error::HypothesisViolated { name: self.name.clone(), residual: self.residual })
        }
    }
}

/// Derivatives of order `order` of `μ₁, μ₂, μ₃, λ₁², λ₂² = λ₃²` at `E = 0`.
/// A branch is `None` when its hypotheses fail.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VariationReport {
    pub order: u32,
    pub mu1: Option<f64>,
    pub mu2: Option<f64>,
    pub mu3: Option<f64>,
    pub lam1sq: Option<f64>,
    pub lam23sq: Option<f64>,
    pub hypotheses: Vec<Hypothesis>,
}

fn sin1() -> TrigPoly {
    TrigPoly::sin_mode(1, 1.0)
}

fn cos1() -> TrigPoly {
    TrigPoly::cos_mode(1, 1.0)
}

fn integral(p: &TrigPoly, q: &TrigPoly) -> f64 {
    p.inner_product(q)
}

fn check_even(p: &TrigPoly) -> Result<()> {
    let residual = p.asymmetry();
    if residual > SYMMETRY_TOLERANCE {
        return Err(Error::SymmetryViolated { residual });
    }
    Ok(())
}

/// `∫H sin²(2πt)` and `∫H cos²(2πt)`.
fn split_integrals(h: &TrigPoly) -> (f64, f64) {
    let s = sin1();
    let c = cos1();
    (integral(h, &(&s * &s)), integral(h, &(&c * &c)))
}

/// First variations: `μ̇₁ = -8π²∫H sin²`, `μ̇₂ = -8π²∫H cos²`,
/// `μ̇₃ = λ̇²_α = -4π²∫H`.
pub fn first_variation(h: &TrigPoly) -> Result<VariationReport> {
    check_even(h)?;
    let (hs, hc) = split_integrals(h);
    let lam = -FOUR_PI_SQ * h.integrate();
    Ok(VariationReport {
        order: 1,
        mu1: Some(-2.0 * FOUR_PI_SQ * hs),
        mu2: Some(-2.0 * FOUR_PI_SQ * hc),
        mu3: Some(lam),
        lam1sq: Some(lam),
        lam23sq: Some(lam),
        hypotheses: vec![],
    })
}

/// Second variations, all five branches; fails unless
/// `∫H sin² = ∫H cos² = 0` and `H`, `G` are even.
pub fn second_variation(h: &TrigPoly, g: &TrigPoly) -> Result<VariationReport> {
    let report = second_variation_branches(h, g)?;
    for hyp in &report.hypotheses {
        hyp.require()?;
    }
    Ok(report)
}

/// Second variations of the branches whose first variation vanishes; the
/// others are `None`. `μ₁` needs `∫H sin² = 0`, `μ₂` needs `∫H cos² = 0`, and
/// `μ₃`, `λ₁²`, `λ₂₃²` need `∫H = 0`.
pub fn second_variation_branches(h: &TrigPoly, g: &TrigPoly) -> Result<VariationReport> {
    second_variation_offset(h, g, 0.0)
}

/// Adds `offset` times a kernel element to every auxiliary `C` before
/// assembly: the constant for the `ω² = 0` solves, `cos 2πt + sin 2πt` for
/// the resonant ones.
fn second_variation_offset(h: &TrigPoly, g: &TrigPoly, offset: f64) -> Result<VariationReport> {
    check_even(h)?;
    check_even(g)?;
    let pi2 = PI * PI;
    let (hs, hc) = split_integrals(h);
    let hyps = vec![
        Hypothesis::new("∫H sin²(2πt) dt", hs),
        Hypothesis::new("∫H cos²(2πt) dt", hc),
        Hypothesis::new("∫H dt", h.integrate()),
    ];
    let shift = |c: TrigPoly| &c + &TrigPoly::constant(offset);
    let (s, c) = (sin1(), cos1());
    let kernel = &(&s + &c) * offset;
    let int_g = g.integrate();

    let mu_resonant = |basis: &TrigPoly| -> Result<f64> {
        let f = &(h * basis) * (-FOUR_PI_SQ);
        let cc = &solve_poisson_periodic(&f, FOUR_PI_SQ)? + &kernel;
        Ok(-16.0 * pi2 * integral(g, &(basis * basis)) - 16.0 * pi2 * integral(&(h * &cc), basis))
    };
    let mu1 = if hyps[0].holds { Some(mu_resonant(&s)?) } else { None };
    let mu2 = if hyps[1].holds { Some(mu_resonant(&c)?) } else { None };

    let (mu3, lam1sq, lam23sq) = if hyps[2].holds {
        let c3 = shift(solve_poisson_periodic(&(h * -FOUR_PI_SQ), 0.0)?);
        let mu3 = -8.0 * pi2 * int_g - 8.0 * pi2 * integral(h, &c3);
        let h2 = integral(h, h);
        let lam1 = -8.0 * pi2 * int_g + 2.0 * pi2 * h2;
        let dh = h.derivative();
        let f = &(h * -FOUR_PI_SQ) - &(&dh * PI);
        let cd = shift(solve_poisson_periodic(&f, 0.0)?);
        let lam23 = -8.0 * pi2 * int_g + 4.0 * pi2 * h2 - 8.0 * pi2 * integral(h, &cd) - 2.0 * PI * integral(&dh, &cd);
        (Some(mu3), Some(lam1), Some(lam23))
    } else {
        (None, None, None)
    };
    Ok(VariationReport { order: 2, mu1, mu2, mu3, lam1sq, lam23sq, hypotheses: hyps })
}

/// `λ̈₃² - μ̈₃ - 2π²∫H²`, which vanishes whenever both branches are defined.
pub fn corollary_residual(report: &VariationReport, h: &TrigPoly) -> Option<f64> {
    Some(report.lam23sq? - report.mu3? - 2.0 * PI * PI * integral(h, h))
}

/// Which fourth-variation formula to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum FourthVariationFormula {
    /// The five-integral formula with the `C₁, C₂, C₃` chain, term for term.
    AsPrinted,
    /// Fourth-order Rayleigh–Schrödinger expansion of the `l = 1` problem.
    Perturbative,
}

/// `[λ₃²]⁽⁴⁾(0)` for `h⁴_E = 1 + E H` using the printed formula.
pub fn fourth_variation_dirac(h: &TrigPoly) -> Result<f64> {
    fourth_variation_dirac_with(h, FourthVariationFormula::AsPrinted)
}

pub fn fourth_variation_dirac_with(h: &TrigPoly, formula: FourthVariationFormula) -> Result<f64> {
    check_even(h)?;
    Hypothesis::new("λ̇₃²(0) / (-4π²) = ∫H dt", h.integrate()).require()?;
    let second = second_variation_branches(h, &TrigPoly::zero())?;
    let lam2 = second.lam23sq.unwrap_or(f64::NAN);
    Hypothesis::new("λ̈₃²(0)", lam2).require()?;
    match formula {
        FourthVariationFormula::AsPrinted => fourth_variation_printed(h),
        FourthVariationFormula::Perturbative => {
            let d = perturbation_series(OperatorKind::Dirac { l: 1 }, h, &TrigPoly::zero(), 4)?;
            Ok(d[4])
        }
    }
}

/// Whether `H'' = -16π²H` within rounding, in which case the `C₃` term drops.
pub fn is_c3_free(h: &TrigPoly) -> bool {
    let r = &h.nth_derivative(2) + &(h * (16.0 * PI * PI));
    r.max_coeff() <= 1e-12 * (16.0 * PI * PI) * h.max_coeff().max(f64::MIN_POSITIVE)
}

fn fourth_variation_printed(h: &TrigPoly) -> Result<f64> {
    let pi2 = PI * PI;
    let d1 = h.derivative();
    let d2 = d1.derivative();
    let hh = h * h;
    let d1sq = &d1 * &d1;
    let h_d2 = h * &d2;

    let f1 = &(&(h * (-4.0 * pi2)) - &(&d2 * 0.25)) - &(&d1 * PI);
    let c1 = solve_poisson_periodic(&f1, 0.0)?;

    let coef2 = &(&(h * (8.0 * pi2)) + &(&d2 * 0.5)) + &(&d1 * (2.0 * PI));
    let f2 = &(&(&(&h_d2 * 0.5) + &(&d1sq * 0.625)) + &(&(&d1 * h) * (2.0 * PI))) - &(&coef2 * &c1);
    let c2 = solve_poisson_periodic(&f2, 0.0)?;

    let mut total = 6.0 * (&hh * h).inner_product(&d2) + 22.5 * hh.inner_product(&d1sq)
        + (&(&d1sq * 2.5) + &(&h_d2 * 2.0)).inner_product(&c2)
        - (&(&(&d1sq * 15.0) + &(&h_d2 * 6.0)) * h).inner_product(&c1);

    if !is_c3_free(h) {
        let a = -&(&(&(&(&d2 * &hh) * 1.5) + &(&(h * &d1sq) * 3.75)) + &(&(&d1 * &hh) * (6.0 * PI)));
        let b = &(&(&(&h_d2 * 1.5) + &(&d1sq * 0.625)) + &(&(h * &d1) * 6.0)) * &c1;
        let coef3 = &(&(&d1 * (3.0 * PI)) + &(&d2 * 0.75)) + &(h * (4.0 * pi2));
        let f3 = &(&a + &b) - &(&coef3 * &c2);
        let c3 = solve_poisson_periodic(&f3, 0.0)?;
        total -= (&(h * (16.0 * pi2)) + &d2).inner_product(&c3);
    }
    Ok(total)
}

/// Taylor coefficients of `u = ¼ ln(1 + E H + E² G)` up to `order`.
fn log_quarter_series(h: &TrigPoly, g: &TrigPoly, order: usize) -> Vec<TrigPoly> {
    // x = E H + E² G; ln(1 + x) = Σ (-1)^{m+1} xᵐ / m.
    let mut x_pow: Vec<Vec<TrigPoly>> = vec![vec![TrigPoly::zero(); order + 1]];
    x_pow[0][0] = TrigPoly::constant(1.0);
    let mut x = vec![TrigPoly::zero(); order + 1];
    if order >= 1 {
        x[1] = h.clone();
    }
    if order >= 2 {
        x[2] = g.clone();
    }
    let mut u = vec![TrigPoly::zero(); order + 1];
    for m in 1..=order {
        let prev = &x_pow[m - 1];
        let mut next = vec![TrigPoly::zero(); order + 1];
        for i in 0..=order {
            for j in 1..=order - i {
                if prev[i].max_coeff() != 0.0 && x[j].max_coeff() != 0.0 {
                    next[i + j] = &next[i + j] + &(&prev[i] * &x[j]);
                }
            }
        }
        let sign = if m % 2 == 1 { 1.0 } else { -1.0 };
        for n in 0..=order {
            u[n] = &u[n] + &(&next[n] * (0.25 * sign / m as f64));
        }
        x_pow.push(next);
    }
    u
}

/// Derivatives `[λ(0), λ'(0), …, λ⁽ᵒʳᵈᵉʳ⁾(0)]` of the branch that starts from
/// the constant flat eigenfunction: Laplace `k = ±1` (`μ₃`) or Dirac `l`
/// (`l = ±1` gives `λ₂²`, `λ₃²`). Computed by Rayleigh–Schrödinger
/// perturbation theory in the normalization `∫A₀Aₙ = 0`.
pub fn perturbation_series(kind: OperatorKind, h: &TrigPoly, g: &TrigPoly, order: usize) -> Result<Vec<f64>> {
    let (lam0, v): (f64, Vec<TrigPoly>) = match kind {
        OperatorKind::Laplace { k } => {
            if k == 0 {
                return Err(Error::UnsupportedIndex(0));
            }
            let c = FOUR_PI_SQ * (k * k) as f64;
            let mut v = vec![TrigPoly::zero(); order + 1];
            v[0] = TrigPoly::constant(c);
            (c, v)
        }
        OperatorKind::Dirac { l } => {
            let u = log_quarter_series(h, g, order);
            let du: Vec<TrigPoly> = u.iter().map(|p| p.derivative()).collect();
            let lf = 4.0 * PI * l as f64;
            let v = (0..=order)
                .map(|n| {
                    let mut p = &(-&(&du[n] * lf)) - &du[n].derivative();
                    for i in 0..=n {
                        p = &p + &(&du[i] * &du[n - i]);
                    }
                    if n == 0 {
                        p = &p + &TrigPoly::constant(FOUR_PI_SQ * (l * l) as f64);
                    }
                    p
                })
                .collect();
            (FOUR_PI_SQ * (l * l) as f64, v)
        }
    };
    let mut w = vec![TrigPoly::zero(); order + 1];
    w[0] = TrigPoly::constant(1.0);
    if order >= 1 {
        w[1] = h.clone();
    }
    if order >= 2 {
        w[2] = g.clone();
    }
    let mut lam = vec![lam0];
    let mut a = vec![TrigPoly::constant(1.0)];
    for n in 1..=order {
        // -Aₙ'' = λₙ + Rₙ with Rₙ collecting all lower-order products.
        let mut r = TrigPoly::zero();
        for i in 0..=n {
            for j in 0..=n - i {
                let k = n - i - j;
                if k == n || i == n {
                    continue;
                }
                r = &r + &(&(&w[j] * &a[k]) * lam[i]);
            }
        }
        for i in 1..=n {
            r = &r - &(&v[i] * &a[n - i]);
        }
        let lam_n = -r.integrate();
        let rhs = -&(&r + &TrigPoly::constant(lam_n));
        let an = solve_poisson_periodic(&rhs, 0.0)?;
        lam.push(lam_n);
        a.push(an);
    }
    let mut fact = 1.0;
    Ok(lam
        .iter()
        .enumerate()
        .map(|(n, &c)| {
            if n > 0 {
                fact *= n as f64;
            }
            c * fact
        })
        .collect())
}

/// First variations under `g_E = (1 + E H) g₀` at a non-flat metric `g₀`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GeneralFirstVariation {
    /// `μ̇ = -μ ∫H A² h₀⁴ / ∫A² h₀⁴`.
    pub mu_dot: f64,
    /// `λ̇ = -λ ∫H A² h₀⁴ / (2∫A² h₀⁴)`, the derivative of `λ`, not `λ²`.
    pub lam_dot: f64,
    pub mu: f64,
    pub lam_sq: f64,
}

/// Selects the Laplace eigenvalue: weight `k`, parity sector, and the first
/// eigenvalue above the kernel threshold in that sector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LaplaceBranch {
    pub k: i32,
    pub parity: Parity,
}

/// See [`general_first_variation_grid`].
pub fn general_first_variation(
    m0: &ConformalMetric,
    h: &TrigPoly,
    laplace: LaplaceBranch,
    dirac_l: i32,
    truncation: usize,
) -> Result<GeneralFirstVariation> {
    general_first_variation_grid(m0, &h.sample(m0.grid()), laplace, dirac_l, truncation)
}

/// The first-variation quotients evaluated with solved eigenfunctions.
/// Both eigenvalues must be simple within their sector (gap above `1e-8`).
pub fn general_first_variation_grid(
    m0: &ConformalMetric,
    h: &GridFn,
    laplace: LaplaceBranch,
    dirac_l: i32,
    truncation: usize,
) -> Result<GeneralFirstVariation> {
    let lap = SLProblem::laplace(m0, laplace.k, truncation).with_parity(laplace.parity).solve(4)?;
    let first = lap
        .iter()
        .position(|m| m.value > ZERO_MODE_THRESHOLD)
        .ok_or(Error::NoConvergence { iterations: 0 })?;
    check_simple(&lap.iter().map(|m| m.value).collect::<Vec<_>>(), first)?;
    let dir = SLProblem::dirac(m0, dirac_l, truncation).solve(2)?;
    check_simple(&dir.iter().map(|m| m.value).collect::<Vec<_>>(), 0)?;

    let quotient = |a: &TrigPoly| {
        let dens = a.sample(m0.grid()).map(|v| v * v).zip_with(m0.h4(), |a2, w| a2 * w);
        dens.zip_with(h, |d, hv| d * hv).quadrature() / dens.quadrature()
    };
    let mu = lap[first].value;
    let lam_sq = dir[0].value;
    Ok(GeneralFirstVariation {
        mu_dot: -mu * quotient(&lap[first].eigenfunction),
        lam_dot: -lam_sq.sqrt() * quotient(&dir[0].eigenfunction) / 2.0,
        mu,
        lam_sq,
    })
}

fn check_simple(values: &[f64], i: usize) -> Result<()> {
    let mut gap = f64::INFINITY;
    if i > 0 && values[i - 1] > ZERO_MODE_THRESHOLD {
        gap = gap.min(values[i] - values[i - 1]);
    }
    if i + 1 < values.len() {
        gap = gap.min(values[i + 1] - values[i]);
    }
    if gap <= 1e-8 {
        return Err(Error::EigenvalueNotSimple { gap });
    }
    Ok(())
}
