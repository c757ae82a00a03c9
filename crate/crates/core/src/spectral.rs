//! Fourier–Galerkin solution of the reduced eigenvalue problems.
//!
//! Laplace, weight `k`: `-A'' + 4π²k² A = μ h⁴ A`.
//!
//! Dirac, weight `l`: `H_l A = λ² h⁴ A` with `H_l = -d²/dt² + V_l` and
//! `V_l = 4π²l² - 4πl u' - (u'' - u'²)`, `u = ¼ ln h⁴`.
//!
//! The basis is `{1, √2 cos 2πnt, √2 sin 2πnt}` for `n ≤ N`. Galerkin matrices
//! of a multiplier `w` are assembled from its Fourier coefficients up to degree
//! `2N`, which equals `M`-point quadrature of the basis products.

use serde::Serialize;

use crate::eigsolve::{gen_eig, sym_eig, SymMatrix};
use crate::metric::ConformalMetric;
use crate::trigcalc::{GridFn, TrigPoly};
use crate::{Error, Result, FOUR_PI_SQ};

use std::f64::consts::{PI, SQRT_2};

/// Laplace eigenvalues below this count as the constant kernel.
pub const ZERO_MODE_THRESHOLD: f64 = 1e-8 * FOUR_PI_SQ;

/// Grid minimum an eigenfunction must exceed to count as positive.
pub const POSITIVITY_THRESHOLD: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum OperatorKind {
    Laplace { k: i32 },
    Dirac { l: i32 },
}

impl OperatorKind {
    pub fn weight_index(self) -> i32 {
        match self {
            OperatorKind::Laplace { k } => k,
            OperatorKind::Dirac { l } => l,
        }
    }
}

/// Restriction to functions even (`1, cos`) or odd (`sin`) about `t = 1/2`.
/// Only meaningful when the operator commutes with `t ↦ 1 - t`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Parity {
    Full,
    Even,
    Odd,
}

/// A reduced eigenproblem on a fixed metric.
#[derive(Debug, Clone, Copy)]
pub struct SLProblem<'a> {
    pub kind: OperatorKind,
    pub metric: &'a ConformalMetric,
    pub truncation: usize,
    pub parity: Parity,
}

/// One solved eigenpair.
#[derive(Debug, Clone, Serialize)]
pub struct EigenMode {
    pub value: f64,
    pub kind: OperatorKind,
    /// `A(t)`, normalized by `∫A² h⁴ dt = 1`.
    pub eigenfunction: TrigPoly,
    /// `L²` norm of `-A'' + V A - value·h⁴ A` on the grid.
    pub residual: f64,
    /// No sign change on the grid: `min A > POSITIVITY_THRESHOLD`.
    pub positive: bool,
    pub min_value: f64,
}

impl EigenMode {
    pub fn weight_index(&self) -> i32 {
        self.kind.weight_index()
    }

    /// Whether the residual is within `1e-6·|value|`.
    pub fn residual_ok(&self) -> bool {
        self.residual <= 1e-6 * self.value.abs().max(1.0)
    }
}

impl<'a> SLProblem<'a> {
    pub fn new(kind: OperatorKind, metric: &'a ConformalMetric, truncation: usize) -> Self {
        Self { kind, metric, truncation, parity: Parity::Full }
    }

    pub fn laplace(metric: &'a ConformalMetric, k: i32, truncation: usize) -> Self {
        Self::new(OperatorKind::Laplace { k }, metric, truncation)
    }

    pub fn dirac(metric: &'a ConformalMetric, l: i32, truncation: usize) -> Self {
        Self::new(OperatorKind::Dirac { l }, metric, truncation)
    }

    pub fn with_parity(mut self, parity: Parity) -> Self {
        self.parity = parity;
        self
    }

    pub fn with_truncation(mut self, truncation: usize) -> Self {
        self.truncation = truncation;
        self
    }

    /// Indices of the retained basis functions.
    pub fn basis(&self) -> Vec<usize> {
        let n = self.truncation;
        match self.parity {
            Parity::Full => (0..=2 * n).collect(),
            Parity::Even => std::iter::once(0).chain((1..=n).map(|m| 2 * m - 1)).collect(),
            Parity::Odd => (1..=n).map(|m| 2 * m).collect(),
        }
    }

    fn check(&self) -> Result<()> {
        if self.parity != Parity::Full {
            if !self.metric.is_symmetric() {
                return Err(Error::MetricNotSymmetric);
            }
            if let OperatorKind::Dirac { l } = self.kind {
                if l != 0 {
                    return Err(Error::InvalidSpec(format!(
                        "the Dirac operator with l = {l} does not preserve parity"
                    )));
                }
            }
        }
        Ok(())
    }

    /// The potential `V` on the metric grid.
    pub fn potential(&self) -> Result<GridFn> {
        potential(self.metric, self.kind)
    }

    /// `(K, B)` on the retained basis.
    pub fn assemble(&self) -> Result<(SymMatrix, SymMatrix)> {
        self.check()?;
        let n = self.truncation;
        if self.metric.grid() < 4 * n + 1 {
            return Err(Error::Undersampled { samples: self.metric.grid(), degree: 2 * n });
        }
        let weight = weight_poly(self.metric, 2 * n)?;
        let mut k = match self.kind {
            OperatorKind::Laplace { k } => {
                let c = FOUR_PI_SQ * (k * k) as f64;
                SymMatrix::from_diag(&vec![c; 2 * n + 1])
            }
            OperatorKind::Dirac { .. } => {
                galerkin_matrix(&TrigPoly::from_samples(&self.potential()?, 2 * n)?, n)
            }
        };
        for i in 1..=2 * n {
            k.add(i, i, (2.0 * PI * mode_of(i) as f64).powi(2));
        }
        let b = galerkin_matrix(&weight, n);
        let idx = self.basis();
        Ok((k.submatrix(&idx), b.submatrix(&idx)))
    }

    /// The `count` lowest eigenpairs.
    pub fn solve(&self, count: usize) -> Result<Vec<EigenMode>> {
        let (k, b) = self.assemble()?;
        let dec = gen_eig(&k, &b)?;
        let idx = self.basis();
        let v = self.potential()?;
        dec.values
            .iter()
            .zip(&dec.vectors)
            .take(count)
            .map(|(&value, x)| Ok(self.mode(value, &coefficients_to_poly(x, &idx, self.truncation), &v)))
            .collect()
    }

    fn mode(&self, value: f64, a: &TrigPoly, v: &GridFn) -> EigenMode {
        let m = self.metric.grid();
        let grid_a = a.sample(m);
        let a2 = a.nth_derivative(2).sample(m);
        let h4 = self.metric.h4().values();
        let r: f64 = (0..m)
            .map(|j| {
                let aj = grid_a.values()[j];
                let rj = -a2.values()[j] + v.values()[j] * aj - value * h4[j] * aj;
                rj * rj
            })
            .sum::<f64>()
            / m as f64;
        let min_value = grid_a.min();
        EigenMode {
            value,
            kind: self.kind,
            eigenfunction: a.clone(),
            residual: r.sqrt(),
            positive: min_value > POSITIVITY_THRESHOLD,
            min_value,
        }
    }

    /// Solves with truncations `N, 2N, 4N, …` until the `count` lowest values
    /// change by at most `rel_tol` relative, or `max_truncation` is reached.
    /// Returns the modes of the last solve and the truncation used.
    pub fn solve_converged(&self, count: usize, rel_tol: f64, max_truncation: usize) -> Result<(Vec<EigenMode>, usize)> {
        let mut n = self.truncation.max(1);
        let mut prev = self.with_truncation(n).solve(count)?;
        while 2 * n <= max_truncation {
            n *= 2;
            let next = self.with_truncation(n).solve(count)?;
            let done = prev
                .iter()
                .zip(&next)
                .all(|(a, b)| (a.value - b.value).abs() <= rel_tol * b.value.abs().max(1.0));
            prev = next;
            if done {
                break;
            }
        }
        Ok((prev, n))
    }
}

/// Potential term of the reduced operator.
pub fn potential(metric: &ConformalMetric, kind: OperatorKind) -> Result<GridFn> {
    match kind {
        OperatorKind::Laplace { k } => {
            Ok(GridFn::new(vec![FOUR_PI_SQ * (k * k) as f64; metric.grid()]))
        }
        OperatorKind::Dirac { l } => {
            let jet = metric.jet()?;
            let c = FOUR_PI_SQ * (l * l) as f64;
            let lf = 4.0 * PI * l as f64;
            Ok(jet.u1.zip_with(&jet.curv, |u1, curv| c - lf * u1 - curv))
        }
    }
}

/// Coefficients of `h⁴` up to `degree`: exact when the metric was given as a
/// polynomial, otherwise from the grid.
pub fn weight_poly(metric: &ConformalMetric, degree: usize) -> Result<TrigPoly> {
    match metric.h4_poly() {
        Some(p) if 2 * p.degree() < metric.grid() => Ok(p.truncate(degree)),
        _ => TrigPoly::from_samples(metric.h4(), degree),
    }
}

/// Harmonic of basis index `i`.
fn mode_of(i: usize) -> usize {
    (i + 1) / 2
}

/// Galerkin matrix `∫ φᵢ φⱼ w dt` on the full basis of degree `n`, from the
/// coefficients of `w` (degree at least `2n` for exactness).
pub fn galerkin_matrix(w: &TrigPoly, n: usize) -> SymMatrix {
    let c = |k: usize| if k == 0 { w.mean() } else { 0.5 * w.cos_coeff(k) };
    let s = |k: i64| {
        let v = 0.5 * w.sin_coeff(k.unsigned_abs() as usize);
        if k > 0 {
            v
        } else if k < 0 {
            -v
        } else {
            0.0
        }
    };
    SymMatrix::from_fn(2 * n + 1, |i, j| {
        let (a, b) = (mode_of(i), mode_of(j));
        let (ci, cj) = (i % 2 == 1, j % 2 == 1);
        match (i, j) {
            (0, 0) => w.mean(),
            (0, _) => {
                if cj {
                    SQRT_2 * c(b)
                } else {
                    SQRT_2 * s(b as i64)
                }
            }
            _ => match (ci, cj) {
                (true, true) => c(a.abs_diff(b)) + c(a + b),
                (false, false) => c(a.abs_diff(b)) - c(a + b),
                (true, false) => s((a + b) as i64) + s(b as i64 - a as i64),
                (false, true) => s((a + b) as i64) + s(a as i64 - b as i64),
            },
        }
    })
}

fn coefficients_to_poly(x: &[f64], idx: &[usize], n: usize) -> TrigPoly {
    let (mut a0, mut cos, mut sin) = (0.0, vec![0.0; n], vec![0.0; n]);
    for (&i, &v) in idx.iter().zip(x) {
        if i == 0 {
            a0 = v;
        } else if i % 2 == 1 {
            cos[mode_of(i) - 1] = SQRT_2 * v;
        } else {
            sin[mode_of(i) - 1] = SQRT_2 * v;
        }
    }
    TrigPoly::new(a0, cos, sin)
}

/// `λ² = 4π²n² / (∫h² dt)²`, the `n`-th positive `l = 0` Dirac eigenvalue
/// (each of multiplicity two).
pub fn dirac_l0_closed_form(metric: &ConformalMetric, n: u32) -> f64 {
    let s = metric.h2_integral();
    FOUR_PI_SQ * (n * n) as f64 / (s * s)
}

/// Smallest positive Laplace eigenvalue with its weight and mode.
#[derive(Debug, Clone, Serialize)]
pub struct FirstLaplace {
    pub value: f64,
    pub k: i32,
    pub mode: EigenMode,
}

/// Lowest eigenvalue above the kernel threshold.
pub fn lowest_positive(modes: Vec<EigenMode>, threshold: f64) -> Option<EigenMode> {
    modes.into_iter().find(|m| m.value > threshold)
}

/// Minimum over `k ∈ {0, ±1}`; `k` enters only through `k²`, so `k = -1` repeats `k = 1`.
pub fn first_positive_laplace(metric: &ConformalMetric, truncation: usize) -> Result<FirstLaplace> {
    first_positive_laplace_upto(metric, truncation, 1)
}

/// Minimum over `|k| ≤ kmax`.
pub fn first_positive_laplace_upto(metric: &ConformalMetric, truncation: usize, kmax: i32) -> Result<FirstLaplace> {
    let mut best: Option<FirstLaplace> = None;
    for k in 0..=kmax {
        let modes = SLProblem::laplace(metric, k, truncation).solve(2)?;
        if let Some(mode) = lowest_positive(modes, ZERO_MODE_THRESHOLD) {
            if best.as_ref().is_none_or(|b| mode.value < b.value) {
                best = Some(FirstLaplace { value: mode.value, k, mode });
            }
        }
    }
    best.ok_or(Error::NoConvergence { iterations: 0 })
}

/// Smallest positive Dirac eigenvalue `λ²`. The `l = 0` branch comes from the
/// closed form and has no mode attached.
#[derive(Debug, Clone, Serialize)]
pub struct FirstDirac {
    pub value: f64,
    pub l: i32,
    pub mode: Option<EigenMode>,
}

pub fn first_positive_dirac(metric: &ConformalMetric, truncation: usize) -> Result<FirstDirac> {
    let mut best = FirstDirac { value: dirac_l0_closed_form(metric, 1), l: 0, mode: None };
    for l in [1, -1] {
        let mode = SLProblem::dirac(metric, l, truncation).solve(1)?.remove(0);
        if mode.value < best.value {
            best = FirstDirac { value: mode.value, l, mode: Some(mode) };
        }
    }
    Ok(best)
}

/// Smallest eigenvalue of the Galerkin matrix of `H_l`, without weight.
pub fn hamiltonian_min_spec(metric: &ConformalMetric, l: i32, truncation: usize) -> Result<f64> {
    let (k, _) = SLProblem::dirac(metric, l, truncation).assemble()?;
    Ok(sym_eig(&k)?.values[0])
}

/// `(a, q)` of the Mathieu equation `A'' + (a - 2q cos 2x) A = 0` obtained
/// from the `h⁴ = 1 + E cos 4πt` Laplace problem by `x = 2πt`:
/// `a = μ/4π² - k²`, `q = Eμ/(64π²)`.
pub fn mathieu_parameters(mu: f64, e: f64, k: i32) -> (f64, f64) {
    (mu / FOUR_PI_SQ - (k * k) as f64, e * mu / (16.0 * FOUR_PI_SQ))
}

/// The five spectral functions into which the flat eigenvalue `4π²` splits
/// on a symmetric metric.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectralFunctions {
    /// Lowest odd `k = 0` Laplace eigenvalue (deforms `sin 2πt`).
    pub mu1: f64,
    /// Lowest positive even `k = 0` Laplace eigenvalue (deforms `cos 2πt`).
    pub mu2: f64,
    /// Lowest `k = ±1` Laplace eigenvalue.
    pub mu3: f64,
    /// `l = 0` Dirac closed form.
    pub lam1sq: f64,
    /// Lowest `l = -1` Dirac eigenvalue; absent on degenerate metrics.
    pub lam2sq: Option<f64>,
    /// Lowest `l = +1` Dirac eigenvalue; absent on degenerate metrics.
    pub lam3sq: Option<f64>,
}

impl SpectralFunctions {
    pub fn compute(metric: &ConformalMetric, truncation: usize) -> Result<Self> {
        if !metric.is_symmetric() {
            return Err(Error::MetricNotSymmetric);
        }
        let lap = |k, parity| SLProblem::laplace(metric, k, truncation).with_parity(parity);
        let mu1 = lap(0, Parity::Odd).solve(1)?[0].value;
        let mu2 = lowest_positive(lap(0, Parity::Even).solve(2)?, ZERO_MODE_THRESHOLD)
            .ok_or(Error::NoConvergence { iterations: 0 })?
            .value;
        let mu3 = lap(1, Parity::Full).solve(1)?[0].value;
        let lam1sq = dirac_l0_closed_form(metric, 1);
        let (lam2sq, lam3sq) = if metric.is_degenerate() {
            (None, None)
        } else {
            let d = |l| SLProblem::dirac(metric, l, truncation).solve(1).map(|m| m[0].value);
            (Some(d(-1)?), Some(d(1)?))
        };
        Ok(Self { mu1, mu2, mu3, lam1sq, lam2sq, lam3sq })
    }

    /// `min(μ₁, μ₂, μ₃)`.
    pub fn laplace_min(&self) -> f64 {
        self.mu1.min(self.mu2).min(self.mu3)
    }

    /// `min(λ₁², λ₂², λ₃²)` over the available branches.
    pub fn dirac_min(&self) -> f64 {
        [self.lam2sq, self.lam3sq].into_iter().flatten().fold(self.lam1sq, f64::min)
    }
}

/// Fourier expansion of the squared eigenfunction `A²`, scaled to mean one.
///
/// With the spinor written as `φ = h A`, this is `φ²/h²`, the bracketed
/// series in `MS(E, t) = h·√(1 + Σ …)`.
pub fn spinor_square_expansion(mode: &EigenMode, metric: &ConformalMetric, terms: usize) -> Result<TrigPoly> {
    if !mode.positive {
        return Err(Error::NotPositiveMode { min: mode.min_value });
    }
    let a2 = mode.eigenfunction.sample(metric.grid()).map(|a| a * a);
    let mean = a2.quadrature();
    let p = TrigPoly::from_samples(&a2.map(|v| v / mean), terms)?;
    let mut flat = p.to_flat();
    flat[0] = 1.0;
    Ok(TrigPoly::from_flat(&flat))
}
