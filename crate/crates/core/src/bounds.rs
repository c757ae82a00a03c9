//! Test-function and comparison bounds for the first eigenvalues.

use serde::Serialize;
use std::f64::consts::PI;

use crate::metric::ConformalMetric;
use crate::spectral::{potential, EigenMode, OperatorKind};
use crate::trigcalc::{GridFn, TrigPoly};
use crate::{Error, Result, FOUR_PI_SQ};

/// Grid size of the midpoint rule for `|sin 2πt|`-singular integrals.
pub const LIMIT_GRID: usize = 8192;

/// Tolerance of the oddness test `f(t) = -f(1 - t)`.
pub const ANTISYMMETRY_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum BoundKind {
    SandwichLower,
    SandwichUpper,
    RayleighLaplace,
    RayleighDirac,
    LaplaceDiracGap,
    Positivity,
    LimitQuotient,
    LimitClosedForm,
    PotentialMean,
}

impl BoundKind {
    pub fn is_upper(self) -> bool {
        !matches!(self, BoundKind::SandwichLower)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub kind: BoundKind,
    pub value: f64,
    pub witness: Option<TrigPoly>,
}

impl BoundReport {
    pub fn new(kind: BoundKind, value: f64, witness: Option<TrigPoly>) -> Self {
        Self { kind, value, witness }
    }
}

/// `(4π²/max h⁴, 4π²/min h⁴)`; brackets both first eigenvalues.
pub fn conformal_sandwich(m: &ConformalMetric) -> (f64, f64) {
    (FOUR_PI_SQ / m.h4_max(), FOUR_PI_SQ / m.h4_min())
}

fn check_symmetric(m: &ConformalMetric) -> Result<()> {
    if m.is_symmetric() {
        Ok(())
    } else {
        Err(Error::MetricNotSymmetric)
    }
}

fn check_odd_poly(f: &TrigPoly) -> Result<()> {
    let residual = f.symmetry();
    if residual > ANTISYMMETRY_TOLERANCE * f.max_coeff().max(1.0) {
        return Err(Error::AntisymmetryViolated { residual });
    }
    Ok(())
}

/// `∫f'² / ∫f² h⁴` for `f` odd about `t = 1/2` on a symmetric metric.
/// Degenerate metrics are allowed.
pub fn rayleigh_upper_laplace(m: &ConformalMetric, f: &TrigPoly) -> Result<f64> {
    check_symmetric(m)?;
    check_odd_poly(f)?;
    let df = f.derivative();
    let num = df.inner_product(&df);
    let grid = f.sample(m.grid());
    let den = grid.zip_with(m.h4(), |v, w| v * v * w).quadrature();
    if den <= 0.0 {
        return Err(Error::SingularQuotient("test function vanishes".into()));
    }
    Ok(num / den)
}

/// A test function for the Dirac Rayleigh quotient.
#[derive(Debug, Clone, Copy)]
pub enum TestFunction<'a> {
    Poly(&'a TrigPoly),
    /// Sampled on the metric grid; differentiated spectrally.
    Grid(&'a GridFn),
}

/// `∫(h f' + 2 f h')² / ∫f² h⁶ = ∫h²(f' + 2u'f)² / ∫f² h⁶`.
pub fn rayleigh_upper_dirac(m: &ConformalMetric, f: TestFunction<'_>) -> Result<f64> {
    check_symmetric(m)?;
    let jet = m.jet()?;
    let grid = m.grid();
    let (fv, dfv) = match f {
        TestFunction::Poly(p) => {
            check_odd_poly(p)?;
            (p.sample(grid), p.derivative().sample(grid))
        }
        TestFunction::Grid(g) => {
            if g.len() != grid {
                return Err(Error::InvalidSpec(format!(
                    "test function has {} samples, metric grid has {grid}",
                    g.len()
                )));
            }
            let residual = g.symmetry();
            if residual > ANTISYMMETRY_TOLERANCE * g.max_abs().max(1.0) {
                return Err(Error::AntisymmetryViolated { residual });
            }
            let p = TrigPoly::from_samples(g, grid / 2 - 1)?;
            (g.clone(), p.derivative().sample(grid))
        }
    };
    let v = jet.h4.values();
    let (h2, u1) = (jet.h2.values(), jet.u1.values());
    let (mut num, mut den) = (0.0, 0.0);
    for j in 0..grid {
        let (f, df) = (fv.values()[j], dfv.values()[j]);
        let s = df + 2.0 * u1[j] * f;
        num += h2[j] * s * s;
        den += f * f * v[j] * h2[j];
    }
    if den <= 0.0 {
        return Err(Error::SingularQuotient("test function vanishes".into()));
    }
    Ok(num / den)
}

/// `μ + ∫(4h'² + ½Δ₀(h²)) f² / ∫f² h⁶` for a solved Laplace mode `f`, with
/// `Δ₀ = -d²/dt²`. In terms of `u`: `μ + ∫(2u'² - u'') h² f² / ∫f² h⁶`.
pub fn laplace_dirac_gap_bound(m: &ConformalMetric, mode: &EigenMode) -> Result<f64> {
    if !matches!(mode.kind, OperatorKind::Laplace { .. }) {
        return Err(Error::InvalidSpec("the gap bound needs a Laplace eigenmode".into()));
    }
    let jet = m.jet()?;
    let f = mode.eigenfunction.sample(m.grid());
    let (mut num, mut den) = (0.0, 0.0);
    for j in 0..m.grid() {
        let (u1, u2, h2, h4) = (jet.u1.values()[j], jet.u2.values()[j], jet.h2.values()[j], jet.h4.values()[j]);
        let f2 = f.values()[j] * f.values()[j];
        num += (2.0 * u1 * u1 - u2) * h2 * f2;
        den += f2 * h4 * h2;
    }
    Ok(mode.value + num / den)
}

/// Largest numerator allowed where `h²` vanishes.
const DEGENERATE_NUMERATOR: f64 = 1e-8;

/// `∫(2πlφ - φ')²/h² / ∫h² φ²`, valid for any periodic `φ`. On degenerate
/// metrics the numerator must vanish at the zeros of `h`; those points then
/// contribute zero.
pub fn positivity_upper_bound(m: &ConformalMetric, l: i32, phi: &TrigPoly) -> Result<f64> {
    if phi.max_coeff() == 0.0 {
        return Err(Error::SingularQuotient("φ is identically zero".into()));
    }
    let grid = m.grid();
    let n = (&(phi * (2.0 * PI * l as f64)) - &phi.derivative()).sample(grid);
    let p = phi.sample(grid);
    let h2 = m.h2();
    let floor = 1e-12 * h2.max();
    let (mut num, mut den) = (0.0, 0.0);
    for j in 0..grid {
        let (nj, hj, pj) = (n.values()[j] * n.values()[j], h2.values()[j], p.values()[j]);
        if hj <= floor {
            if nj > DEGENERATE_NUMERATOR {
                return Err(Error::SingularQuotient(format!(
                    "numerator {nj:.3e} does not vanish where h = 0 (t = {})",
                    n.point(j)
                )));
            }
        } else {
            num += nj / hj;
        }
        den += hj * pj * pj;
    }
    Ok(num / den)
}

/// `½ ∫(2πlφ - φ')²/|sin 2πt| / ∫|sin 2πt| φ²` by the midpoint rule on
/// `LIMIT_GRID` points. The numerator must vanish to second order at `t = 0`
/// and `t = 1/2`.
pub fn limit_quotient(l: i32, phi: &TrigPoly) -> Result<f64> {
    let g = &(phi * (2.0 * PI * l as f64)) - &phi.derivative();
    let num = &g * &g;
    let dnum = num.derivative();
    let scale = num.max_coeff().max(f64::MIN_POSITIVE);
    for t in [0.0, 0.5] {
        let (v, dv) = (num.eval(t), dnum.eval(t));
        if v.abs() > 1e-10 * scale || dv.abs() > 1e-10 * 2.0 * PI * scale * num.degree().max(1) as f64 {
            return Err(Error::SingularQuotient(format!(
                "numerator does not vanish to second order at t = {t} (value {v:.3e}, slope {dv:.3e})"
            )));
        }
    }
    let m = LIMIT_GRID;
    let (mut a, mut b) = (0.0, 0.0);
    for j in 0..m {
        let t = (j as f64 + 0.5) / m as f64;
        let s = (2.0 * PI * t).sin().abs();
        let gv = g.eval(t);
        let pv = phi.eval(t);
        a += gv * gv / s;
        b += s * pv * pv;
    }
    if b <= 0.0 {
        return Err(Error::SingularQuotient("φ vanishes".into()));
    }
    Ok(0.5 * a / b)
}

/// `φ_l = (cos 2πt + l sin 2πt) / (2(l² + 1)π)`, for which `2πlφ_l - φ_l' = sin 2πt`.
pub fn limit_test_function(l: i32) -> TrigPoly {
    let lf = l as f64;
    let c = 1.0 / (2.0 * (lf * lf + 1.0) * PI);
    TrigPoly::new(0.0, vec![c], vec![lf * c])
}

/// `6π² (l² + 1)² / (1 + 2l²)`.
pub fn limit_closed_form(l: i32) -> f64 {
    let l2 = (l * l) as f64;
    6.0 * PI * PI * (l2 + 1.0).powi(2) / (1.0 + 2.0 * l2)
}

/// `∫V_l / vol`: the Rayleigh quotient of the constant test function.
pub fn potential_mean_bound(m: &ConformalMetric, l: i32) -> Result<f64> {
    Ok(potential(m, OperatorKind::Dirac { l })?.quadrature() / m.volume())
}

/// All bounds that apply to a metric, for reporting.
pub fn all_bounds(m: &ConformalMetric, laplace_mode: Option<&EigenMode>) -> Vec<BoundReport> {
    let mut out = Vec::new();
    let (lo, hi) = conformal_sandwich(m);
    out.push(BoundReport::new(BoundKind::SandwichLower, lo, None));
    out.push(BoundReport::new(BoundKind::SandwichUpper, hi, None));
    let s = TrigPoly::sin_mode(1, 1.0);
    if let Ok(v) = rayleigh_upper_laplace(m, &s) {
        out.push(BoundReport::new(BoundKind::RayleighLaplace, v, Some(s.clone())));
    }
    if let Ok(v) = rayleigh_upper_dirac(m, TestFunction::Poly(&s)) {
        out.push(BoundReport::new(BoundKind::RayleighDirac, v, Some(s.clone())));
    }
    if let Some(mode) = laplace_mode {
        if let Ok(v) = laplace_dirac_gap_bound(m, mode) {
            out.push(BoundReport::new(BoundKind::LaplaceDiracGap, v, Some(mode.eigenfunction.clone())));
        }
    }
    let phi = limit_test_function(1);
    if let Ok(v) = positivity_upper_bound(m, 1, &phi) {
        out.push(BoundReport::new(BoundKind::Positivity, v, Some(phi)));
    }
    if let Ok(v) = potential_mean_bound(m, 1) {
        out.push(BoundReport::new(BoundKind::PotentialMean, v, None));
    }
    out
}
