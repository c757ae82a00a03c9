//! Calculus on real trigonometric polynomials of period one.
//!
//! A [`TrigPoly`] stores `a0 + Σ aₙ cos(2πnt) + bₙ sin(2πnt)` in real form, so
//! derivatives, products and mean values are exact coefficient maps. The
//! sampled counterpart [`GridFn`] carries non-polynomial quantities such as
//! `√(1 + E cos 4πt)` on the uniform grid `tⱼ = j/M`.

use std::f64::consts::PI;
use std::ops::{Add, Mul, Neg, Sub};

use serde::Serialize;

use crate::{Error, Result};

const TWO_PI: f64 = 2.0 * PI;

/// Relative size below which a resonant forcing coefficient is treated as zero.
pub const SOLVABILITY_TOLERANCE: f64 = 1e-9;

/// A real trigonometric polynomial on `[0, 1]`.
///
/// `cos[n - 1]` and `sin[n - 1]` hold the coefficients of `cos(2πnt)` and
/// `sin(2πnt)`; both vectors always have length [`TrigPoly::degree`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrigPoly {
    a0: f64,
    cos: Vec<f64>,
    sin: Vec<f64>,
}

impl TrigPoly {
    pub fn new(a0: f64, mut cos: Vec<f64>, mut sin: Vec<f64>) -> Self {
        let degree = cos.len().max(sin.len());
        cos.resize(degree, 0.0);
        sin.resize(degree, 0.0);
        Self { a0, cos, sin }
    }

    pub fn zero() -> Self {
        Self::constant(0.0)
    }

    pub fn constant(value: f64) -> Self {
        Self { a0: value, cos: Vec::new(), sin: Vec::new() }
    }

    /// `amplitude · cos(2πnt)`; `n = 0` gives the constant `amplitude`.
    pub fn cos_mode(n: usize, amplitude: f64) -> Self {
        let mut p = Self::with_degree(n);
        p.set_cos(n, amplitude);
        p
    }

    /// `amplitude · sin(2πnt)`; `n = 0` gives the zero polynomial.
    pub fn sin_mode(n: usize, amplitude: f64) -> Self {
        let mut p = Self::with_degree(n);
        if n > 0 {
            p.sin[n - 1] = amplitude;
        }
        p
    }

    /// Builds a polynomial from the flat layout `[a0, a1, b1, a2, b2, ...]`.
    pub fn from_flat(coefficients: &[f64]) -> Self {
        let a0 = coefficients.first().copied().unwrap_or(0.0);
        let rest = coefficients.get(1..).unwrap_or(&[]);
        let degree = rest.len().div_ceil(2);
        let mut p = Self::with_degree(degree);
        p.a0 = a0;
        for (i, &c) in rest.iter().enumerate() {
            if i % 2 == 0 {
                p.cos[i / 2] = c;
            } else {
                p.sin[i / 2] = c;
            }
        }
        p
    }

    fn with_degree(degree: usize) -> Self {
        Self { a0: 0.0, cos: vec![0.0; degree], sin: vec![0.0; degree] }
    }

    pub fn degree(&self) -> usize {
        self.cos.len()
    }

    /// Mean value `a0`.
    pub fn mean(&self) -> f64 {
        self.a0
    }

    /// Coefficient of `cos(2πnt)`; `n = 0` returns the mean.
    pub fn cos_coeff(&self, n: usize) -> f64 {
        match n {
            0 => self.a0,
            _ => self.cos.get(n - 1).copied().unwrap_or(0.0),
        }
    }

    /// Coefficient of `sin(2πnt)`; zero for `n = 0` and beyond the degree.
    pub fn sin_coeff(&self, n: usize) -> f64 {
        match n {
            0 => 0.0,
            _ => self.sin.get(n - 1).copied().unwrap_or(0.0),
        }
    }

    fn set_cos(&mut self, n: usize, value: f64) {
        if n == 0 {
            self.a0 = value;
        } else {
            self.cos[n - 1] = value;
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        let mut acc = self.a0;
        for n in 1..=self.degree() {
            let (s, c) = (TWO_PI * n as f64 * t).sin_cos();
            acc += self.cos[n - 1] * c + self.sin[n - 1] * s;
        }
        acc
    }

    pub fn derivative(&self) -> Self {
        let mut d = Self::with_degree(self.degree());
        for n in 1..=self.degree() {
            let w = TWO_PI * n as f64;
            d.cos[n - 1] = w * self.sin[n - 1];
            d.sin[n - 1] = -w * self.cos[n - 1];
        }
        d
    }

    pub fn nth_derivative(&self, order: usize) -> Self {
        (0..order).fold(self.clone(), |p, _| p.derivative())
    }

    /// `∫₀¹ p(t) dt`.
    pub fn integrate(&self) -> f64 {
        self.a0
    }

    /// Exact product by coefficient convolution.
    pub fn product(&self, other: &Self) -> Self {
        let (dp, dq) = (self.degree(), other.degree());
        let mut out = Self::with_degree(dp + dq);
        let mut ca = vec![0.0; dp + dq + 1];
        let mut sa = vec![0.0; dp + dq + 1];
        for m in 0..=dp {
            let (pa, pb) = (self.cos_coeff(m), self.sin_coeff(m));
            if pa == 0.0 && pb == 0.0 {
                continue;
            }
            for n in 0..=dq {
                let (qa, qb) = (other.cos_coeff(n), other.sin_coeff(n));
                let (sum, diff) = (m + n, m.abs_diff(n));
                // cos·cos and sin·sin
                ca[diff] += 0.5 * (pa * qa + pb * qb);
                ca[sum] += 0.5 * (pa * qa - pb * qb);
                // sin(m)cos(n) + cos(m)sin(n) = sin(m+n); the difference terms carry sign(m-n)
                sa[sum] += 0.5 * (pb * qa + pa * qb);
                let cross = 0.5 * (pb * qa - pa * qb);
                if m > n {
                    sa[diff] += cross;
                } else if n > m {
                    sa[diff] -= cross;
                }
            }
        }
        out.a0 = ca[0];
        for k in 1..=dp + dq {
            out.cos[k - 1] = ca[k];
            out.sin[k - 1] = sa[k];
        }
        out
    }

    /// `∫₀¹ p q dt` from the coefficients (Parseval).
    pub fn inner_product(&self, other: &Self) -> f64 {
        let shared = self.degree().min(other.degree());
        let tail: f64 = (0..shared)
            .map(|i| self.cos[i] * other.cos[i] + self.sin[i] * other.sin[i])
            .sum();
        self.a0 * other.a0 + 0.5 * tail
    }

    pub fn norm_l2(&self) -> f64 {
        self.inner_product(self).sqrt()
    }

    /// Largest absolute coefficient.
    pub fn max_coeff(&self) -> f64 {
        self.cos
            .iter()
            .chain(&self.sin)
            .fold(self.a0.abs(), |m, c| m.max(c.abs()))
    }

    pub fn truncate(&self, degree: usize) -> Self {
        let keep = degree.min(self.degree());
        Self { a0: self.a0, cos: self.cos[..keep].to_vec(), sin: self.sin[..keep].to_vec() }
    }

    /// `t ↦ p(1 - t)`.
    pub fn reflect(&self) -> Self {
        Self { a0: self.a0, cos: self.cos.clone(), sin: self.sin.iter().map(|b| -b).collect() }
    }

    /// The part even about `t = 1/2`: sine coefficients dropped.
    pub fn even_part(&self) -> Self {
        Self { a0: self.a0, cos: self.cos.clone(), sin: vec![0.0; self.degree()] }
    }

    /// The part odd about `t = 1/2`.
    pub fn odd_part(&self) -> Self {
        Self { a0: 0.0, cos: vec![0.0; self.degree()], sin: self.sin.clone() }
    }

    /// Coefficients with magnitude below `floor` set to zero.
    pub fn chop(&self, floor: f64) -> Self {
        let f = |c: &f64| if c.abs() < floor { 0.0 } else { *c };
        Self { a0: f(&self.a0), cos: self.cos.iter().map(f).collect(), sin: self.sin.iter().map(f).collect() }
    }

    /// Size of the part that is odd about `t = 1/2` (the sine coefficients).
    pub fn asymmetry(&self) -> f64 {
        self.sin.iter().fold(0.0, |m, b| m.max(b.abs()))
    }

    /// Size of the part that is even about `t = 1/2` (mean and cosine coefficients).
    pub fn symmetry(&self) -> f64 {
        self.cos.iter().fold(self.a0.abs(), |m, a| m.max(a.abs()))
    }

    /// Samples on the uniform grid of `samples` points.
    pub fn sample(&self, samples: usize) -> GridFn {
        let table = UnitCircle::new(samples);
        let mut values = vec![self.a0; samples];
        for n in 1..=self.degree() {
            let (a, b) = (self.cos[n - 1], self.sin[n - 1]);
            if a == 0.0 && b == 0.0 {
                continue;
            }
            let mut idx = 0usize;
            let step = n % samples;
            for v in values.iter_mut() {
                *v += a * table.cos[idx] + b * table.sin[idx];
                idx += step;
                if idx >= samples {
                    idx -= samples;
                }
            }
        }
        GridFn::new(values)
    }

    /// Discrete Fourier analysis of grid samples, truncated at `degree`.
    pub fn from_samples(g: &GridFn, degree: usize) -> Result<Self> {
        let m = g.len();
        if m < 2 * degree + 1 {
            return Err(Error::Undersampled { samples: m, degree });
        }
        let table = UnitCircle::new(m);
        let scale = 2.0 / m as f64;
        let mut p = Self::with_degree(degree);
        p.a0 = g.quadrature();
        for n in 1..=degree {
            let (mut a, mut b) = (Neumaier::default(), Neumaier::default());
            let mut idx = 0usize;
            for &v in &g.values {
                a.add(v * table.cos[idx]);
                b.add(v * table.sin[idx]);
                idx += n;
                if idx >= m {
                    idx -= m;
                }
            }
            p.cos[n - 1] = scale * a.total();
            p.sin[n - 1] = scale * b.total();
        }
        Ok(p)
    }

    /// Coefficient layout `[a0, a1, b1, a2, b2, ...]`.
    pub fn to_flat(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(2 * self.degree() + 1);
        out.push(self.a0);
        for n in 0..self.degree() {
            out.push(self.cos[n]);
            out.push(self.sin[n]);
        }
        out
    }
}

impl Add for &TrigPoly {
    type Output = TrigPoly;

    fn add(self, rhs: &TrigPoly) -> TrigPoly {
        let degree = self.degree().max(rhs.degree());
        let mut out = TrigPoly::with_degree(degree);
        out.a0 = self.a0 + rhs.a0;
        for n in 1..=degree {
            out.cos[n - 1] = self.cos_coeff(n) + rhs.cos_coeff(n);
            out.sin[n - 1] = self.sin_coeff(n) + rhs.sin_coeff(n);
        }
        out
    }
}

impl Sub for &TrigPoly {
    type Output = TrigPoly;

    fn sub(self, rhs: &TrigPoly) -> TrigPoly {
        self + &(-rhs)
    }
}

impl Neg for &TrigPoly {
    type Output = TrigPoly;

    fn neg(self) -> TrigPoly {
        self * -1.0
    }
}

impl Mul<f64> for &TrigPoly {
    type Output = TrigPoly;

    fn mul(self, rhs: f64) -> TrigPoly {
        TrigPoly {
            a0: self.a0 * rhs,
            cos: self.cos.iter().map(|c| c * rhs).collect(),
            sin: self.sin.iter().map(|c| c * rhs).collect(),
        }
    }
}

impl Mul for &TrigPoly {
    type Output = TrigPoly;

    fn mul(self, rhs: &TrigPoly) -> TrigPoly {
        self.product(rhs)
    }
}

/// Periodic solution of `C'' + ω² C = f`.
///
/// Modes in the kernel of the operator are returned as zero; the forcing must
/// not excite them beyond [`SOLVABILITY_TOLERANCE`] relative to `‖f‖₂`.
pub fn solve_poisson_periodic(f: &TrigPoly, omega_sq: f64) -> Result<TrigPoly> {
    let norm = f.norm_l2();
    let mut c = TrigPoly::with_degree(f.degree());
    for n in 0..=f.degree() {
        let k2 = (TWO_PI * n as f64).powi(2);
        let denom = omega_sq - k2;
        let (fa, fb) = (f.cos_coeff(n), f.sin_coeff(n));
        if denom.abs() <= 1e-12 * k2.max(omega_sq.abs()).max(1.0) {
            let magnitude = fa.hypot(fb);
            if magnitude > SOLVABILITY_TOLERANCE * norm {
                return Err(Error::SolvabilityViolated { mode: n, magnitude });
            }
            continue;
        }
        c.set_cos(n, fa / denom);
        if n > 0 {
            c.sin[n - 1] = fb / denom;
        }
    }
    Ok(c)
}

/// Values of a function at `tⱼ = j/M`, `0 ≤ j < M`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFn {
    values: Vec<f64>,
}

impl GridFn {
    pub fn new(values: Vec<f64>) -> Self {
        Self { values }
    }

    pub fn from_fn(samples: usize, f: impl Fn(f64) -> f64) -> Self {
        Self::new((0..samples).map(|j| f(j as f64 / samples as f64)).collect())
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn point(&self, j: usize) -> f64 {
        j as f64 / self.len() as f64
    }

    /// Index of the grid point `1 - tⱼ`.
    pub fn mirror_index(&self, j: usize) -> usize {
        (self.len() - j) % self.len()
    }

    /// Periodic rectangle rule `(1/M) Σ vⱼ`; exact for trigonometric degree below `M`.
    pub fn quadrature(&self) -> f64 {
        compensated_sum(self.values.iter().copied()) / self.len() as f64
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self::new(self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        assert_eq!(self.len(), other.len(), "grid size mismatch");
        Self::new(self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect())
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Largest `|v(tⱼ) - v(1 - tⱼ)|`.
    pub fn asymmetry(&self) -> f64 {
        (0..self.len())
            .map(|j| (self.values[j] - self.values[self.mirror_index(j)]).abs())
            .fold(0.0, f64::max)
    }

    /// Largest `|v(tⱼ) + v(1 - tⱼ)|`.
    pub fn symmetry(&self) -> f64 {
        (0..self.len())
            .map(|j| (self.values[j] + self.values[self.mirror_index(j)]).abs())
            .fold(0.0, f64::max)
    }
}

/// Neumaier-compensated running sum.
#[derive(Default, Clone, Copy)]
struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn total(self) -> f64 {
        self.sum + self.comp
    }
}

pub(crate) fn compensated_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut acc = Neumaier::default();
    values.into_iter().for_each(|v| acc.add(v));
    acc.total()
}

/// `cos(2πj/M)`, `sin(2πj/M)` for `0 ≤ j < M`.
struct UnitCircle {
    cos: Vec<f64>,
    sin: Vec<f64>,
}

impl UnitCircle {
    fn new(samples: usize) -> Self {
        let (sin, cos) = (0..samples)
            .map(|j| (TWO_PI * j as f64 / samples as f64).sin_cos())
            .unzip();
        Self { cos, sin }
    }
}
