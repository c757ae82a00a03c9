//! The conformal factor `h⁴(t)` and the quantities derived from it.
//!
//! Everything the reduced Dirac equation needs is expressed through the
//! logarithm `u = ¼ ln h⁴`: `h'/h = u'` and `(h h'' - 2h'²)/h² = u'' - u'²`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use crate::trigcalc::{GridFn, TrigPoly};
use crate::{Error, Result, DEFAULT_GRID};

/// Relative tolerance of the grid symmetry test `h⁴(t) = h⁴(1 - t)`.
pub const SYMMETRY_TOLERANCE: f64 = 1e-12;

/// `h⁴` values at or below this fraction of the maximum count as zeros.
const ZERO_FLOOR: f64 = 1e-13;

/// A conformal factor `h⁴(t)` sampled on a uniform power-of-two grid.
#[derive(Debug, Clone)]
pub struct ConformalMetric {
    h4: GridFn,
    h4_poly: Option<TrigPoly>,
    log_quarter: Option<TrigPoly>,
    symmetric: bool,
    degenerate: bool,
    jet: OnceLock<MetricJet>,
}

/// Grid samples of `h⁴`, `h²`, `u = ¼ ln h⁴`, `u'` and `u'' - u'²`.
#[derive(Debug, Clone)]
pub struct MetricJet {
    pub h4: GridFn,
    pub h2: GridFn,
    pub log_quarter: GridFn,
    pub u1: GridFn,
    pub u2: GridFn,
    pub curv: GridFn,
}

fn check_grid(samples: usize) -> Result<()> {
    if samples < 16 || !samples.is_power_of_two() {
        return Err(Error::InvalidSpec(format!(
            "grid size {samples} must be a power of two of at least 16"
        )));
    }
    Ok(())
}

impl ConformalMetric {
    pub fn flat(grid: usize) -> Result<Self> {
        Self::from_trig(TrigPoly::constant(1.0), grid)
    }

    /// A strictly positive trigonometric-polynomial factor.
    pub fn from_trig(h4: TrigPoly, grid: usize) -> Result<Self> {
        let m = Self::build(Some(h4.clone()), h4.sample(grid.max(1)), None)?;
        if m.degenerate {
            let j = m.argmin();
            return Err(Error::NonPositiveMetric { t: m.h4.point(j), value: m.h4.values()[j] });
        }
        Ok(m)
    }

    /// Like [`ConformalMetric::from_trig`], but isolated zeros of `h⁴` are
    /// accepted and mark the metric as degenerate. Only weight quadratures are
    /// available on such a metric; the jet is not.
    pub fn from_trig_allow_degenerate(h4: TrigPoly, grid: usize) -> Result<Self> {
        Self::build(Some(h4.clone()), h4.sample(grid.max(1)), None)
    }

    /// `h⁴ = exp(4u)` for a known logarithm `u = ln h`; the jet then uses `u` exactly.
    pub fn from_log_quarter(u: TrigPoly, grid: usize) -> Result<Self> {
        let h4 = u.sample(grid.max(1)).map(|v| (4.0 * v).exp());
        Self::build(None, h4, Some(u))
    }

    pub fn from_grid(h4: GridFn) -> Result<Self> {
        let m = Self::build(None, h4, None)?;
        if m.degenerate {
            let j = m.argmin();
            return Err(Error::NonPositiveMetric { t: m.h4.point(j), value: m.h4.values()[j] });
        }
        Ok(m)
    }

    fn build(h4_poly: Option<TrigPoly>, h4: GridFn, log_quarter: Option<TrigPoly>) -> Result<Self> {
        check_grid(h4.len())?;
        let (min, max) = (h4.min(), h4.max());
        if !(max > 0.0) || min < -ZERO_FLOOR * max {
            let j = (0..h4.len()).min_by(|&a, &b| h4.values()[a].total_cmp(&h4.values()[b])).unwrap();
            return Err(Error::NonPositiveMetric { t: h4.point(j), value: h4.values()[j] });
        }
        let degenerate = min <= ZERO_FLOOR * max;
        let symmetric = h4.asymmetry() <= SYMMETRY_TOLERANCE * max.max(1.0);
        Ok(Self { h4, h4_poly, log_quarter, symmetric, degenerate, jet: OnceLock::new() })
    }

    fn argmin(&self) -> usize {
        let v = self.h4.values();
        (0..v.len()).min_by(|&a, &b| v[a].total_cmp(&v[b])).unwrap()
    }

    pub fn grid(&self) -> usize {
        self.h4.len()
    }

    pub fn h4(&self) -> &GridFn {
        &self.h4
    }

    /// The factor as a trigonometric polynomial, when it was given as one.
    pub fn h4_poly(&self) -> Option<&TrigPoly> {
        self.h4_poly.as_ref()
    }

    pub fn h2(&self) -> GridFn {
        self.h4.map(|v| v.max(0.0).sqrt())
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    pub fn is_degenerate(&self) -> bool {
        self.degenerate
    }

    pub fn h4_min(&self) -> f64 {
        self.h4.min()
    }

    pub fn h4_max(&self) -> f64 {
        self.h4.max()
    }

    /// `vol(T², g) = ∫₀¹ h⁴ dt`.
    pub fn volume(&self) -> f64 {
        self.h4.quadrature()
    }

    /// `∫₀¹ h² dt`.
    pub fn h2_integral(&self) -> f64 {
        self.h2().quadrature()
    }

    /// Derived grids; computed once and cached.
    pub fn jet(&self) -> Result<&MetricJet> {
        if self.degenerate {
            return Err(Error::DegenerateMetric("the metric jet"));
        }
        if let Some(jet) = self.jet.get() {
            return Ok(jet);
        }
        let jet = self.compute_jet()?;
        Ok(self.jet.get_or_init(|| jet))
    }

    fn compute_jet(&self) -> Result<MetricJet> {
        let m = self.grid();
        let u = match &self.log_quarter {
            Some(u) => u.clone(),
            None => {
                let raw = TrigPoly::from_samples(&self.h4.map(|v| 0.25 * v.ln()), m / 4)?;
                denoise(raw, self.symmetric)
            }
        };
        let d1 = u.derivative();
        let u1 = d1.sample(m);
        let u2 = d1.derivative().sample(m);
        let curv = u2.zip_with(&u1, |a, b| a - b * b);
        Ok(MetricJet {
            h4: self.h4.clone(),
            h2: self.h2(),
            log_quarter: u.sample(m),
            u1,
            u2,
            curv,
        })
    }
}

/// Drops rounding-level coefficients, which two spectral derivatives would
/// otherwise amplify by `(2πn)²`. Sine terms of a symmetric factor vanish exactly.
fn denoise(u: TrigPoly, symmetric: bool) -> TrigPoly {
    let u = u.chop(8.0 * f64::EPSILON * u.max_coeff());
    if symmetric {
        u.even_part()
    } else {
        u
    }
}

/// `h⁴_E = 1 + E·H + E²·G`.
#[derive(Debug, Clone, PartialEq)]
pub struct DeformationFamily {
    pub h: TrigPoly,
    pub g: TrigPoly,
}

impl DeformationFamily {
    pub fn new(h: TrigPoly, g: TrigPoly) -> Self {
        Self { h, g }
    }

    pub fn first_order(h: TrigPoly) -> Self {
        Self::new(h, TrigPoly::zero())
    }

    /// `H = cos(2πNt)`, `G = 0`.
    pub fn cosine(n: usize) -> Self {
        Self::first_order(TrigPoly::cos_mode(n, 1.0))
    }

    pub fn factor(&self, e: f64) -> TrigPoly {
        let one = TrigPoly::constant(1.0);
        &(&one + &(&self.h * e)) + &(&self.g * (e * e))
    }

    pub fn eval(&self, e: f64, grid: usize) -> Result<ConformalMetric> {
        ConformalMetric::from_trig(self.factor(e), grid)
    }

    pub fn eval_allow_degenerate(&self, e: f64, grid: usize) -> Result<ConformalMetric> {
        ConformalMetric::from_trig_allow_degenerate(self.factor(e), grid)
    }

    pub fn is_symmetric(&self) -> bool {
        self.h.asymmetry() == 0.0 && self.g.asymmetry() == 0.0
    }
}

/// The potential `p_E` of the `l = 1` Dirac Hamiltonian for `h⁴ = 1 + E cos 4πt`,
/// in closed form.
pub fn mathieu_potential_closed_form(e: f64, l: i32, grid: usize) -> Result<GridFn> {
    if l != 1 {
        return Err(Error::UnsupportedIndex(l));
    }
    if e.abs() >= 1.0 {
        return Err(Error::InvalidSpec(format!("Mathieu parameter E = {e} must satisfy |E| < 1")));
    }
    let pi2 = PI * PI;
    Ok(GridFn::from_fn(grid, |t| {
        let (s, c) = (4.0 * PI * t).sin_cos();
        let s8 = (8.0 * PI * t).sin();
        let num = 4.0 * c + 4.0 * s + e * s * s + 2.0 * e * (2.0 + s8);
        4.0 * pi2 + e * pi2 * num / (1.0 + e * c).powi(2)
    }))
}

/// Metric description used on the command line.
///
/// `flat`, `cos:N:E` (`h⁴ = 1 + E cos 2πNt`), `expfam:E`
/// (`h = exp((E/π)(sin 2πt - 2 cos 2πt))`) and `fourier:[a0,a1,b1,...]`.
#[derive(Debug, Clone, PartialEq)]
pub enum MetricSpec {
    Flat,
    Cos { n: usize, e: f64 },
    ExpFamily { e: f64 },
    Fourier(Vec<f64>),
}

impl MetricSpec {
    /// Builds the metric. `cos:N:E` with `|E| = 1` yields a degenerate metric.
    pub fn build(&self, grid: usize) -> Result<ConformalMetric> {
        match self {
            MetricSpec::Flat => ConformalMetric::flat(grid),
            MetricSpec::Cos { n, e } => {
                DeformationFamily::cosine(*n).eval_allow_degenerate(*e, grid)
            }
            MetricSpec::ExpFamily { e } => ConformalMetric::from_log_quarter(exp_family_log(*e), grid),
            MetricSpec::Fourier(c) => ConformalMetric::from_trig(TrigPoly::from_flat(c), grid),
        }
    }

    pub fn build_default(&self) -> Result<ConformalMetric> {
        self.build(DEFAULT_GRID)
    }
}

/// `ln h = (E/π)(sin 2πt - 2 cos 2πt)`.
pub fn exp_family_log(e: f64) -> TrigPoly {
    TrigPoly::new(0.0, vec![-2.0 * e / PI], vec![e / PI])
}

fn parse_f64(s: &str, what: &str) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| Error::InvalidSpec(format!("cannot parse {what} from {s:?}")))
}

fn parse_list(s: &str) -> Result<Vec<f64>> {
    let inner = s
        .trim()
        .strip_prefix('[')
        .and_then(|r| r.strip_suffix(']'))
        .ok_or_else(|| Error::InvalidSpec(format!("expected [a0,a1,b1,...], got {s:?}")))?;
    if inner.trim().is_empty() {
        return Ok(Vec::new());
    }
    inner.split(',').map(|x| parse_f64(x, "coefficient")).collect()
}

impl FromStr for MetricSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "flat" {
            return Ok(MetricSpec::Flat);
        }
        if let Some(rest) = s.strip_prefix("fourier:") {
            return Ok(MetricSpec::Fourier(parse_list(rest)?));
        }
        if let Some(rest) = s.strip_prefix("expfam:") {
            return Ok(MetricSpec::ExpFamily { e: parse_f64(rest, "E")? });
        }
        if let Some(rest) = s.strip_prefix("cos:") {
            let (n, e) = rest
                .split_once(':')
                .ok_or_else(|| Error::InvalidSpec(format!("expected cos:N:E, got {s:?}")))?;
            let n = n
                .trim()
                .parse::<usize>()
                .map_err(|_| Error::InvalidSpec(format!("bad harmonic in {s:?}")))?;
            return Ok(MetricSpec::Cos { n, e: parse_f64(e, "E")? });
        }
        Err(Error::InvalidSpec(format!("unknown metric {s:?}")))
    }
}

impl fmt::Display for MetricSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MetricSpec::Flat => write!(f, "flat"),
            MetricSpec::Cos { n, e } => write!(f, "cos:{n}:{e}"),
            MetricSpec::ExpFamily { e } => write!(f, "expfam:{e}"),
            MetricSpec::Fourier(c) => {
                let parts: Vec<String> = c.iter().map(|x| x.to_string()).collect();
                write!(f, "fourier:[{}]", parts.join(","))
            }
        }
    }
}

/// Parses a deformation direction: `zero`, `cos:N`, `cos:N:amp`, `sin:N`,
/// `sin:N:amp` or `fourier:[a0,a1,b1,...]`.
pub fn parse_trig_spec(s: &str) -> Result<TrigPoly> {
    let s = s.trim();
    if s == "zero" || s == "0" {
        return Ok(TrigPoly::zero());
    }
    if let Some(rest) = s.strip_prefix("fourier:") {
        return Ok(TrigPoly::from_flat(&parse_list(rest)?));
    }
    let (kind, rest) = s
        .split_once(':')
        .ok_or_else(|| Error::InvalidSpec(format!("unknown function {s:?}")))?;
    let (n, amp) = match rest.split_once(':') {
        Some((n, a)) => (n, parse_f64(a, "amplitude")?),
        None => (rest, 1.0),
    };
    let n = n
        .trim()
        .parse::<usize>()
        .map_err(|_| Error::InvalidSpec(format!("bad harmonic in {s:?}")))?;
    match kind {
        "cos" => Ok(TrigPoly::cos_mode(n, amp)),
        "sin" => Ok(TrigPoly::sin_mode(n, amp)),
        _ => Err(Error::InvalidSpec(format!("unknown function {s:?}"))),
    }
}
