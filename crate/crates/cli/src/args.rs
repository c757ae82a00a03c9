use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, ValueEnum};
use torus_spec::metric::{exp_family_log, parse_trig_spec, ConformalMetric, DeformationFamily};
use torus_spec::trigcalc::TrigPoly;
use torus_spec::{Error, DEFAULT_GRID, DEFAULT_TRUNCATION};

/// Galerkin truncation: a fixed `n ≤ N`, or doubling from `N = 32` until the
/// requested eigenvalues settle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Truncation {
    Fixed(usize),
    Auto,
}

impl FromStr for Truncation {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s == "auto" {
            return Ok(Truncation::Auto);
        }
        match s.parse::<usize>() {
            Ok(n) if n >= 1 => Ok(Truncation::Fixed(n)),
            _ => Err(format!("expected a positive integer or \"auto\", got {s:?}")),
        }
    }
}

impl std::fmt::Display for Truncation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Truncation::Fixed(n) => write!(f, "{n}"),
            Truncation::Auto => write!(f, "auto"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Galerkin truncation n ≤ N, or "auto".
    #[arg(long, default_value_t = Truncation::Fixed(DEFAULT_TRUNCATION))]
    pub trunc: Truncation,
    /// Quadrature grid size (power of two, at least 16).
    #[arg(long, default_value_t = DEFAULT_GRID)]
    pub grid: usize,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Write to this file instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// `--E-range start:stop:steps`, endpoints included.
#[derive(Debug, Clone, PartialEq)]
pub struct ERange {
    pub start: f64,
    pub stop: f64,
    pub steps: usize,
}

impl FromStr for ERange {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        let [a, b, n] = parts.as_slice() else {
            return Err(format!("expected start:stop:steps, got {s:?}"));
        };
        let start = a.trim().parse::<f64>().map_err(|e| format!("start: {e}"))?;
        let stop = b.trim().parse::<f64>().map_err(|e| format!("stop: {e}"))?;
        let steps = n.trim().parse::<usize>().map_err(|e| format!("steps: {e}"))?;
        if steps == 0 {
            return Err("steps must be at least 1".into());
        }
        Ok(ERange { start, stop, steps })
    }
}

impl ERange {
    pub fn values(&self) -> Vec<f64> {
        if self.steps == 1 {
            return vec![self.start];
        }
        let d = (self.stop - self.start) / (self.steps - 1) as f64;
        (0..self.steps).map(|i| if i + 1 == self.steps { self.stop } else { self.start + d * i as f64 }).collect()
    }
}

/// A one-parameter family `E ↦ g_E`.
#[derive(Debug, Clone, PartialEq)]
pub enum Family {
    /// `h⁴ = 1 + E H + E² G`.
    Poly { h: TrigPoly, g: TrigPoly, label: String },
    /// `h = exp((E/π)(sin 2πt - 2 cos 2πt))`.
    Exp,
}

impl Family {
    /// `--family cos:N` or `expfam`, otherwise `--H` with optional `--G`.
    pub fn parse(family: Option<&str>, h: Option<&str>, g: Option<&str>) -> torus_spec::Result<Self> {
        match (family, h) {
            (Some("expfam"), None) => Ok(Family::Exp),
            (Some(f), None) => {
                let n = f
                    .strip_prefix("cos:")
                    .and_then(|n| n.parse::<usize>().ok())
                    .ok_or_else(|| Error::InvalidSpec(format!("unknown family {f:?}; expected cos:N or expfam")))?;
                let h = TrigPoly::cos_mode(n, 1.0);
                let g = match g {
                    Some(g) => parse_trig_spec(g)?,
                    None => TrigPoly::zero(),
                };
                Ok(Family::Poly { h, g, label: f.to_string() })
            }
            (None, Some(hs)) => {
                let gs = g.unwrap_or("zero");
                Ok(Family::Poly { h: parse_trig_spec(hs)?, g: parse_trig_spec(gs)?, label: format!("H={hs},G={gs}") })
            }
            (None, None) => Err(Error::InvalidSpec("a family needs --family or --H".into())),
            (Some(_), Some(_)) => Err(Error::InvalidSpec("--family and --H are exclusive".into())),
        }
    }

    /// The metric at `E`; `E` where `h⁴` touches zero gives a degenerate metric.
    pub fn metric(&self, e: f64, grid: usize) -> torus_spec::Result<ConformalMetric> {
        match self {
            Family::Poly { h, g, .. } => {
                DeformationFamily::new(h.clone(), g.clone()).eval_allow_degenerate(e, grid)
            }
            Family::Exp => ConformalMetric::from_log_quarter(exp_family_log(e), grid),
        }
    }

    pub fn label(&self) -> &str {
        match self {
            Family::Poly { label, .. } => label,
            Family::Exp => "expfam",
        }
    }
}
