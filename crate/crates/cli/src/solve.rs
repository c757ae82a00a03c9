use serde_json::{json, Value};
use torus_spec::metric::ConformalMetric;
use torus_spec::spectral::{lowest_positive, EigenMode, Parity, SLProblem, ZERO_MODE_THRESHOLD};
use torus_spec::{Error, Result};

use crate::args::Truncation;
use crate::output::num;

const AUTO_START: usize = 32;
const AUTO_TOLERANCE: f64 = 1e-9;
const AUTO_MAX: usize = 512;

#[derive(Debug, Clone, Copy)]
pub struct Solver {
    pub truncation: Truncation,
}

impl Solver {
    /// The `count` lowest modes and the truncation that produced them.
    pub fn solve(&self, p: SLProblem<'_>, count: usize) -> Result<(Vec<EigenMode>, usize)> {
        match self.truncation {
            Truncation::Fixed(n) => Ok((p.with_truncation(n).solve(count)?, n)),
            Truncation::Auto => {
                let max = AUTO_MAX.min((p.metric.grid() - 1) / 4);
                p.with_truncation(AUTO_START.min(max)).solve_converged(count, AUTO_TOLERANCE, max)
            }
        }
    }

    /// Lowest mode above the kernel threshold among the `count` lowest.
    pub fn lowest_positive(&self, p: SLProblem<'_>, count: usize) -> Result<Solved> {
        let (modes, n) = self.solve(p, count)?;
        let mode = lowest_positive(modes, ZERO_MODE_THRESHOLD).ok_or(Error::NoConvergence { iterations: 0 })?;
        Ok(Solved { mode, truncation: n })
    }

    pub fn lowest(&self, p: SLProblem<'_>) -> Result<Solved> {
        let (mut modes, n) = self.solve(p, 1)?;
        Ok(Solved { mode: modes.remove(0), truncation: n })
    }
}

#[derive(Debug, Clone)]
pub struct Solved {
    pub mode: EigenMode,
    pub truncation: usize,
}

impl Solved {
    pub fn value(&self) -> f64 {
        self.mode.value
    }

    pub fn flagged(&self) -> bool {
        !self.mode.residual_ok()
    }

    pub fn to_json(&self) -> Value {
        mode_json(&self.mode, self.truncation)
    }
}

pub fn mode_json(m: &EigenMode, truncation: usize) -> Value {
    json!({
        "value": num(m.value),
        "residual": num(m.residual),
        "flagged": !m.residual_ok(),
        "truncation": truncation,
    })
}

/// The eigenvalues that split off `4π²`. On symmetric metrics `mu1`/`mu2`
/// are the odd/even `k = 0` branches; otherwise the two lowest positive
/// `k = 0` eigenvalues.
pub struct Branches {
    pub mu1: Solved,
    pub mu2: Solved,
    pub mu3: Solved,
    pub lam_l0: f64,
    /// `l = -1` and `l = +1`; absent on degenerate metrics or when not requested.
    pub lam2sq: Option<Solved>,
    pub lam3sq: Option<Solved>,
}

impl Branches {
    pub fn compute(m: &ConformalMetric, solver: &Solver, with_dirac: bool) -> Result<Self> {
        let (mu1, mu2) = if m.is_symmetric() {
            let lap = || SLProblem::laplace(m, 0, AUTO_START);
            (solver.lowest(lap().with_parity(Parity::Odd))?, solver.lowest_positive(lap().with_parity(Parity::Even), 2)?)
        } else {
            let (modes, n) = solver.solve(SLProblem::laplace(m, 0, AUTO_START), 3)?;
            let mut pos = modes.into_iter().filter(|x| x.value > ZERO_MODE_THRESHOLD);
            let mut next = || pos.next().map(|mode| Solved { mode, truncation: n }).ok_or(Error::NoConvergence { iterations: 0 });
            (next()?, next()?)
        };
        let mu3 = solver.lowest(SLProblem::laplace(m, 1, AUTO_START))?;
        let (lam2sq, lam3sq) = if with_dirac && !m.is_degenerate() {
            (Some(solver.lowest(SLProblem::dirac(m, -1, AUTO_START))?), Some(solver.lowest(SLProblem::dirac(m, 1, AUTO_START))?))
        } else {
            (None, None)
        };
        Ok(Self { mu1, mu2, mu3, lam_l0: torus_spec::spectral::dirac_l0_closed_form(m, 1), lam2sq, lam3sq })
    }

    pub fn solved(&self) -> impl Iterator<Item = &Solved> {
        [Some(&self.mu1), Some(&self.mu2), Some(&self.mu3), self.lam2sq.as_ref(), self.lam3sq.as_ref()]
            .into_iter()
            .flatten()
    }

    pub fn laplace_min(&self) -> f64 {
        self.mu1.value().min(self.mu2.value()).min(self.mu3.value())
    }

    pub fn dirac_min(&self) -> f64 {
        self.solved_dirac().fold(self.lam_l0, f64::min)
    }

    fn solved_dirac(&self) -> impl Iterator<Item = f64> + '_ {
        [self.lam2sq.as_ref(), self.lam3sq.as_ref()].into_iter().flatten().map(Solved::value)
    }

    /// Largest `residual / value` over the solved branches.
    pub fn max_relative_residual(&self) -> f64 {
        self.solved().map(|s| s.mode.residual / s.value().abs().max(1.0)).fold(0.0, f64::max)
    }

    pub fn flagged(&self) -> bool {
        self.solved().any(Solved::flagged)
    }
}
