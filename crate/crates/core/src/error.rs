use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("grid of {samples} points cannot resolve degree {degree} (need at least {})", 2 * degree + 1)]
    Undersampled { samples: usize, degree: usize },

    #[error("periodic solve is not solvable: resonant mode {mode} has magnitude {magnitude:.3e}")]
    SolvabilityViolated { mode: usize, magnitude: f64 },

    #[error("conformal factor h^4 is not positive at t = {t} (value {value:.3e})")]
    NonPositiveMetric { t: f64, value: f64 },

    #[error("metric has zeros of h^4; {0} requires a non-degenerate metric")]
    DegenerateMetric(&'static str),

    #[error("matrix is not positive definite (pivot {pivot})")]
    NotPositiveDefinite { pivot: usize },

    #[error("symmetric eigensolver did not converge within {iterations} iterations")]
    NoConvergence { iterations: usize },

    #[error("unsupported weight index {0}")]
    UnsupportedIndex(i32),

    #[error("eigenfunction changes sign (minimum {min:.3e})")]
    NotPositiveMode { min: f64 },

    #[error("function is not even about t = 1/2 (asymmetry {residual:.3e})")]
    SymmetryViolated { residual: f64 },

    #[error("test function is not odd about t = 1/2 (residual {residual:.3e})")]
    AntisymmetryViolated { residual: f64 },

    #[error("metric is not symmetric about t = 1/2")]
    MetricNotSymmetric,

    #[error("hypothesis violated: {name} = {residual:.3e} (must vanish)")]
    HypothesisViolated { name: String, residual: f64 },

    #[error("eigenvalue is not simple (gap {gap:.3e})")]
    EigenvalueNotSimple { gap: f64 },

    #[error("quotient is singular: {0}")]
    SingularQuotient(String),

    #[error("invalid metric description: {0}")]
    InvalidSpec(String),
}
