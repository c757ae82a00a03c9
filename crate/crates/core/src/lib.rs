//! Laplace and Dirac eigenvalues of conformal metrics `g = h⁴(t)(dt² + dy²)` on
//! the 2-torus with the trivial spin structure.
//!
//! The S¹ symmetry reduces both operators to periodic Sturm–Liouville problems
//! in `t`, which are solved here by Fourier–Galerkin truncation. On top of the
//! solver sit the closed-form eigenvalue variations at the flat metric and a
//! collection of test-function upper bounds.
//!
//! Module map:
//!
//! - [`trigcalc`]: real trigonometric polynomials, uniform grids, periodic solves
//! - [`metric`]: the conformal factor, deformation families and derived jets
//! - [`eigsolve`]: dense symmetric and generalized symmetric-definite eigensolvers
//! - [`spectral`]: Galerkin assembly and solution of the reduced problems
//! - [`variations`]: first, second and fourth variations at the flat metric
//! - [`bounds`]: Rayleigh-quotient and comparison bounds

#![allow(clippy::needless_range_loop)]

pub mod bounds;
pub mod eigsolve;
mod error;
pub mod metric;
pub mod spectral;
pub mod trigcalc;
pub mod variations;

pub use error::{Error, Result};

/// `4π²`, the first positive eigenvalue of both operators on the flat torus.
pub const FOUR_PI_SQ: f64 = 4.0 * std::f64::consts::PI * std::f64::consts::PI;

/// Default Galerkin truncation degree (matrix dimension `2N + 1 = 65`).
pub const DEFAULT_TRUNCATION: usize = 32;

/// Default number of uniform sample points on `[0, 1)`.
pub const DEFAULT_GRID: usize = 4096;
