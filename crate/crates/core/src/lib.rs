//! Mass constants of conformally flat model manifolds.
//!
//! The crate computes Green functions of the conformal Laplacian
//! `L_g = 4(n-1)/(n-2) Δ_g + scal_g` on the round sphere, real projective
//! space and the cylinder quotient `S¹(L) × S^{n-1}`, reads off the constant
//! term `A_P` of their expansion near the pole in a gauge that is flat near
//! `P`, and cross-checks every value with an independent spectral solver.
//!
//! Two companion subsystems support the computation:
//!
//! * [`series`] reproduces the radial asymptotics of the middle-degree form
//!   argument exactly, with rational coefficients and formal symbols.
//! * [`dec`] is a cubical discrete exterior calculus used to exercise the
//!   middle-degree Hodge star, codifferential and harmonic forms.
//!
//! [`report`] ties everything into reproducible, machine-readable runs.

pub mod dec;
pub mod error;
pub mod extrapolate;
pub mod geometry;
pub mod kernels;
pub mod quadrature;
pub mod report;
pub mod series;
pub mod spectral;
pub mod summation;

pub use error::{Error, Result};
pub use geometry::{BasePoint, ConformalFactor, Dimension, ModelGeometry};
