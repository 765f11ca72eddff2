//! Cubical discrete exterior calculus.
//!
//! Cochains live on the cells of a rectangular grid (periodic or a block),
//! `d` is the signed incidence, the Hodge star is diagonal with the
//! primal/dual volume ratio, and conformal metrics `e^{2u}·flat` enter only
//! through the star, with weight `e^{(n-2p)u}` on `p`-cells. At the middle
//! degree that weight is one, which is what the harmonic-space and
//! invariance checks exercise.

mod grid;
mod harmonic;
mod inversion;
mod operators;
mod weitzenboeck;

pub use grid::{Cochain, CubicalGrid, MetricField, Orientation};
pub use harmonic::{harmonic_space, kernel_residual, symmetric_kernel, HarmonicOptions, HarmonicSpace};
pub use inversion::{
    annulus_block, annulus_block_with, inversion_pullback, inversion_pullback_at, inversion_residuals,
    inversion_residuals_on, pullback_norm, ConstantForm, InversionResiduals,
};
pub use operators::{
    apply, apply_to, betti_number, build_d, build_dual_star, build_star, codifferential, hodge_laplacian, incidence,
    inner_product, max_abs_entry, rank_mod_prime, SparseMatrix,
};
pub use weitzenboeck::{
    connection_laplacian, flat_weitzenboeck_check, plane_wave, plane_wave_eigenvalue, WeitzenboeckCheck,
};
