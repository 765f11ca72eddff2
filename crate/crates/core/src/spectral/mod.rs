//! Spectral solver for the Green function of `L_g` on the admissible models.

mod basis;
mod perturb;
mod solve;

pub use basis::{
    build_eigenbasis, cylinder_eigenvalue, cylinder_frequency_cutoff, harmonic_dimension, sphere_eigenvalue,
    zonal_harmonics, zonal_norm_squared, EigenBasis, Mode,
};
pub use perturb::{
    check_scalar_curvature, perturbed_mass, perturbed_mass_from, perturbed_scalar_curvature, random_perturbation,
    PerturbedMass, SecondGauge, CURVATURE_SAMPLES,
};
pub use solve::{default_cutoff_radius, solve_regular_part, RegularPartSolution, SolverOptions, SpectralMass};
