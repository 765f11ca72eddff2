//! Exact series arithmetic for the small-`r` expansion of the blown-up metric.

mod poly;
mod radial;
mod verify;

pub use poly::{Monomial, Symbol, SymbolicPoly};
pub use radial::{RadialSeries, EXACT_ORDER};
pub use verify::{
    build_g_series, build_phi_norm_series, default_order, omega_a, verify_flux_limit, verify_mass_derivative,
    CoefficientCheck, CrossTermConvention, FluxLimitReport, MassDerivativeReport,
};
