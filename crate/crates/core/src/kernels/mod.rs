//! Green functions of the conformal Laplacian on the model geometries.
//!
//! Normalization: `L_g Γ_P = δ_P` with `L_g = c_n Δ_g + scal_g`, so near the
//! pole `Γ_P = 1/(4(n-1)ω_{n-1} r^{n-2}) + A_P + O(r)` in a gauge that is
//! flat near `P`. Gauges are normalized to agree with the model metric at
//! `P` (see [`FlatGauge`](crate::geometry::FlatGauge)).

mod expansion;
mod models;

use serde::Serialize;

use crate::geometry::{sphere_volume, BasePoint, ConformalFactor, Dimension};
use crate::{Error, Result};

pub use expansion::{extract_mass, flat_kernel_flux, gauge_flux, gauge_profile, ExpansionOptions, GreenExpansion};
pub use models::{
    cylinder_green, cylinder_mass, cylinder_mass_image_sum, model_green, projective_green, projective_mass,
    projective_mass_at, sphere_green, ImageSumOptions,
};

/// How a kernel value was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum KernelMethod {
    ClosedForm,
    ImageSum,
    EigenSum,
}

/// `Γ_P(x)` together with where it came from.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KernelEvaluation {
    pub source: BasePoint,
    pub target: Vec<f64>,
    pub value: f64,
    pub method: KernelMethod,
}

/// `1/(4(n-1)ω_{n-1})`, the coefficient of `r^{2-n}`.
pub fn leading_normalization(n: Dimension) -> f64 {
    let omega = sphere_volume(n.get() - 1).expect("n ≥ 3");
    1.0 / (4.0 * (n.as_f64() - 1.0) * omega)
}

/// `r^{2-n}/(4(n-1)ω_{n-1})`, the fundamental solution of `c_n Δ` on `ℝⁿ`.
pub fn flat_kernel(n: Dimension, r: f64) -> Result<f64> {
    if !(r > 0.0) {
        return Err(Error::InvalidArgument(format!("flat kernel needs r > 0, got {r}")));
    }
    Ok(leading_normalization(n) * r.powf(2.0 - n.as_f64()))
}

/// `∂_r` of [`flat_kernel`].
pub fn flat_kernel_derivative(n: Dimension, r: f64) -> Result<f64> {
    Ok((2.0 - n.as_f64()) * flat_kernel(n, r)? / r)
}

/// Green function of `u^{4/(n-2)} g` from that of `g`:
/// `Γ̃_P(x) = u(P)^{-1} u(x)^{-1} Γ_P(x)`.
pub fn conformal_covariance_transform(kernel: &KernelEvaluation, u: &ConformalFactor) -> KernelEvaluation {
    let scale = u.value(&kernel.source.coords) * u.value(&kernel.target);
    KernelEvaluation {
        value: kernel.value / scale,
        ..kernel.clone()
    }
}
