//! Reading the constant term of a Green function in a flat gauge.

use serde::Serialize;

use super::conformal_covariance_transform;
use super::{flat_kernel, flat_kernel_derivative, leading_normalization, model_green};
use crate::extrapolate::{extrapolate_to_zero, Extrapolated, RadialSample, RichardsonOptions};
use crate::geometry::{conformal_coefficient_f64, BasePoint, ConformalFactor, Dimension, FlatGauge, ModelGeometry};
use crate::quadrature::{sphere_product_rule, symmetric_directions};
use crate::summation::NeumaierSum;
use crate::{Error, Result};

/// Sampling ball and extrapolation model.
#[derive(Debug, Clone, Copy, PartialEq)]
#[derive(Default)]
pub struct ExpansionOptions {
    /// Radius `r₀` of the flat ball; samples sit at `r₀ 2^{-i}`.
    /// `None` picks `min(1, ½·embedding radius)`.
    pub radius: Option<f64>,
    pub richardson: RichardsonOptions,
}


/// Average of `f(Y) - K(|Y|)` over the symmetric direction set at radius `r`.
pub fn gauge_profile<F>(n: Dimension, r: f64, f: F) -> Result<f64>
where
    F: Fn(&[f64]) -> Result<f64>,
{
    let dirs = symmetric_directions(n.as_usize());
    let k = flat_kernel(n, r)?;
    let mut acc = NeumaierSum::new();
    for d in &dirs {
        let y: Vec<f64> = d.iter().map(|v| r * v).collect();
        acc.add(f(&y)? - k);
    }
    Ok(acc.value() / dirs.len() as f64)
}

/// Limit of the averaged regular part `Γ̄(r) - 1/(4(n-1)ω r^{n-2})` as `r → 0`.
pub fn extract_mass(samples: &[RadialSample], options: &RichardsonOptions) -> Result<Extrapolated> {
    extrapolate_to_zero(samples, options.degree, options.tolerance)
}

/// Green function near `P` split as `K(r) + A_P + f`, in a flat gauge.
#[derive(Debug, Clone, Serialize)]
pub struct GreenExpansion {
    pub n: Dimension,
    pub mass: f64,
    pub error_estimate: f64,
    pub fit_residual: f64,
    pub leading_normalization: f64,
    /// Radius of the flat ball the samples were taken in.
    pub radius: f64,
    /// Averaged `Γ - K` at the sample radii.
    pub regular_part: Vec<RadialSample>,
    #[serde(skip)]
    pub gauge: ConformalFactor,
}

impl GreenExpansion {
    /// Expansion of `F(Y)`, a Green function already written in flat
    /// coordinates `Y` centred at the pole.
    pub fn from_flat_coordinates<F>(
        n: Dimension,
        radius: f64,
        gauge: ConformalFactor,
        f: F,
        options: &RichardsonOptions,
    ) -> Result<Self>
    where
        F: Fn(&[f64]) -> Result<f64>,
    {
        let flat = gauge.flat_radius().ok_or_else(|| {
            Error::InvalidArgument(format!(
                "gauge '{}' is not flat near the pole; refusing to read off a mass",
                gauge.label()
            ))
        })?;
        if radius > flat * (1.0 + 1e-12) {
            return Err(Error::InvalidArgument(format!(
                "sampling radius {radius} exceeds the flat radius {flat} of gauge '{}'",
                gauge.label()
            )));
        }
        let regular_part = options
            .radii(radius)
            .into_iter()
            .map(|r| {
                Ok(RadialSample {
                    r,
                    value: gauge_profile(n, r, &f)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let fit = extract_mass(&regular_part, options)?;
        Ok(Self {
            n,
            mass: fit.value,
            error_estimate: fit.error_estimate,
            fit_residual: fit.residual,
            leading_normalization: leading_normalization(n),
            radius,
            regular_part,
            gauge,
        })
    }

    /// Expansion of an arbitrary model-chart Green function, transformed
    /// into the flat gauge of `model` at `p`.
    pub fn from_model_function<G>(
        model: &ModelGeometry,
        p: &BasePoint,
        green: G,
        options: &ExpansionOptions,
    ) -> Result<Self>
    where
        G: Fn(&[f64]) -> Result<f64>,
    {
        let chart = FlatGauge::new(model, p)?;
        let radius = options
            .radius
            .unwrap_or_else(|| (0.5 * chart.embedding_radius()).min(1.0));
        let gauge = ConformalFactor::flat_gauge(model, p, radius)?;
        let u_p = gauge.value(&p.coords);
        let f = |y: &[f64]| -> Result<f64> {
            let x = chart.to_model(y);
            Ok(green(&x)? / (u_p * gauge.value(&x)))
        };
        Self::from_flat_coordinates(model.dimension(), radius, gauge.clone(), f, &options.richardson)
    }

    /// Expansion of the model's own Green function (closed form or image sum).
    pub fn for_model(model: &ModelGeometry, p: &BasePoint, options: &ExpansionOptions) -> Result<Self> {
        model.require_admissible()?;
        let chart = FlatGauge::new(model, p)?;
        let radius = options
            .radius
            .unwrap_or_else(|| (0.5 * chart.embedding_radius()).min(1.0));
        let gauge = ConformalFactor::flat_gauge(model, p, radius)?;
        let f = |y: &[f64]| -> Result<f64> {
            let x = chart.to_model(y);
            let k = model_green(model, p, &x)?;
            Ok(conformal_covariance_transform(&k, &gauge).value)
        };
        Self::from_flat_coordinates(model.dimension(), radius, gauge.clone(), f, &options.richardson)
    }
}

/// `-c_n ∮_{S_r} ∂_r F dA` for `F` in flat coordinates, with the radial
/// derivative taken by a fourth-order central difference and the sphere
/// integral by a product rule with `m` polar nodes.
pub fn gauge_flux<F>(n: Dimension, r: f64, m: usize, f: F) -> Result<f64>
where
    F: Fn(&[f64]) -> Result<f64>,
{
    let (dirs, weights) = sphere_product_rule(n.as_usize(), m);
    let h = 1e-3 * r;
    let at = |d: &[f64], s: f64| -> Result<f64> {
        let y: Vec<f64> = d.iter().map(|v| s * v).collect();
        f(&y)
    };
    let mut acc = NeumaierSum::new();
    for (d, w) in dirs.iter().zip(&weights) {
        let dr = (-at(d, r + 2.0 * h)? + 8.0 * at(d, r + h)? - 8.0 * at(d, r - h)? + at(d, r - 2.0 * h)?) / (12.0 * h);
        acc.add(w * dr);
    }
    Ok(-conformal_coefficient_f64(n) * acc.value() * r.powf(n.as_f64() - 1.0))
}

/// `∮_{S_r} c_n |∂_r K| dA` by quadrature; equals 1 for the correct normalization.
pub fn flat_kernel_flux(n: Dimension, r: f64, m: usize) -> Result<f64> {
    let (_, weights) = sphere_product_rule(n.as_usize(), m);
    let radial = conformal_coefficient_f64(n) * flat_kernel_derivative(n, r)?.abs() * r.powf(n.as_f64() - 1.0);
    let mut acc = NeumaierSum::new();
    for w in &weights {
        acc.add(w * radial);
    }
    Ok(acc.value())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{cylinder_mass, projective_mass};
    use approx::assert_abs_diff_eq;

    #[test]
    fn sphere_mass_vanishes() {
        let model = ModelGeometry::sphere(4).unwrap();
        let p = BasePoint::on_sphere(vec![0.3, 0.1, -0.5, 0.2, 0.6]).unwrap();
        let e = GreenExpansion::for_model(&model, &p, &ExpansionOptions::default()).unwrap();
        assert!(e.mass.abs() < 1e-10, "{}", e.mass);
    }

    #[test]
    fn projective_extraction_matches_closed_form() {
        let model = ModelGeometry::projective(4).unwrap();
        let p = model.default_base_point();
        let e = GreenExpansion::for_model(&model, &p, &ExpansionOptions::default()).unwrap();
        let exact = projective_mass(model.dimension()).unwrap();
        assert_abs_diff_eq!(e.mass, exact, epsilon = 1e-6);
    }

    #[test]
    fn cylinder_extraction_matches_closed_form() {
        for l in [0.5, 2.0] {
            let model = ModelGeometry::cylinder(4, l).unwrap();
            let p = model.default_base_point();
            let e = GreenExpansion::for_model(&model, &p, &ExpansionOptions::default()).unwrap();
            let exact = cylinder_mass(&model).unwrap();
            assert!(
                (e.mass - exact).abs() < 1e-6 * exact.max(1e-3),
                "L={l}: {} vs {exact}",
                e.mass
            );
        }
    }

    #[test]
    fn gauge_flux_is_one_for_every_model() {
        for model in [
            ModelGeometry::sphere(4).unwrap(),
            ModelGeometry::projective(4).unwrap(),
            ModelGeometry::cylinder(4, 2.0).unwrap(),
        ] {
            let p = model.default_base_point();
            let chart = FlatGauge::new(&model, &p).unwrap();
            let gauge = ConformalFactor::flat_gauge(&model, &p, 0.3).unwrap();
            let f = |y: &[f64]| -> Result<f64> {
                let x = chart.to_model(y);
                Ok(conformal_covariance_transform(&model_green(&model, &p, &x)?, &gauge).value)
            };
            for r in [0.05, 0.1] {
                let flux = gauge_flux(model.dimension(), r, 8, f).unwrap();
                assert_abs_diff_eq!(flux, 1.0, epsilon = 1e-8);
            }
        }
    }

    #[test]
    fn refuses_non_flat_gauge() {
        let n = Dimension::new(4).unwrap();
        let err = GreenExpansion::from_flat_coordinates(
            n,
            0.5,
            ConformalFactor::identity(),
            |_| Ok(0.0),
            &RichardsonOptions::default(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::InvalidArgument(_)));
    }
}
