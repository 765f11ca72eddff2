//! Richardson-style extrapolation of `r ↦ value(r)` to `r = 0`.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::{Error, Result};

/// One value of a radial profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RadialSample {
    pub r: f64,
    pub value: f64,
}

/// Sampling radii `r₀ 2^{-i}` and the polynomial model used for the fit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RichardsonOptions {
    pub first_level: i32,
    pub last_level: i32,
    pub degree: usize,
    /// Largest admissible fit residual.
    pub tolerance: f64,
}

impl Default for RichardsonOptions {
    fn default() -> Self {
        Self {
            first_level: 2,
            last_level: 8,
            degree: 2,
            tolerance: 1e-6,
        }
    }
}

impl RichardsonOptions {
    pub fn with_tolerance(mut self, tolerance: f64) -> Self {
        self.tolerance = tolerance;
        self
    }

    /// `r₀ 2^{-i}` for `i = first_level..=last_level`, decreasing.
    pub fn radii(&self, r0: f64) -> Vec<f64> {
        (self.first_level..=self.last_level)
            .map(|i| r0 * 2f64.powi(-i))
            .collect()
    }
}

/// Limit at `r = 0` with diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Extrapolated {
    pub value: f64,
    /// Change of the limit when the coarsest sample is dropped.
    pub error_estimate: f64,
    /// Largest absolute fit residual.
    pub residual: f64,
}

fn fit_intercept(samples: &[RadialSample], degree: usize) -> Result<(f64, f64)> {
    let scale = samples.iter().map(|s| s.r.abs()).fold(0.0, f64::max);
    let a = DMatrix::from_fn(samples.len(), degree + 1, |i, j| (samples[i].r / scale).powi(j as i32));
    let b = DVector::from_iterator(samples.len(), samples.iter().map(|s| s.value));
    let coeffs = a
        .clone()
        .svd(true, true)
        .solve(&b, 1e-14)
        .map_err(|e| Error::InvalidArgument(format!("least-squares fit failed: {e}")))?;
    let residual = (&a * &coeffs - &b).amax();
    Ok((coeffs[0], residual))
}

/// Least-squares fit of a polynomial of the given degree in `r`; the
/// intercept is the limit. Fails when the samples do not follow the model.
pub fn extrapolate_to_zero(samples: &[RadialSample], degree: usize, tolerance: f64) -> Result<Extrapolated> {
    if samples.len() < degree + 2 {
        return Err(Error::InvalidArgument(format!(
            "extrapolation with degree {degree} needs at least {} samples, got {}",
            degree + 2,
            samples.len()
        )));
    }
    if samples.iter().any(|s| !(s.r > 0.0 && s.value.is_finite())) {
        return Err(Error::InvalidArgument(
            "extrapolation samples need positive radii and finite values".into(),
        ));
    }
    let (value, residual) = fit_intercept(samples, degree)?;
    let coarsest = samples
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.r.total_cmp(&b.1.r))
        .map(|(i, _)| i)
        .unwrap_or(0);
    let finer: Vec<RadialSample> = samples
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != coarsest)
        .map(|(_, s)| *s)
        .collect();
    let (finer_value, _) = fit_intercept(&finer, degree)?;
    let error_estimate = (value - finer_value).abs();
    if !(residual <= tolerance) {
        return Err(Error::Extrapolation {
            estimate: value,
            residual,
            tolerance,
        });
    }
    Ok(Extrapolated {
        value,
        error_estimate,
        residual,
    })
}

/// Samples `profile` at the option radii and extrapolates.
pub fn richardson<F: Fn(f64) -> f64>(
    profile: F,
    r0: f64,
    options: &RichardsonOptions,
) -> Result<(Extrapolated, Vec<RadialSample>)> {
    let samples: Vec<RadialSample> = options
        .radii(r0)
        .into_iter()
        .map(|r| RadialSample { r, value: profile(r) })
        .collect();
    let out = extrapolate_to_zero(&samples, options.degree, options.tolerance)?;
    Ok((out, samples))
}
