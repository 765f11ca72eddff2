//! Smooth positive conformal factors and radial cut-offs.

use std::fmt;
use std::sync::Arc;

use statrs::function::erf::erfc;

use super::{BasePoint, FlatGauge, ModelGeometry};
use crate::{Error, Result};

type Eval = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// Smooth positive function `u` on a model, acting on metrics by
/// `g ↦ u^{4/(n-2)} g`. Points are passed in the model's chart
/// (ambient unit vectors or punctured-chart vectors).
#[derive(Clone)]
pub struct ConformalFactor {
    eval: Eval,
    flat_radius: Option<f64>,
    label: String,
}

impl fmt::Debug for ConformalFactor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ConformalFactor")
            .field("label", &self.label)
            .field("flat_radius", &self.flat_radius)
            .finish()
    }
}

impl ConformalFactor {
    pub fn analytic<F>(label: impl Into<String>, f: F) -> Self
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        Self {
            eval: Arc::new(f),
            flat_radius: None,
            label: label.into(),
        }
    }

    pub fn constant(c: f64) -> Self {
        Self::analytic(format!("constant {c}"), move |_| c)
    }

    pub fn identity() -> Self {
        Self::constant(1.0)
    }

    /// Marks the factor as producing a metric flat on the gauge ball of this radius.
    pub fn with_flat_radius(mut self, r0: f64) -> Self {
        self.flat_radius = Some(r0);
        self
    }

    /// Global factor equal to the gauge factor `W` of `FlatGauge` on the
    /// gauge ball of radius `r0` and to `1` beyond radius `2 r0`.
    pub fn flat_gauge(model: &ModelGeometry, p: &BasePoint, r0: f64) -> Result<Self> {
        let gauge = FlatGauge::new(model, p)?;
        if !(r0 > 0.0 && 2.0 * r0 <= gauge.embedding_radius()) {
            return Err(Error::InvalidArgument(format!(
                "flat gauge radius {r0} must satisfy 0 < 2 r0 <= {}",
                gauge.embedding_radius()
            )));
        }
        let blend = Cutoff::new(2.0 * r0, CutoffProfile::default());
        let label = format!("flat gauge of {model} (r0 = {r0})");
        Ok(Self::analytic(label, move |x| {
            let rho = gauge.radius(x);
            let weight = blend.value(rho);
            if weight == 0.0 {
                1.0
            } else {
                (weight * gauge.factor(x).ln()).exp()
            }
        })
        .with_flat_radius(r0))
    }

    #[inline]
    pub fn value(&self, x: &[f64]) -> f64 {
        (self.eval)(x)
    }

    pub fn flat_radius(&self) -> Option<f64> {
        self.flat_radius
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Pointwise product.
    pub fn times(&self, other: &ConformalFactor) -> ConformalFactor {
        let (a, b) = (self.eval.clone(), other.eval.clone());
        Self::analytic(format!("({}) * ({})", self.label, other.label), move |x| a(x) * b(x))
    }

    /// Pointwise reciprocal.
    pub fn reciprocal(&self) -> ConformalFactor {
        let a = self.eval.clone();
        Self::analytic(format!("1 / ({})", self.label), move |x| 1.0 / a(x))
    }
}

/// Shape of the transition from 1 to 0 on `s ∈ [0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CutoffProfile {
    /// `½ erfc(2k(s - ½))`. For `k ≥ 6` the value is exactly `1.0` at `s = 0`
    /// and below `1e-17` at `s = 1`, so the clipped ramp is smooth to
    /// working precision and its spectrum decays like a Gaussian.
    ErfRamp { steepness: f64 },
    /// `1 - (10s³ - 15s⁴ + 6s⁵)`, a C² ramp.
    Quintic,
}

impl Default for CutoffProfile {
    fn default() -> Self {
        Self::ErfRamp { steepness: 6.0 }
    }
}

/// Radial cut-off `η(ρ)`: `1` on `ρ ≤ r0/2`, `0` on `ρ ≥ r0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cutoff {
    pub radius: f64,
    pub profile: CutoffProfile,
}

impl Cutoff {
    pub fn new(radius: f64, profile: CutoffProfile) -> Self {
        Self { radius, profile }
    }

    fn ramp(&self, s: f64) -> (f64, f64, f64) {
        match self.profile {
            CutoffProfile::ErfRamp { steepness: k } => {
                let z = 2.0 * k * (s - 0.5);
                let value = 0.5 * erfc(z);
                let d1 = -2.0 * k * (-z * z).exp() / std::f64::consts::PI.sqrt();
                let d2 = -2.0 * z * 2.0 * k * d1;
                (value, d1, d2)
            }
            CutoffProfile::Quintic => {
                let value = 1.0 - s * s * s * (10.0 - 15.0 * s + 6.0 * s * s);
                let d1 = -30.0 * s * s * (1.0 - s) * (1.0 - s);
                let d2 = -60.0 * s * (1.0 - s) * (1.0 - 2.0 * s);
                (value, d1, d2)
            }
        }
    }

    /// `η(ρ)`.
    pub fn value(&self, rho: f64) -> f64 {
        self.with_derivatives(rho).0
    }

    /// `(η, η', η'')` at `ρ`.
    pub fn with_derivatives(&self, rho: f64) -> (f64, f64, f64) {
        let half = 0.5 * self.radius;
        let s = (rho - half) / half;
        if s <= 0.0 {
            (1.0, 0.0, 0.0)
        } else if s >= 1.0 {
            (0.0, 0.0, 0.0)
        } else {
            let (v, d1, d2) = self.ramp(s);
            (v, d1 / half, d2 / (half * half))
        }
    }

    /// Whether `ρ` lies strictly inside the transition annulus.
    pub fn in_transition(&self, rho: f64) -> bool {
        rho > 0.5 * self.radius && rho < self.radius
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn erf_ramp_is_exact_at_the_ends() {
        let c = Cutoff::new(2.0, CutoffProfile::default());
        let (v, _, _) = c.ramp(0.0);
        assert_eq!(v, 1.0);
        let (v, d1, d2) = c.ramp(1.0);
        assert!(v < 1e-16 && d1.abs() < 1e-14 && d2.abs() < 1e-12);
        assert_eq!(c.value(0.3), 1.0);
        assert_eq!(c.value(2.5), 0.0);
    }

    #[test]
    fn cutoff_derivatives_match_finite_differences() {
        for profile in [CutoffProfile::default(), CutoffProfile::Quintic] {
            let c = Cutoff::new(1.5, profile);
            for &rho in &[0.8, 1.0, 1.2, 1.4] {
                let h = 1e-5;
                let (_, d1, d2) = c.with_derivatives(rho);
                let fd1 = (c.value(rho + h) - c.value(rho - h)) / (2.0 * h);
                let fd2 = (c.value(rho + h) - 2.0 * c.value(rho) + c.value(rho - h)) / (h * h);
                assert_abs_diff_eq!(d1, fd1, epsilon = 1e-6 * (1.0 + d1.abs()));
                assert_abs_diff_eq!(d2, fd2, epsilon = 1e-3 * (1.0 + d2.abs()));
            }
        }
    }

    #[test]
    fn flat_gauge_factor_matches_chart_inside_ball() {
        let model = ModelGeometry::sphere(4).unwrap();
        let p = model.default_base_point();
        let u = ConformalFactor::flat_gauge(&model, &p, 0.5).unwrap();
        let g = FlatGauge::new(&model, &p).unwrap();
        let x = g.to_model(&[0.1, 0.2, -0.1, 0.05]);
        assert_eq!(u.value(&x), g.factor(&x));
        let far = g.to_model(&[3.0, 0.0, 0.0, 0.0]);
        assert_eq!(u.value(&far), 1.0);
        assert!(ConformalFactor::flat_gauge(&ModelGeometry::projective(4).unwrap(), &p, 1.5).is_err());
    }
}
