//! Dimensional constants, model geometries and conformal factors.

mod chart;
mod conformal;

pub use chart::{BasePoint, Chart, FlatGauge};
pub use conformal::{ConformalFactor, Cutoff, CutoffProfile};

use std::f64::consts::PI;
use std::fmt;

use num_bigint::BigInt;
use num_rational::{BigRational, Rational64};
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Manifold dimension `n ≥ 3`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub struct Dimension(u32);

impl Dimension {
    pub fn new(n: u32) -> Result<Self> {
        if n < 3 {
            return Err(Error::InvalidDimension {
                n,
                reason: "the conformal Laplacian needs n >= 3",
            });
        }
        Ok(Self(n))
    }

    /// Dimension admissible for middle-degree form arguments: even and at least 4.
    pub fn even(n: u32) -> Result<Self> {
        let d = Self::new(n)?;
        d.require_even()?;
        Ok(d)
    }

    pub fn require_even(self) -> Result<Self> {
        if self.0 < 4 || !self.0.is_multiple_of(2) {
            return Err(Error::InvalidDimension {
                n: self.0,
                reason: "form-theoretic operations need an even dimension n >= 4",
            });
        }
        Ok(self)
    }

    pub fn get(self) -> u32 {
        self.0
    }

    pub fn as_f64(self) -> f64 {
        f64::from(self.0)
    }

    pub fn as_usize(self) -> usize {
        self.0 as usize
    }

    pub fn is_even(self) -> bool {
        self.0.is_multiple_of(2)
    }
}

impl TryFrom<u32> for Dimension {
    type Error = Error;
    fn try_from(n: u32) -> Result<Self> {
        Self::new(n)
    }
}

impl From<Dimension> for u32 {
    fn from(d: Dimension) -> u32 {
        d.0
    }
}

impl fmt::Display for Dimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Volume `ω_k` of the unit sphere `S^k ⊂ ℝ^{k+1}`, `2π^{(k+1)/2} / Γ((k+1)/2)`.
pub fn sphere_volume(k: u32) -> Result<f64> {
    if k == 0 {
        return Err(Error::InvalidArgument(
            "sphere_volume: S^0 is two points, k must be >= 1".into(),
        ));
    }
    let half = f64::from(k + 1) / 2.0;
    Ok(2.0 * PI.powf(half) / gamma_half_integer(k + 1))
}

/// `Γ(m/2)` for a positive integer `m`, by exact products.
fn gamma_half_integer(m: u32) -> f64 {
    let (mut value, mut x) = if m.is_multiple_of(2) { (1.0, 1.0) } else { (PI.sqrt(), 0.5) };
    let target = f64::from(m) / 2.0;
    while x < target {
        value *= x;
        x += 1.0;
    }
    value
}

/// `ω_k` written exactly as `coefficient · π^pi_power`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactSphereVolume {
    pub coefficient: BigRational,
    pub pi_power: u32,
}

impl ExactSphereVolume {
    pub fn to_f64(&self) -> f64 {
        self.coefficient.to_f64().unwrap_or(f64::NAN) * PI.powi(self.pi_power as i32)
    }
}

/// Exact form of `ω_k` from `ω_0 = 2`, `ω_1 = 2π` and `ω_k = 2π ω_{k-2} / (k-1)`.
pub fn sphere_volume_exact(k: u32) -> Result<ExactSphereVolume> {
    if k == 0 {
        return Err(Error::InvalidArgument(
            "sphere_volume: S^0 is two points, k must be >= 1".into(),
        ));
    }
    let (mut coefficient, mut pi_power, start) = if k.is_multiple_of(2) {
        (BigRational::from_integer(BigInt::from(2)), 0, 0)
    } else {
        (BigRational::from_integer(BigInt::from(2)), 1, 1)
    };
    let mut j = start + 2;
    while j <= k {
        coefficient *= BigRational::new(BigInt::from(2), BigInt::from(j - 1));
        pi_power += 1;
        j += 2;
    }
    Ok(ExactSphereVolume { coefficient, pi_power })
}

/// `c_n = 4(n-1)/(n-2)`, the coefficient of `Δ_g` in the conformal Laplacian.
pub fn conformal_laplacian_coefficient(n: Dimension) -> Rational64 {
    let n = i64::from(n.get());
    Rational64::new(4 * (n - 1), n - 2)
}

/// `c_n` as a float.
pub fn conformal_coefficient_f64(n: Dimension) -> f64 {
    let n = n.as_f64();
    4.0 * (n - 1.0) / (n - 2.0)
}

/// Closed conformally flat model manifolds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ModelDescriptor", into = "ModelDescriptor")]
pub enum ModelGeometry {
    /// Unit round sphere `S^n`.
    RoundSphere { n: Dimension },
    /// `S^n` modulo the antipodal map, with the round metric.
    ProjectiveSpace { n: Dimension },
    /// `(ℝⁿ∖{0}) / (x ↦ e^L x)` with metric `|x|⁻² |dx|²`, isometric to `S¹(L) × S^{n-1}`.
    CylinderQuotient { n: Dimension, length: f64 },
    /// Flat torus `ℝⁿ / ⊕ periods_i ℤ`. Only used by the cubical DEC.
    FlatTorus { n: Dimension, periods: Vec<f64> },
}

impl ModelGeometry {
    pub fn sphere(n: u32) -> Result<Self> {
        Ok(Self::RoundSphere { n: Dimension::new(n)? })
    }

    pub fn projective(n: u32) -> Result<Self> {
        Ok(Self::ProjectiveSpace { n: Dimension::new(n)? })
    }

    pub fn cylinder(n: u32, length: f64) -> Result<Self> {
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::InvalidModel(format!(
                "cylinder length L must be positive and finite, got {length}"
            )));
        }
        Ok(Self::CylinderQuotient {
            n: Dimension::new(n)?,
            length,
        })
    }

    pub fn torus(n: u32, periods: Vec<f64>) -> Result<Self> {
        let n = Dimension::new(n)?;
        if periods.len() != n.as_usize() {
            return Err(Error::InvalidModel(format!(
                "torus needs {n} periods, got {}",
                periods.len()
            )));
        }
        if let Some(bad) = periods.iter().find(|p| !(p.is_finite() && **p > 0.0)) {
            return Err(Error::InvalidModel(format!(
                "torus periods must be positive, got {bad}"
            )));
        }
        Ok(Self::FlatTorus { n, periods })
    }

    pub fn dimension(&self) -> Dimension {
        match self {
            Self::RoundSphere { n }
            | Self::ProjectiveSpace { n }
            | Self::CylinderQuotient { n, .. }
            | Self::FlatTorus { n, .. } => *n,
        }
    }

    /// Short name used in descriptors and reports.
    pub fn name(&self) -> &'static str {
        match self {
            Self::RoundSphere { .. } => "sphere",
            Self::ProjectiveSpace { .. } => "projective",
            Self::CylinderQuotient { .. } => "cylinder",
            Self::FlatTorus { .. } => "torus",
        }
    }

    /// Constant scalar curvature of the reference metric.
    pub fn scalar_curvature(&self) -> f64 {
        let n = self.dimension().as_f64();
        match self {
            Self::RoundSphere { .. } | Self::ProjectiveSpace { .. } => n * (n - 1.0),
            Self::CylinderQuotient { .. } => (n - 1.0) * (n - 2.0),
            Self::FlatTorus { .. } => 0.0,
        }
    }

    /// Whether `L_g` is invertible. On these constant-curvature models this
    /// is exactly the sign of the scalar curvature: for `scal > 0` the
    /// operator is bounded below by `scal`, while on the torus it is `c_n Δ`
    /// and annihilates constants.
    pub fn check_conformal_class_admissible(&self) -> bool {
        !matches!(self, Self::FlatTorus { .. })
    }

    /// Total volume of the reference metric.
    pub fn volume(&self) -> f64 {
        let n = self.dimension().get();
        match self {
            Self::RoundSphere { .. } => sphere_volume(n).expect("n >= 3"),
            Self::ProjectiveSpace { .. } => 0.5 * sphere_volume(n).expect("n >= 3"),
            Self::CylinderQuotient { length, .. } => length * sphere_volume(n - 1).expect("n >= 3"),
            Self::FlatTorus { periods, .. } => periods.iter().product(),
        }
    }

    /// Errors unless `L_g` is invertible, naming the obstruction.
    pub fn require_admissible(&self) -> Result<()> {
        if self.check_conformal_class_admissible() {
            Ok(())
        } else {
            Err(Error::NotInvertible(self.to_string()))
        }
    }

    /// A canonical base point: `e_0` in the ambient or punctured chart.
    pub fn default_base_point(&self) -> BasePoint {
        let n = self.dimension().as_usize();
        match self {
            Self::RoundSphere { .. } | Self::ProjectiveSpace { .. } => {
                let mut p = vec![0.0; n + 1];
                p[0] = 1.0;
                BasePoint::on_sphere(p).expect("unit vector")
            }
            Self::CylinderQuotient { length, .. } => {
                let mut p = vec![0.0; n];
                p[0] = 1.0;
                BasePoint::on_cylinder(p, *length).expect("nonzero point")
            }
            Self::FlatTorus { .. } => BasePoint::on_torus(vec![0.0; n]),
        }
    }
}

impl fmt::Display for ModelGeometry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::RoundSphere { n } => write!(f, "S^{n}"),
            Self::ProjectiveSpace { n } => write!(f, "RP^{n}"),
            Self::CylinderQuotient { n, length } => write!(f, "S^1({length}) x S^{}", n.get() - 1),
            Self::FlatTorus { n, .. } => write!(f, "T^{n}"),
        }
    }
}

/// Wire form of [`ModelGeometry`]:
/// `{"model": "sphere"|"projective"|"cylinder"|"torus", "n": int, "L": float?, "periods": [float]?}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelDescriptor {
    pub model: String,
    pub n: u32,
    #[serde(rename = "L", default, skip_serializing_if = "Option::is_none")]
    pub length: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub periods: Option<Vec<f64>>,
}

impl TryFrom<ModelDescriptor> for ModelGeometry {
    type Error = Error;

    fn try_from(d: ModelDescriptor) -> Result<Self> {
        let unexpected = |field: &str| {
            Err(Error::InvalidModel(format!(
                "field `{field}` does not apply to model `{}`",
                d.model
            )))
        };
        match d.model.as_str() {
            "sphere" | "projective" => {
                if d.length.is_some() {
                    return unexpected("L");
                }
                if d.periods.is_some() {
                    return unexpected("periods");
                }
                if d.model == "sphere" {
                    Self::sphere(d.n)
                } else {
                    Self::projective(d.n)
                }
            }
            "cylinder" => {
                if d.periods.is_some() {
                    return unexpected("periods");
                }
                let length = d
                    .length
                    .ok_or_else(|| Error::InvalidModel("cylinder needs `L`".into()))?;
                Self::cylinder(d.n, length)
            }
            "torus" => {
                if d.length.is_some() {
                    return unexpected("L");
                }
                let periods = d.periods.unwrap_or_else(|| vec![1.0; d.n as usize]);
                Self::torus(d.n, periods)
            }
            other => Err(Error::InvalidModel(format!(
                "unknown model `{other}` (expected sphere, projective, cylinder or torus)"
            ))),
        }
    }
}

impl From<ModelGeometry> for ModelDescriptor {
    fn from(m: ModelGeometry) -> Self {
        let model = m.name().to_string();
        let n = m.dimension().get();
        match m {
            ModelGeometry::RoundSphere { .. } | ModelGeometry::ProjectiveSpace { .. } => Self {
                model,
                n,
                length: None,
                periods: None,
            },
            ModelGeometry::CylinderQuotient { length, .. } => Self {
                model,
                n,
                length: Some(length),
                periods: None,
            },
            ModelGeometry::FlatTorus { periods, .. } => Self {
                model,
                n,
                length: None,
                periods: Some(periods),
            },
        }
    }
}
