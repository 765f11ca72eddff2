//! Points on the models and the canonical flat-near-P gauge charts.

use serde::{Deserialize, Serialize};

use super::ModelGeometry;
use crate::{Error, Result};

/// Which coordinates a point is written in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Chart {
    /// Unit vector in `ℝ^{n+1}` (sphere and projective space; for the latter
    /// `x` and `-x` denote the same point).
    Ambient,
    /// Point of `ℝⁿ∖{0}` representing its orbit under `x ↦ e^L x`.
    Punctured,
    /// Cartesian coordinates on the torus.
    Torus,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BasePoint {
    pub coords: Vec<f64>,
    pub chart: Chart,
}

impl BasePoint {
    /// Normalizes `x` onto the unit sphere.
    pub fn on_sphere(x: Vec<f64>) -> Result<Self> {
        let norm = norm(&x);
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::InvalidArgument("sphere point must be nonzero".into()));
        }
        Ok(Self {
            coords: x.into_iter().map(|v| v / norm).collect(),
            chart: Chart::Ambient,
        })
    }

    /// Stores the fundamental-domain representative with `1 ≤ |x| < e^L`.
    pub fn on_cylinder(x: Vec<f64>, length: f64) -> Result<Self> {
        let r = norm(&x);
        if !(r.is_finite() && r > 0.0) {
            return Err(Error::InvalidArgument(
                "cylinder point must be a nonzero vector of R^n".into(),
            ));
        }
        let shift = (r.ln() / length).floor();
        let scale = (-shift * length).exp();
        Ok(Self {
            coords: x.into_iter().map(|v| v * scale).collect(),
            chart: Chart::Punctured,
        })
    }

    pub fn on_torus(x: Vec<f64>) -> Self {
        Self {
            coords: x,
            chart: Chart::Torus,
        }
    }
}

/// Conformal chart `Y ∈ ℝⁿ` around `P` in which `W^{4/(n-2)} g = |dY|²`,
/// normalized by `W(P) = 1` and `Y(P) = 0`.
///
/// * sphere / projective space: stereographic projection from `-P`, scaled
///   so the chart is isometric at `P`; `W = (2 / (1 + ⟨x,P⟩))^{(n-2)/2}`.
/// * cylinder: `Y = (x - P)/|P|` in the punctured chart; `W = (|x|/|P|)^{(n-2)/2}`.
#[derive(Debug, Clone)]
pub struct FlatGauge {
    model: ModelGeometry,
    center: Vec<f64>,
    frame: Vec<Vec<f64>>,
    scale: f64,
}

impl FlatGauge {
    pub fn new(model: &ModelGeometry, p: &BasePoint) -> Result<Self> {
        let n = model.dimension().as_usize();
        match model {
            ModelGeometry::RoundSphere { .. } | ModelGeometry::ProjectiveSpace { .. } => {
                if p.chart != Chart::Ambient || p.coords.len() != n + 1 {
                    return Err(Error::InvalidArgument(format!(
                        "base point for {model} must be a unit vector of R^{}",
                        n + 1
                    )));
                }
                Ok(Self {
                    model: model.clone(),
                    center: p.coords.clone(),
                    frame: orthonormal_complement(&p.coords),
                    scale: 1.0,
                })
            }
            ModelGeometry::CylinderQuotient { .. } => {
                if p.chart != Chart::Punctured || p.coords.len() != n {
                    return Err(Error::InvalidArgument(format!(
                        "base point for {model} must be a point of R^{n}"
                    )));
                }
                Ok(Self {
                    model: model.clone(),
                    center: p.coords.clone(),
                    frame: Vec::new(),
                    scale: norm(&p.coords),
                })
            }
            ModelGeometry::FlatTorus { .. } => Err(Error::NotInvertible(model.to_string())),
        }
    }

    pub fn model(&self) -> &ModelGeometry {
        &self.model
    }

    pub fn center(&self) -> &[f64] {
        &self.center
    }

    fn half_weight(&self) -> f64 {
        (self.model.dimension().as_f64() - 2.0) / 2.0
    }

    /// Largest gauge radius whose ball embeds in the model.
    pub fn embedding_radius(&self) -> f64 {
        match &self.model {
            ModelGeometry::RoundSphere { .. } => f64::INFINITY,
            ModelGeometry::ProjectiveSpace { .. } => 2.0,
            ModelGeometry::CylinderQuotient { length, .. } => (length / 2.0).tanh().min(1.0),
            ModelGeometry::FlatTorus { .. } => 0.0,
        }
    }

    /// Model point with gauge coordinates `y`.
    pub fn to_model(&self, y: &[f64]) -> Vec<f64> {
        match &self.model {
            ModelGeometry::CylinderQuotient { .. } => {
                self.center.iter().zip(y).map(|(p, yi)| p + self.scale * yi).collect()
            }
            _ => {
                let s = dot(y, y) / 4.0;
                let mut x: Vec<f64> = self.center.iter().map(|p| (1.0 - s) * p).collect();
                for (yi, e) in y.iter().zip(&self.frame) {
                    for (xj, ej) in x.iter_mut().zip(e) {
                        *xj += yi * ej;
                    }
                }
                x.iter_mut().for_each(|v| *v /= 1.0 + s);
                x
            }
        }
    }

    /// Representative of `x` used by the chart: `±x` facing `P` on projective
    /// space, the dilation image nearest to `P` on the cylinder.
    pub fn representative(&self, x: &[f64]) -> Vec<f64> {
        match &self.model {
            ModelGeometry::ProjectiveSpace { .. } if dot(x, &self.center) < 0.0 => x.iter().map(|v| -v).collect(),
            ModelGeometry::CylinderQuotient { length, .. } => {
                let t = (norm(x) / self.scale).ln();
                let shift = (t / length).round();
                let f = (-shift * length).exp();
                x.iter().map(|v| v * f).collect()
            }
            _ => x.to_vec(),
        }
    }

    /// Gauge coordinates of `x`; `None` at the antipode of the stereographic chart.
    pub fn from_model(&self, x: &[f64]) -> Option<Vec<f64>> {
        let x = self.representative(x);
        match &self.model {
            ModelGeometry::CylinderQuotient { .. } => {
                Some(x.iter().zip(&self.center).map(|(a, p)| (a - p) / self.scale).collect())
            }
            _ => {
                let c = dot(&x, &self.center);
                if 1.0 + c <= f64::EPSILON {
                    return None;
                }
                Some(self.frame.iter().map(|e| 2.0 * dot(&x, e) / (1.0 + c)).collect())
            }
        }
    }

    /// Gauge distance from `P`.
    pub fn radius(&self, x: &[f64]) -> f64 {
        self.from_model(x).map_or(f64::INFINITY, |y| norm(&y))
    }

    /// Gauge factor `W(x)`.
    pub fn factor(&self, x: &[f64]) -> f64 {
        let x = self.representative(x);
        match &self.model {
            ModelGeometry::CylinderQuotient { .. } => (norm(&x) / self.scale).powf(self.half_weight()),
            _ => (2.0 / (1.0 + dot(&x, &self.center))).powf(self.half_weight()),
        }
    }

    /// Gauge factor as a function of the chart coordinates.
    pub fn factor_at(&self, y: &[f64]) -> f64 {
        match &self.model {
            ModelGeometry::CylinderQuotient { .. } => self.factor(&self.to_model(y)),
            _ => (1.0 + dot(y, y) / 4.0).powf(self.half_weight()),
        }
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Orthonormal basis of `p^⊥` by Gram–Schmidt on the coordinate axes.
fn orthonormal_complement(p: &[f64]) -> Vec<Vec<f64>> {
    let dim = p.len();
    let skip = (0..dim).max_by(|&a, &b| p[a].abs().total_cmp(&p[b].abs())).unwrap_or(0);
    let mut basis: Vec<Vec<f64>> = vec![p.to_vec()];
    for axis in (0..dim).filter(|&a| a != skip) {
        let mut v = vec![0.0; dim];
        v[axis] = 1.0;
        // two passes keep the frame orthonormal to ~1 ulp
        for _ in 0..2 {
            for b in &basis {
                let c = dot(&v, b);
                v.iter_mut().zip(b).for_each(|(vi, bi)| *vi -= c * bi);
            }
        }
        let nv = norm(&v);
        v.iter_mut().for_each(|vi| *vi /= nv);
        basis.push(v);
    }
    basis.remove(0);
    basis
}
