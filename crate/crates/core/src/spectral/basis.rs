//! Separable eigenfunctions of `L_g` on the sphere, `RPⁿ` and the cylinder.

use std::f64::consts::PI;

use serde::Serialize;

use crate::geometry::{conformal_coefficient_f64, sphere_volume, Dimension, ModelGeometry};
use crate::quadrature::ZonalRule;
use crate::{Error, Result};

/// `Z_0(x), …, Z_lmax(x)` where `Z_l = C_l^α / C_l^α(1)`, the zonal
/// harmonic of degree `l` on `S^{2α+1}` normalized to `1` at the pole.
pub fn zonal_harmonics(alpha: f64, x: f64, lmax: usize) -> Vec<f64> {
    let mut z = Vec::with_capacity(lmax + 1);
    z.push(1.0);
    if lmax >= 1 {
        z.push(x);
    }
    for l in 1..lmax {
        let lf = l as f64;
        let next = (2.0 * (lf + alpha) * x * z[l] - lf * z[l - 1]) / (lf + 2.0 * alpha);
        z.push(next);
    }
    z
}

/// Dimension of the degree-`l` harmonics on `S^d`.
pub fn harmonic_dimension(d: u32, l: u32) -> f64 {
    if l == 0 {
        return 1.0;
    }
    // (2l+d-1)/(l+d-1) · C(l+d-1, l)
    let mut binom = 1.0;
    for i in 1..=(d - 1) {
        binom *= (l + i) as f64 / i as f64;
    }
    (2 * l + d - 1) as f64 / (l + d - 1) as f64 * binom
}

/// `∫_{S^d} Z_l² = ω_d / dim_l`.
pub fn zonal_norm_squared(d: u32, l: u32) -> f64 {
    sphere_volume(d).expect("d ≥ 1") / harmonic_dimension(d, l)
}

/// One eigenspace: circle frequency `k` (zero on spheres), harmonic degree
/// `l`, eigenvalue of `L_g` and multiplicity of the real eigenspace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Mode {
    pub frequency: i64,
    pub degree: u32,
    pub eigenvalue: f64,
    pub multiplicity: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct EigenBasis {
    pub model: ModelGeometry,
    pub degree: usize,
    /// Largest `|k|` on the cylinder; zero otherwise.
    pub frequency_cutoff: usize,
    pub modes: Vec<Mode>,
}

/// Frequency cut-off matched to the angular degree: `⌈degree·L/2π⌉ + 4`.
pub fn cylinder_frequency_cutoff(degree: usize, length: f64) -> usize {
    (degree as f64 * length / (2.0 * PI)).ceil() as usize + 4
}

/// `c_n l(l+n-1) + n(n-1)`.
pub fn sphere_eigenvalue(n: Dimension, l: u32) -> f64 {
    let (nf, lf) = (n.as_f64(), l as f64);
    conformal_coefficient_f64(n) * lf * (lf + nf - 1.0) + nf * (nf - 1.0)
}

/// `c_n((2πk/L)² + l(l+n-2)) + (n-1)(n-2)`.
pub fn cylinder_eigenvalue(n: Dimension, length: f64, k: i64, l: u32) -> f64 {
    let (nf, lf) = (n.as_f64(), l as f64);
    let w = 2.0 * PI * k as f64 / length;
    conformal_coefficient_f64(n) * (w * w + lf * (lf + nf - 2.0)) + (nf - 1.0) * (nf - 2.0)
}

/// Eigenspaces up to the given harmonic degree.
pub fn build_eigenbasis(model: &ModelGeometry, degree: usize) -> Result<EigenBasis> {
    let n = model.dimension();
    let (modes, frequency_cutoff) = match model {
        ModelGeometry::RoundSphere { .. } | ModelGeometry::ProjectiveSpace { .. } => {
            let step = if matches!(model, ModelGeometry::ProjectiveSpace { .. }) {
                2
            } else {
                1
            };
            let modes = (0..=degree as u32)
                .step_by(step)
                .map(|l| Mode {
                    frequency: 0,
                    degree: l,
                    eigenvalue: sphere_eigenvalue(n, l),
                    multiplicity: harmonic_dimension(n.get(), l),
                })
                .collect();
            (modes, 0)
        }
        ModelGeometry::CylinderQuotient { length, .. } => {
            let kmax = cylinder_frequency_cutoff(degree, *length);
            let mut modes = Vec::with_capacity((2 * kmax + 1) * (degree + 1));
            for k in -(kmax as i64)..=kmax as i64 {
                for l in 0..=degree as u32 {
                    modes.push(Mode {
                        frequency: k,
                        degree: l,
                        eigenvalue: cylinder_eigenvalue(n, *length, k, l),
                        multiplicity: harmonic_dimension(n.get() - 1, l),
                    });
                }
            }
            (modes, kmax)
        }
        ModelGeometry::FlatTorus { .. } => {
            return Err(Error::NotInvertible(format!(
                "{model}: L_g = c_n Δ has the constants in its kernel"
            )))
        }
    };
    Ok(EigenBasis {
        model: model.clone(),
        degree,
        frequency_cutoff,
        modes,
    })
}

impl EigenBasis {
    pub fn smallest_eigenvalue(&self) -> f64 {
        self.modes.iter().map(|m| m.eigenvalue).fold(f64::INFINITY, f64::min)
    }

    /// L²-normalized real zonal eigenfunction of `mode` about the pole, as
    /// a function of the polar angle `θ` and (on the cylinder) of `t`.
    pub fn mode_value(&self, mode: &Mode, theta: f64, t: f64) -> f64 {
        let n = self.model.dimension();
        let l = mode.degree as usize;
        match &self.model {
            ModelGeometry::CylinderQuotient { length, .. } => {
                let d = n.get() - 1;
                let z = zonal_harmonics((d as f64 - 1.0) / 2.0, theta.cos(), l)[l];
                let angular = z / zonal_norm_squared(d, mode.degree).sqrt();
                let w = 2.0 * PI * mode.frequency.unsigned_abs() as f64 * t / length;
                let circle = match mode.frequency {
                    0 => 1.0 / length.sqrt(),
                    k if k > 0 => (2.0 / length).sqrt() * w.cos(),
                    _ => (2.0 / length).sqrt() * w.sin(),
                };
                angular * circle
            }
            _ => {
                let d = n.get();
                let z = zonal_harmonics((d as f64 - 1.0) / 2.0, theta.cos(), l)[l];
                let mut norm2 = zonal_norm_squared(d, mode.degree);
                if matches!(self.model, ModelGeometry::ProjectiveSpace { .. }) {
                    norm2 /= 2.0;
                }
                z / norm2.sqrt()
            }
        }
    }

    /// Largest deviation of the Gram matrix of the zonal modes with
    /// `degree ≤ max_degree` (and `|k| ≤ 3` on the cylinder) from the identity,
    /// by product quadrature over the model.
    pub fn orthonormality_defect(&self, max_degree: u32) -> Result<f64> {
        let n = self.model.dimension();
        let sample: Vec<Mode> = self
            .modes
            .iter()
            .filter(|m| m.degree <= max_degree && m.frequency.abs() <= 3)
            .copied()
            .collect();
        let m_nodes = 2 * max_degree as usize + 40;
        let (rule, times, t_weight) = match &self.model {
            ModelGeometry::CylinderQuotient { length, .. } => {
                let nt = 64;
                let times: Vec<f64> = (0..nt).map(|j| j as f64 * length / nt as f64).collect();
                (ZonalRule::full(n.get() - 1, m_nodes)?, times, length / nt as f64)
            }
            ModelGeometry::ProjectiveSpace { .. } => {
                // Upper hemisphere is a fundamental domain.
                (ZonalRule::new(n.get(), m_nodes, 0.0, PI / 2.0)?, vec![0.0], 1.0)
            }
            _ => (ZonalRule::full(n.get(), m_nodes)?, vec![0.0], 1.0),
        };
        let values: Vec<Vec<f64>> = sample
            .iter()
            .map(|mode| {
                times
                    .iter()
                    .flat_map(|&t| rule.angles.iter().map(move |&th| (th, t)))
                    .map(|(th, t)| self.mode_value(mode, th, t))
                    .collect()
            })
            .collect();
        let weights: Vec<f64> = times
            .iter()
            .flat_map(|_| rule.weights.iter().map(|w| w * t_weight))
            .collect();
        let mut defect: f64 = 0.0;
        for i in 0..sample.len() {
            for j in 0..=i {
                let g: f64 = values[i]
                    .iter()
                    .zip(&values[j])
                    .zip(&weights)
                    .map(|((a, b), w)| a * b * w)
                    .sum();
                let target = if i == j { 1.0 } else { 0.0 };
                defect = defect.max((g - target).abs());
            }
        }
        Ok(defect)
    }
}
