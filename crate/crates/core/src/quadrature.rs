//! Gauss–Legendre rules, zonal integration on spheres and symmetric direction sets.

use std::f64::consts::PI;

use crate::geometry::sphere_volume;
use crate::summation::NeumaierSum;
use crate::Result;

/// Nodes and weights of an `m`-point Gauss–Legendre rule on `[-1, 1]`,
/// nodes in increasing order.
pub fn gauss_legendre(m: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; m];
    let mut weights = vec![0.0; m];
    let mf = m as f64;
    for i in 0..m.div_ceil(2) {
        // Tricomi's initial guess, then Newton on the three-term recurrence.
        let mut x = ((4.0 * i as f64 + 3.0) / (4.0 * mf + 2.0) * PI).cos() * (1.0 - (mf - 1.0) / (8.0 * mf * mf * mf));
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(m, x);
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre_with_derivative(m, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[m - 1 - i] = x;
        weights[i] = w;
        weights[m - 1 - i] = w;
    }
    if m % 2 == 1 {
        nodes[m / 2] = 0.0;
    }
    (nodes, weights)
}

fn legendre_with_derivative(m: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if m == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=m {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = m as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Gauss–Legendre rule mapped to `[a, b]`.
pub fn gauss_legendre_interval(m: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(m);
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    (
        x.iter().map(|t| mid + half * t).collect(),
        w.iter().map(|v| v * half).collect(),
    )
}

/// Rule for integrating zonal functions `f(θ)` over `S^d`, where `θ` is
/// the angle to a pole: weights include `ω_{d-1} sin^{d-1} θ`.
#[derive(Debug, Clone)]
pub struct ZonalRule {
    pub angles: Vec<f64>,
    pub weights: Vec<f64>,
}

impl ZonalRule {
    /// `m` Gauss points in `θ ∈ [a, b] ⊂ [0, π]`.
    pub fn new(d: u32, m: usize, a: f64, b: f64) -> Result<Self> {
        let (angles, w) = gauss_legendre_interval(m, a, b);
        let ring = if d == 1 { 2.0 } else { sphere_volume(d - 1)? };
        let weights = angles
            .iter()
            .zip(&w)
            .map(|(t, wi)| wi * ring * t.sin().powi(d as i32 - 1))
            .collect();
        Ok(Self { angles, weights })
    }

    pub fn full(d: u32, m: usize) -> Result<Self> {
        Self::new(d, m, 0.0, PI)
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        let mut acc = NeumaierSum::new();
        for (t, w) in self.angles.iter().zip(&self.weights) {
            acc.add(w * f(*t));
        }
        acc.value()
    }
}

/// Product rule on the unit sphere `S^{k-1} ⊂ ℝ^k`: Gauss in the polar
/// angles, trapezoid in the azimuth. Returns unit vectors and weights
/// summing to `ω_{k-1}`.
pub fn sphere_product_rule(k: usize, m: usize) -> (Vec<Vec<f64>>, Vec<f64>) {
    assert!(k >= 2, "sphere_product_rule needs ambient dimension ≥ 2");
    let azimuth: Vec<(f64, f64)> = (0..2 * m)
        .map(|j| (2.0 * PI * j as f64 / (2 * m) as f64, PI / m as f64))
        .collect();
    let mut points: Vec<(Vec<f64>, f64)> = azimuth
        .iter()
        .map(|(phi, w)| (vec![phi.cos(), phi.sin()], *w))
        .collect();
    let (theta, tw) = gauss_legendre_interval(m, 0.0, PI);
    for dim in 3..=k {
        // Lift S^{dim-2} to S^{dim-1}: x = (cos θ, sin θ · y).
        let mut next = Vec::with_capacity(points.len() * m);
        for (t, w) in theta.iter().zip(&tw) {
            let (c, s) = (t.cos(), t.sin());
            let jac = s.powi(dim as i32 - 2);
            for (y, wy) in &points {
                let mut x = Vec::with_capacity(dim);
                x.push(c);
                x.extend(y.iter().map(|v| s * v));
                next.push((x, w * jac * wy));
            }
        }
        points = next;
    }
    points.into_iter().unzip()
}

/// `±e_i` together with all `(±1, …, ±1)/√k`; symmetric under `x ↦ -x`
/// and under coordinate permutations, so averages over it kill odd
/// polynomials and reproduce the sphere average of quadratics.
pub fn symmetric_directions(k: usize) -> Vec<Vec<f64>> {
    let mut dirs = Vec::with_capacity(2 * k + (1 << k));
    for i in 0..k {
        for s in [1.0, -1.0] {
            let mut v = vec![0.0; k];
            v[i] = s;
            dirs.push(v);
        }
    }
    let inv = 1.0 / (k as f64).sqrt();
    for mask in 0..(1usize << k) {
        dirs.push((0..k).map(|i| if mask >> i & 1 == 1 { -inv } else { inv }).collect());
    }
    dirs
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        for m in [1, 2, 5, 20, 101, 600] {
            let (x, w) = gauss_legendre(m);
            assert_abs_diff_eq!(w.iter().sum::<f64>(), 2.0, epsilon = 1e-13);
            let deg = 2 * m - 2;
            let exact = 2.0 / (deg as f64 + 1.0);
            let q: f64 = x.iter().zip(&w).map(|(a, b)| b * a.powi(deg as i32)).sum();
            assert_abs_diff_eq!(q, exact, epsilon = 1e-13);
            assert!(x.windows(2).all(|p| p[0] < p[1]));
        }
    }

    #[test]
    fn zonal_rule_measures_sphere() {
        for d in 1..=6 {
            let rule = ZonalRule::full(d, 40).unwrap();
            let total: f64 = rule.weights.iter().sum();
            assert_abs_diff_eq!(total, sphere_volume(d).unwrap(), epsilon = 1e-12);
        }
    }

    #[test]
    fn product_rule_moments() {
        for k in [2usize, 3, 4, 5] {
            let (pts, w) = sphere_product_rule(k, 20);
            let area = sphere_volume(k as u32 - 1).unwrap();
            assert_relative_eq!(w.iter().sum::<f64>(), area, max_relative = 1e-12);
            // ∫ x_0² = ω/k.
            let m2: f64 = pts.iter().zip(&w).map(|(p, wi)| wi * p[0] * p[0]).sum();
            assert_relative_eq!(m2, area / k as f64, max_relative = 1e-12);
            assert!(pts
                .iter()
                .all(|p| (p.iter().map(|v| v * v).sum::<f64>() - 1.0).abs() < 1e-14));
        }
    }

    #[test]
    fn symmetric_directions_average_quadratics() {
        let k = 4;
        let dirs = symmetric_directions(k);
        let m = dirs.len() as f64;
        let avg = |f: &dyn Fn(&[f64]) -> f64| dirs.iter().map(|d| f(d)).sum::<f64>() / m;
        assert_abs_diff_eq!(avg(&|d| d[1]), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(avg(&|d| d[0] * d[2]), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(avg(&|d| d[3] * d[3]), 1.0 / k as f64, epsilon = 1e-15);
        assert_abs_diff_eq!(avg(&|d| d[0] * d[1] * d[1]), 0.0, epsilon = 1e-15);
    }
}
