//! Pull-back of constant middle-degree forms by the inversion `x ↦ x/|x|²`.
//!
//! With `J = ∂i/∂x = R/|x|²`, `R = I - 2x̂x̂ᵀ` orthogonal,
//! `(i*φ)_A = |x|^{-2p} Σ_C φ_C det R[C, A]`, so `|i*φ|(x) = |φ| |x|^{-2p}`.
//! For `p = n/2` the pulled-back form is closed and co-closed.

use serde::Serialize;

use super::grid::{axis_sets, Cochain, CubicalGrid, MetricField};
use super::operators::{apply, build_d, codifferential};
use crate::{Error, Result};

/// Constant `p`-form `Σ_C φ_C dx^C` on `ℝⁿ`, coefficients in lexicographic
/// order of the increasing index sets `C`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstantForm {
    pub n: usize,
    pub degree: usize,
    pub coefficients: Vec<f64>,
}

impl ConstantForm {
    pub fn new(n: usize, degree: usize, coefficients: Vec<f64>) -> Result<Self> {
        let sets = axis_sets(n, degree).len();
        if coefficients.len() != sets {
            return Err(Error::InvalidArgument(format!(
                "a {degree}-form on R^{n} has {sets} coefficients, got {}",
                coefficients.len()
            )));
        }
        Ok(Self {
            n,
            degree,
            coefficients,
        })
    }

    /// `dx^0 ∧ dx^1 ∧ … ∧ dx^{p-1}`, of unit norm.
    pub fn first_basis(n: usize, degree: usize) -> Self {
        let mut c = vec![0.0; axis_sets(n, degree).len()];
        c[0] = 1.0;
        Self {
            n,
            degree,
            coefficients: c,
        }
    }

    pub fn norm(&self) -> f64 {
        self.coefficients.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn normalized(mut self) -> Self {
        let norm = self.norm();
        if norm > 0.0 {
            self.coefficients.iter_mut().for_each(|v| *v /= norm);
        }
        self
    }
}

fn determinant(mut a: Vec<Vec<f64>>) -> f64 {
    let k = a.len();
    let mut det = 1.0;
    for col in 0..k {
        let pivot = (col..k)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        if a[pivot][col] == 0.0 {
            return 0.0;
        }
        if pivot != col {
            a.swap(pivot, col);
            det = -det;
        }
        det *= a[col][col];
        for r in col + 1..k {
            let f = a[r][col] / a[col][col];
            for c in col..k {
                a[r][c] -= f * a[col][c];
            }
        }
    }
    det
}

/// Components `(i*φ)_A(x)` for every increasing `A`, in lexicographic order.
pub fn inversion_pullback_at(phi: &ConstantForm, x: &[f64]) -> Vec<f64> {
    let n = phi.n;
    let r2: f64 = x.iter().map(|v| v * v).sum();
    let rot: Vec<Vec<f64>> = (0..n)
        .map(|c| {
            (0..n)
                .map(|a| f64::from(u8::from(a == c)) - 2.0 * x[c] * x[a] / r2)
                .collect()
        })
        .collect();
    let sets = axis_sets(n, phi.degree);
    let scale = r2.powi(-(phi.degree as i32));
    sets.iter()
        .map(|a_set| {
            let mut acc = 0.0;
            for (c_set, &coef) in sets.iter().zip(&phi.coefficients) {
                if coef != 0.0 {
                    let minor = c_set
                        .iter()
                        .map(|&c| a_set.iter().map(|&a| rot[c][a]).collect())
                        .collect();
                    acc += coef * determinant(minor);
                }
            }
            scale * acc
        })
        .collect()
}

/// Pointwise norm `|i*φ|(x)`.
pub fn pullback_norm(phi: &ConstantForm, x: &[f64]) -> f64 {
    inversion_pullback_at(phi, x).iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Midpoint-rule samples of `i*φ` on the `p`-cells of a grid avoiding the origin.
pub fn inversion_pullback(grid: &CubicalGrid, phi: &ConstantForm) -> Result<Cochain> {
    if phi.n != grid.n() {
        return Err(Error::InvalidArgument(format!(
            "form on R^{} but grid in R^{}",
            phi.n,
            grid.n()
        )));
    }
    let p = phi.degree;
    let index = |axes: &[usize]| axis_sets(phi.n, p).iter().position(|s| s == axes).expect("axis set");
    let centers = grid.cell_centers(p);
    let axes = grid.cell_axes(p);
    let mut values = Vec::with_capacity(centers.len());
    let mut cached: Option<(Vec<usize>, usize)> = None;
    for (x, a) in centers.iter().zip(&axes) {
        if x.iter().all(|v| *v == 0.0) {
            return Err(Error::InvalidArgument("grid contains the origin".into()));
        }
        let k = match &cached {
            Some((prev, k)) if prev == a => *k,
            _ => {
                let k = index(a);
                cached = Some((a.clone(), k));
                k
            }
        };
        let area = grid.volume(a.iter().copied());
        values.push(inversion_pullback_at(phi, x)[k] * area);
    }
    Cochain::new(grid, p, values)
}

/// The standard block inside the annulus `1 ≤ |x| ≤ 2`:
/// `x_0 ∈ [1.1, 1.7]`, other coordinates in `[-0.5, 0.5]`.
pub fn annulus_block(n: u32, cells: usize) -> Result<CubicalGrid> {
    annulus_block_with(n, cells, 1.1, 1.7, 0.5)
}

pub fn annulus_block_with(n: u32, cells: usize, a: f64, b: f64, half: f64) -> Result<CubicalGrid> {
    let k = n as usize;
    let mut lower = vec![-half; k];
    let mut upper = vec![half; k];
    lower[0] = a;
    upper[0] = b;
    CubicalGrid::block(n, cells, &lower, &upper)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InversionResiduals {
    pub cells: usize,
    /// Root mean square of `|dc|/vol` over `(p+1)`-cells.
    pub d_residual: f64,
    /// Root mean square of `|δc|/vol` over interior `(p-1)`-cells.
    pub delta_residual: f64,
    pub d_max: f64,
    pub delta_max: f64,
}

/// d- and δ-residuals of the sampled pull-back on the annulus block.
/// The maxima sit at the corner nearest the origin and are slower to
/// reach their asymptotic rate than the mean-square values.
pub fn inversion_residuals(n: u32, cells: usize, phi: &ConstantForm) -> Result<InversionResiduals> {
    inversion_residuals_on(&annulus_block(n, cells)?, phi)
}

pub fn inversion_residuals_on(grid: &CubicalGrid, phi: &ConstantForm) -> Result<InversionResiduals> {
    let grid = grid.clone();
    let cells = grid.counts()[0];
    let p = phi.degree;
    if p == 0 || p >= grid.n() {
        return Err(Error::InvalidArgument(format!("residuals need 0 < p < n, got p = {p}")));
    }
    let c = inversion_pullback(&grid, phi)?;
    let flat = MetricField::flat(&grid);

    let dc = apply(&build_d(&grid, p)?, &c.values);
    let d_density: Vec<f64> = dc
        .iter()
        .zip(grid.cell_axes(p + 1))
        .map(|(v, a)| v.abs() / grid.volume(a.into_iter()))
        .collect();
    let d_max = d_density.iter().copied().fold(0.0, f64::max);
    let d_residual = (d_density.iter().map(|v| v * v).sum::<f64>() / d_density.len() as f64).sqrt();

    let delta = apply(&codifferential(&grid, &flat, p)?, &c.values);
    // Only (p-1)-cells with every coface present see the full stencil.
    let mut delta_max: f64 = 0.0;
    let (mut sum2, mut count) = (0.0, 0usize);
    let mut k = 0;
    for block in grid.blocks(p - 1) {
        let vol = grid.volume(block.axes.iter().copied());
        for local in 0..block.len {
            let base = block.base(local);
            let interior =
                (0..grid.n()).all(|i| block.mask & (1 << i) != 0 || (1..grid.counts()[i]).contains(&base[i]));
            if interior {
                let v = delta[k].abs() / vol;
                delta_max = delta_max.max(v);
                sum2 += v * v;
                count += 1;
            }
            k += 1;
        }
    }
    let delta_residual = (sum2 / count.max(1) as f64).sqrt();
    Ok(InversionResiduals {
        cells,
        d_residual,
        delta_residual,
        d_max,
        delta_max,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn pointwise_norm_is_inverse_power() {
        let phi = ConstantForm::new(4, 2, vec![0.3, -0.1, 0.5, 0.2, 0.7, -0.4])
            .unwrap()
            .normalized();
        assert_relative_eq!(pullback_norm(&phi, &[1.0, 0.0, 0.0, 0.0]), 1.0, max_relative = 1e-14);
        assert_relative_eq!(
            pullback_norm(&phi, &[0.0, 2.0, 0.0, 0.0]),
            1.0 / 16.0,
            max_relative = 1e-14
        );
        let x = [0.3, -1.1, 0.8, 0.2];
        let r2: f64 = x.iter().map(|v| v * v).sum();
        assert_relative_eq!(pullback_norm(&phi, &x), r2.powi(-2), max_relative = 1e-13);
    }

    #[test]
    fn zero_form_gives_zero_cochain() {
        let g = annulus_block(4, 3).unwrap();
        let zero = ConstantForm::new(4, 2, vec![0.0; 6]).unwrap();
        assert_eq!(inversion_pullback(&g, &zero).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn residuals_shrink_at_second_order() {
        let phi = ConstantForm::first_basis(4, 2);
        let coarse = inversion_residuals(4, 8, &phi).unwrap();
        let fine = inversion_residuals(4, 16, &phi).unwrap();
        let rate_d = (coarse.d_residual / fine.d_residual).log2();
        let rate_delta = (coarse.delta_residual / fine.delta_residual).log2();
        assert!((rate_d - 2.0).abs() < 0.3, "{coarse:?} {fine:?}");
        assert!((rate_delta - 2.0).abs() < 0.3, "{coarse:?} {fine:?}");
    }
}
