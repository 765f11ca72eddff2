//! Harmonic cochains as the null space of the Hodge Laplacian.
//!
//! The Laplacian is symmetrized as `M = ⋆^{1/2} Δ ⋆^{-1/2}` and its lowest
//! eigenvectors are found by Chebyshev-filtered subspace iteration: each sweep
//! applies a degree-`m` Chebyshev polynomial that is bounded by one on the
//! unwanted interval `[a, b]` and large at zero, then orthonormalizes and
//! performs a Rayleigh-Ritz step.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::grid::{Cochain, CubicalGrid, MetricField};
use super::operators::{apply, build_star, hodge_laplacian, SparseMatrix};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HarmonicOptions {
    /// Initial block size; doubled while the whole block is in the kernel.
    pub block: usize,
    pub filter_degree: usize,
    pub max_sweeps: usize,
    /// Ritz values below `zero_tolerance · ‖M‖` count as kernel.
    pub zero_tolerance: f64,
    /// Kernel vectors are accepted once `‖M x‖ ≤ residual_tolerance · ‖M‖`.
    pub residual_tolerance: f64,
    pub seed: u64,
}

impl Default for HarmonicOptions {
    fn default() -> Self {
        Self {
            block: 16,
            filter_degree: 20,
            max_sweeps: 300,
            zero_tolerance: 1e-8,
            residual_tolerance: 1e-13,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct HarmonicSpace {
    pub degree: usize,
    pub dimension: usize,
    /// Orthonormal for `⟨a, b⟩ = aᵀ|⋆|b`.
    #[serde(skip)]
    pub basis: Vec<Cochain>,
    /// Largest `‖Δω‖` over the (normalized) basis.
    pub residual: f64,
    /// Smallest Ritz value outside the kernel.
    pub gap: f64,
    pub sweeps: usize,
}

/// Gershgorin bound on the spectrum of a symmetric matrix.
fn spectral_bound(m: &SparseMatrix) -> f64 {
    m.outer_iterator()
        .map(|row| row.iter().map(|(_, v)| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Modified Gram-Schmidt, applied twice; drops numerically dependent columns.
fn orthonormalize(x: &mut Vec<Vec<f64>>) {
    for _ in 0..2 {
        let mut out: Vec<Vec<f64>> = Vec::with_capacity(x.len());
        for mut v in x.drain(..) {
            for q in &out {
                let c = dot(q, &v);
                v.iter_mut().zip(q).for_each(|(vi, qi)| *vi -= c * qi);
            }
            let norm = dot(&v, &v).sqrt();
            if norm > 1e-300 {
                v.iter_mut().for_each(|vi| *vi /= norm);
                out.push(v);
            }
        }
        *x = out;
    }
}

fn block_apply(m: &SparseMatrix, x: &[Vec<f64>]) -> Vec<Vec<f64>> {
    x.par_iter().map(|v| apply(m, v)).collect()
}

/// Scaled Chebyshev filter damping `[a, b]` relative to `0`.
fn chebyshev_filter(m: &SparseMatrix, x: Vec<Vec<f64>>, degree: usize, a: f64, b: f64) -> Vec<Vec<f64>> {
    let e = (b - a) / 2.0;
    let c = (b + a) / 2.0;
    let mut sigma = -e / c;
    let tau = 2.0 / sigma;
    let combine = |mx: Vec<Vec<f64>>, y: &[Vec<f64>], s: f64, prev: Option<(&[Vec<f64>], f64)>| -> Vec<Vec<f64>> {
        mx.into_iter()
            .enumerate()
            .map(|(j, mut col)| {
                for (i, v) in col.iter_mut().enumerate() {
                    *v = (*v - c * y[j][i]) * s;
                    if let Some((p, t)) = prev {
                        *v -= t * p[j][i];
                    }
                }
                col
            })
            .collect()
    };
    let mut prev = x;
    let mut cur = combine(block_apply(m, &prev), &prev, sigma / e, None);
    for _ in 2..=degree {
        let sigma_new = 1.0 / (tau - sigma);
        let next = combine(
            block_apply(m, &cur),
            &cur,
            2.0 * sigma_new / e,
            Some((&prev, sigma * sigma_new)),
        );
        prev = cur;
        cur = next;
        sigma = sigma_new;
    }
    cur
}

struct RitzBlock {
    vectors: Vec<Vec<f64>>,
    values: Vec<f64>,
    residuals: Vec<f64>,
}

fn rayleigh_ritz(m: &SparseMatrix, x: &[Vec<f64>]) -> RitzBlock {
    let mx = block_apply(m, x);
    let q = x.len();
    let h = DMatrix::from_fn(q, q, |i, j| 0.5 * (dot(&x[i], &mx[j]) + dot(&x[j], &mx[i])));
    let eig = SymmetricEigen::new(h);
    let mut order: Vec<usize> = (0..q).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let len = x[0].len();
    let mut vectors = Vec::with_capacity(q);
    let mut values = Vec::with_capacity(q);
    let mut residuals = Vec::with_capacity(q);
    for &k in &order {
        let coeffs = eig.eigenvectors.column(k);
        let mut v = vec![0.0; len];
        let mut mv = vec![0.0; len];
        for (j, c) in coeffs.iter().enumerate() {
            v.iter_mut().zip(&x[j]).for_each(|(a, b)| *a += c * b);
            mv.iter_mut().zip(&mx[j]).for_each(|(a, b)| *a += c * b);
        }
        let theta = eig.eigenvalues[k];
        let r = mv
            .iter()
            .zip(&v)
            .map(|(a, b)| (a - theta * b).powi(2))
            .sum::<f64>()
            .sqrt();
        vectors.push(v);
        values.push(theta);
        residuals.push(r);
    }
    RitzBlock {
        vectors,
        values,
        residuals,
    }
}

/// Null space of a symmetric positive semidefinite sparse matrix.
pub fn symmetric_kernel(m: &SparseMatrix, options: &HarmonicOptions) -> Result<(Vec<Vec<f64>>, f64, f64, usize)> {
    let size = m.rows();
    let b = 1.01 * spectral_bound(m);
    if b == 0.0 {
        let mut basis: Vec<Vec<f64>> = (0..size)
            .map(|i| (0..size).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect();
        orthonormalize(&mut basis);
        return Ok((basis, 0.0, f64::INFINITY, 0));
    }
    let zero = options.zero_tolerance * b;
    let target = options.residual_tolerance * b;
    let mut q = options.block.clamp(1, size);
    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    let mut worst = f64::INFINITY;
    loop {
        let mut x: Vec<Vec<f64>> = (0..q)
            .map(|_| (0..size).map(|_| rng.random_range(-1.0..1.0)).collect())
            .collect();
        orthonormalize(&mut x);
        let mut ritz = rayleigh_ritz(m, &x);
        let mut previous = usize::MAX;
        let mut grow = false;
        for sweep in 1..=options.max_sweeps {
            let a = ritz.values.last().copied().unwrap_or(b).clamp(1e-6 * b, 0.9 * b);
            let mut y = chebyshev_filter(m, ritz.vectors, options.filter_degree, a, b);
            orthonormalize(&mut y);
            ritz = rayleigh_ritz(m, &y);
            let kernel = ritz.values.iter().take_while(|&&v| v <= zero).count();
            if kernel == ritz.values.len() {
                grow = true;
                break;
            }
            worst = ritz.residuals[..kernel].iter().fold(0.0, |acc, r| acc.max(*r));
            let gap = ritz.values[kernel];
            // The first Ritz value past the kernel must itself be converged,
            // or an unconverged kernel vector could masquerade as the gap.
            let gap_settled = ritz.residuals[kernel] <= 1e-3 * gap;
            if kernel == previous && worst <= target && gap > 1e3 * zero && gap_settled {
                let basis = ritz.vectors[..kernel].to_vec();
                return Ok((basis, worst, gap, sweep));
            }
            previous = kernel;
        }
        if !grow || q == size {
            return Err(Error::NonConvergence {
                what: format!("harmonic subspace iteration (block {q})"),
                residual: worst,
            });
        }
        q = (2 * q).min(size);
    }
}

/// Harmonic `p`-cochains `{ω : dω = 0, δω = 0}` on a closed grid.
pub fn harmonic_space(
    grid: &CubicalGrid,
    metric: &MetricField,
    p: usize,
    options: &HarmonicOptions,
) -> Result<HarmonicSpace> {
    if !grid.is_closed() {
        return Err(Error::InvalidArgument("harmonic space needs a periodic grid".into()));
    }
    let lap = hodge_laplacian(grid, metric, p)?;
    let star: Vec<f64> = build_star(grid, metric, p)?.iter().map(|s| s.abs()).collect();
    let root: Vec<f64> = star.iter().map(|s| s.sqrt()).collect();
    // M = ⋆^{1/2} Δ ⋆^{-1/2}.
    let mut m = lap.clone();
    for (i, mut row) in m.outer_iterator_mut().enumerate() {
        for (j, v) in row.iter_mut() {
            *v *= root[i] / root[j];
        }
    }
    let (vectors, _, gap, sweeps) = symmetric_kernel(&m, options)?;
    let basis: Vec<Cochain> = vectors
        .into_iter()
        .map(|v| Cochain {
            degree: p,
            values: v.iter().zip(&root).map(|(x, r)| x / r).collect(),
        })
        .collect();
    let residual = basis
        .iter()
        .map(|c| apply(&lap, &c.values).iter().fold(0.0, |acc: f64, v| acc.max(v.abs())))
        .fold(0.0, f64::max);
    Ok(HarmonicSpace {
        degree: p,
        dimension: basis.len(),
        basis,
        residual,
        gap,
        sweeps,
    })
}

/// Largest `|Δ ω|` entry over `⋆`-normalized cochains `ω` of a basis.
pub fn kernel_residual(grid: &CubicalGrid, metric: &MetricField, basis: &[Cochain]) -> Result<f64> {
    let Some(first) = basis.first() else {
        return Ok(0.0);
    };
    let p = first.degree;
    let lap = hodge_laplacian(grid, metric, p)?;
    let star = build_star(grid, metric, p)?;
    Ok(basis
        .iter()
        .map(|c| {
            let norm = c
                .values
                .iter()
                .zip(&star)
                .map(|(v, s)| v * v * s.abs())
                .sum::<f64>()
                .sqrt();
            apply(&lap, &c.values).iter().fold(0.0, |acc: f64, v| acc.max(v.abs())) / norm
        })
        .fold(0.0, f64::max))
}
