//! Hodge Laplacian against the componentwise connection Laplacian on flat tori.

use std::f64::consts::PI;

use serde::Serialize;
use sprs::TriMat;

use super::grid::{Cochain, CubicalGrid, MetricField};
use super::operators::{apply, hodge_laplacian, max_abs_entry, SparseMatrix};
use crate::{Error, Result};

/// `∇*∇` on `p`-cochains of a flat periodic grid: the second-difference
/// Laplacian applied to each component `ω_S` separately.
pub fn connection_laplacian(grid: &CubicalGrid, p: usize) -> Result<SparseMatrix> {
    if !grid.is_closed() {
        return Err(Error::InvalidArgument(
            "connection Laplacian needs a periodic grid".into(),
        ));
    }
    let size = grid.num_cells(p);
    let mut tri = TriMat::with_capacity((size, size), (2 * grid.n() + 1) * size);
    for block in grid.blocks(p) {
        for local in 0..block.len {
            let row = block.offset + local;
            let base: Vec<isize> = block.base(local).into_iter().map(|v| v as isize).collect();
            for i in 0..grid.n() {
                let h2 = grid.spacings()[i] * grid.spacings()[i];
                tri.add_triplet(row, row, 2.0 / h2);
                for step in [-1, 1] {
                    let mut v = base.clone();
                    v[i] += step;
                    let col = grid.index_in(&block, &v).expect("periodic neighbour");
                    tri.add_triplet(row, col, -1.0 / h2);
                }
            }
        }
    }
    Ok(tri.to_csr())
}

/// `Σ_i 4 sin²(π k_i / N_i) / h_i²`, the stencil eigenvalue of a plane wave.
pub fn plane_wave_eigenvalue(grid: &CubicalGrid, k: &[i64]) -> f64 {
    (0..grid.n())
        .map(|i| {
            let s = (PI * k[i] as f64 / grid.counts()[i] as f64).sin();
            4.0 * s * s / (grid.spacings()[i] * grid.spacings()[i])
        })
        .sum()
}

/// `cos(2π k·v/N)` on the cells of one axis set, zero on the others.
pub fn plane_wave(grid: &CubicalGrid, p: usize, axes: &[usize], k: &[i64]) -> Result<Cochain> {
    let blocks = grid.blocks(p);
    let Some(target) = blocks.iter().find(|b| b.axes == axes) else {
        return Err(Error::InvalidArgument(format!("no {p}-cells along axes {axes:?}")));
    };
    let mut values = vec![0.0; grid.num_cells(p)];
    for local in 0..target.len {
        let base = target.base(local);
        let phase: f64 = (0..grid.n())
            .map(|i| 2.0 * PI * k[i] as f64 * base[i] as f64 / grid.counts()[i] as f64)
            .sum();
        values[target.offset + local] = phase.cos();
    }
    Cochain::new(grid, p, values)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeitzenboeckCheck {
    pub degree: usize,
    /// Largest entry of `Δ - ∇*∇` as assembled operators.
    pub operator_discrepancy: f64,
    /// Largest `|(Δ - ∇*∇)ω|` over the random cochains.
    pub max_discrepancy: f64,
    pub samples: usize,
}

/// Compares the Hodge and connection Laplacians on a flat periodic grid.
pub fn flat_weitzenboeck_check(grid: &CubicalGrid, p: usize, samples: usize, seed: u64) -> Result<WeitzenboeckCheck> {
    let hodge = hodge_laplacian(grid, &MetricField::flat(grid), p)?;
    let rough = connection_laplacian(grid, p)?;
    let diff = &hodge - &rough;
    let mut max_discrepancy: f64 = 0.0;
    for s in 0..samples {
        let w = Cochain::random(grid, p, seed.wrapping_add(s as u64));
        let a = apply(&hodge, &w.values);
        let b = apply(&rough, &w.values);
        for (x, y) in a.iter().zip(&b) {
            max_discrepancy = max_discrepancy.max((x - y).abs());
        }
    }
    Ok(WeitzenboeckCheck {
        degree: p,
        operator_discrepancy: max_abs_entry(&diff),
        max_discrepancy,
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hodge_equals_connection_laplacian_on_flat_torus() {
        let g = CubicalGrid::torus(4, 4).unwrap();
        let c = flat_weitzenboeck_check(&g, 2, 5, 0).unwrap();
        assert!(c.max_discrepancy < 1e-12 && c.operator_discrepancy < 1e-12, "{c:?}");
    }

    #[test]
    fn plane_wave_eigenvalue_is_shared() {
        let g = CubicalGrid::new(
            4,
            vec![4, 5, 6, 4],
            vec![1.0, 0.5, 2.0, 1.0],
            vec![0.0; 4],
            vec![true; 4],
        )
        .unwrap();
        let k = [1, 2, 0, 3];
        let lambda = plane_wave_eigenvalue(&g, &k);
        let w = plane_wave(&g, 2, &[1, 3], &k).unwrap();
        let hodge = hodge_laplacian(&g, &MetricField::flat(&g), 2).unwrap();
        let rough = connection_laplacian(&g, 2).unwrap();
        for op in [&hodge, &rough] {
            let lw = apply(op, &w.values);
            let err = lw
                .iter()
                .zip(&w.values)
                .map(|(a, b)| (a - lambda * b).abs())
                .fold(0.0, f64::max);
            assert!(err < 1e-12, "{err}");
        }
    }

    #[test]
    fn constant_components_are_annihilated() {
        let g = CubicalGrid::torus(4, 3).unwrap();
        let w = plane_wave(&g, 2, &[0, 2], &[0; 4]).unwrap();
        let hodge = hodge_laplacian(&g, &MetricField::flat(&g), 2).unwrap();
        let rough = connection_laplacian(&g, 2).unwrap();
        for op in [&hodge, &rough] {
            assert!(apply(op, &w.values).iter().all(|v| v.abs() < 1e-14));
        }
    }
}
