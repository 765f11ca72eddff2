//! Exterior derivative, diagonal Hodge stars, codifferential and Hodge Laplacian.

use rayon::prelude::*;
use sprs::{CsMat, TriMat};

use super::grid::{Cochain, CubicalGrid, MetricField};
use crate::{Error, Result};

/// Sparse real matrix in compressed-row form.
pub type SparseMatrix = CsMat<f64>;

fn check_degree(grid: &CubicalGrid, p: usize, max: usize) -> Result<()> {
    if p > max {
        return Err(Error::InvalidArgument(format!(
            "degree {p} out of range 0..={max} for n = {}",
            grid.n()
        )));
    }
    Ok(())
}

/// Signed incidence of `p`-cells in the boundaries of `(p+1)`-cells, as an
/// integer `(#(p+1)-cells) × (#p-cells)` matrix.
///
/// `∂(v, a_0 < … < a_p) = Σ_k (-1)^k [(v + e_{a_k}, S∖a_k) - (v, S∖a_k)]`.
pub fn incidence(grid: &CubicalGrid, p: usize) -> Result<CsMat<i64>> {
    check_degree(grid, p, grid.n().saturating_sub(1))?;
    let faces = grid.blocks(p);
    let cells = grid.blocks(p + 1);
    let rows = grid.num_cells(p + 1);
    let cols = grid.num_cells(p);
    let mut tri = TriMat::with_capacity((rows, cols), 2 * (p + 1) * rows);
    for block in &cells {
        let face_blocks: Vec<usize> = block
            .axes
            .iter()
            .map(|&a| {
                let mask = block.mask & !(1 << a);
                faces.iter().position(|f| f.mask == mask).expect("face block exists")
            })
            .collect();
        for local in 0..block.len {
            let row = block.offset + local;
            let base: Vec<isize> = block.base(local).into_iter().map(|v| v as isize).collect();
            for (k, &a) in block.axes.iter().enumerate() {
                let sign = if k % 2 == 0 { 1 } else { -1 };
                let fb = &faces[face_blocks[k]];
                let back = grid.index_in(fb, &base).expect("back face inside the grid");
                let mut front_v = base.clone();
                front_v[a] += 1;
                let front = grid.index_in(fb, &front_v).expect("front face inside the grid");
                tri.add_triplet(row, front, sign);
                tri.add_triplet(row, back, -sign);
            }
        }
    }
    Ok(tri.to_csr())
}

/// Discrete exterior derivative `d_p : C^p → C^{p+1}`.
pub fn build_d(grid: &CubicalGrid, p: usize) -> Result<SparseMatrix> {
    Ok(incidence(grid, p)?.map(|&v| v as f64))
}

/// Diagonal of the primal-dual Hodge star on `p`-cells for the metric
/// `e^{2u}·flat`: `(dual volume / primal volume)·e^{(n-2p)u}` at the cell centre,
/// times the orientation sign. At `p = n/2` the conformal weight is `e^{0}`.
pub fn build_star(grid: &CubicalGrid, metric: &MetricField, p: usize) -> Result<Vec<f64>> {
    check_degree(grid, p, grid.n())?;
    if !metric.fits(grid) {
        return Err(Error::InvalidArgument("metric samples do not match the grid".into()));
    }
    let n = grid.n();
    let weight = (n as f64 - 2.0 * p as f64) / 2.0;
    let sign = grid.orientation().sign();
    let mut out = Vec::with_capacity(grid.num_cells(p));
    for block in grid.blocks(p) {
        let primal = grid.volume(block.axes.iter().copied());
        let dual = grid.volume((0..n).filter(|i| block.mask & (1 << i) == 0));
        let ratio = sign * dual / primal;
        for local in 0..block.len {
            let c = grid.doubled_center(&block.base(local), block.mask);
            // (e^{2u})^{(n-2p)/2}; an exact 1.0 at the middle degree.
            out.push(ratio * metric.factor(&c).powf(weight));
        }
    }
    Ok(out)
}

/// Star on dual `(n-p)`-cochains: `(-1)^{p(n-p)}` times the inverse of the primal star.
pub fn build_dual_star(grid: &CubicalGrid, metric: &MetricField, p: usize) -> Result<Vec<f64>> {
    let n = grid.n();
    let sign = if (p * (n - p)).is_multiple_of(2) { 1.0 } else { -1.0 };
    Ok(build_star(grid, metric, p)?.into_iter().map(|s| sign / s).collect())
}

fn scale_rows(m: &mut SparseMatrix, s: &[f64]) {
    for (i, mut row) in m.outer_iterator_mut().enumerate() {
        for (_, v) in row.iter_mut() {
            *v *= s[i];
        }
    }
}

fn scale_cols(m: &mut SparseMatrix, s: &[f64]) {
    for mut row in m.outer_iterator_mut() {
        for (j, v) in row.iter_mut() {
            *v *= s[j];
        }
    }
}

fn transpose(m: &SparseMatrix) -> SparseMatrix {
    m.transpose_view().to_csr()
}

/// `δ_p = ⋆_{p-1}^{-1} d_{p-1}^T ⋆_p : C^p → C^{p-1}`, the adjoint of `d_{p-1}`
/// for the inner products `⟨a, b⟩_p = aᵀ ⋆_p b`.
pub fn codifferential(grid: &CubicalGrid, metric: &MetricField, p: usize) -> Result<SparseMatrix> {
    if p == 0 {
        return Err(Error::InvalidArgument("codifferential needs p >= 1".into()));
    }
    check_degree(grid, p, grid.n())?;
    let mut m = transpose(&build_d(grid, p - 1)?);
    let lower: Vec<f64> = build_star(grid, metric, p - 1)?.iter().map(|s| 1.0 / s).collect();
    scale_rows(&mut m, &lower);
    scale_cols(&mut m, &build_star(grid, metric, p)?);
    Ok(m)
}

/// `Δ_p = d_{p-1} δ_p + δ_{p+1} d_p`.
pub fn hodge_laplacian(grid: &CubicalGrid, metric: &MetricField, p: usize) -> Result<SparseMatrix> {
    check_degree(grid, p, grid.n())?;
    let size = grid.num_cells(p);
    let mut out: SparseMatrix = CsMat::zero((size, size));
    if p > 0 {
        out = &out + &(&build_d(grid, p - 1)? * &codifferential(grid, metric, p)?);
    }
    if p < grid.n() {
        out = &out + &(&codifferential(grid, metric, p + 1)? * &build_d(grid, p)?);
    }
    Ok(out)
}

/// `⟨a, b⟩ = ± aᵀ ⋆ b`, the sign undoing the orientation of the star.
pub fn inner_product(grid: &CubicalGrid, star: &[f64], a: &Cochain, b: &Cochain) -> f64 {
    let sign = grid.orientation().sign();
    sign * a
        .values
        .iter()
        .zip(&b.values)
        .zip(star)
        .map(|((x, y), s)| x * y * s)
        .sum::<f64>()
}

/// `y = M x`, rows in parallel.
pub fn apply(m: &SparseMatrix, x: &[f64]) -> Vec<f64> {
    (0..m.rows())
        .into_par_iter()
        .map(|i| {
            m.outer_view(i)
                .map_or(0.0, |row| row.iter().map(|(j, v)| v * x[j]).sum())
        })
        .collect()
}

/// Applies an operator of degree `±1` to a cochain.
pub fn apply_to(m: &SparseMatrix, c: &Cochain, degree: usize) -> Cochain {
    Cochain {
        degree,
        values: apply(m, &c.values),
    }
}

/// Largest absolute entry.
pub fn max_abs_entry(m: &SparseMatrix) -> f64 {
    m.data().iter().fold(0.0, |acc, v| acc.max(v.abs()))
}

const PRIME: u64 = 2_147_483_647;

fn pow_mod(mut b: u64, mut e: u64) -> u64 {
    let mut r = 1;
    b %= PRIME;
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % PRIME;
        }
        b = b * b % PRIME;
        e >>= 1;
    }
    r
}

/// Rank of an integer matrix by Gaussian elimination modulo `2³¹ - 1`.
/// Equals the rational rank unless the prime divides a maximal minor, which
/// cannot happen for unimodular matrices such as cubical incidences.
pub fn rank_mod_prime(m: &CsMat<i64>) -> usize {
    let (rows, cols) = (m.rows(), m.cols());
    let mut dense: Vec<Vec<u64>> = vec![vec![0; cols]; rows];
    for (i, row) in m.outer_iterator().enumerate() {
        for (j, &v) in row.iter() {
            dense[i][j] = v.rem_euclid(PRIME as i64) as u64;
        }
    }
    let mut rank = 0;
    for col in 0..cols {
        let Some(pivot) = (rank..rows).find(|&r| dense[r][col] != 0) else {
            continue;
        };
        dense.swap(rank, pivot);
        let inv = pow_mod(dense[rank][col], PRIME - 2);
        let pivot_row: Vec<u64> = dense[rank].iter().map(|v| v * inv % PRIME).collect();
        for r in 0..rows {
            if r != rank && dense[r][col] != 0 {
                let f = dense[r][col];
                for (x, pv) in dense[r].iter_mut().zip(&pivot_row).skip(col) {
                    *x = (*x + PRIME - f * pv % PRIME) % PRIME;
                }
            }
        }
        dense[rank] = pivot_row;
        rank += 1;
        if rank == rows {
            break;
        }
    }
    rank
}

/// `dim H^p = #p-cells - rank d_p - rank d_{p-1}`, by exact elimination.
pub fn betti_number(grid: &CubicalGrid, p: usize) -> Result<usize> {
    check_degree(grid, p, grid.n())?;
    let up = if p < grid.n() {
        rank_mod_prime(&incidence(grid, p)?)
    } else {
        0
    };
    let down = if p > 0 {
        rank_mod_prime(&incidence(grid, p - 1)?)
    } else {
        0
    };
    Ok(grid.num_cells(p) - up - down)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dec::Orientation;
    use approx::assert_relative_eq;

    #[test]
    fn d_squared_vanishes_exactly() {
        let g = CubicalGrid::torus(4, 4).unwrap();
        for p in 0..3 {
            let dd = &incidence(&g, p + 1).unwrap() * &incidence(&g, p).unwrap();
            assert!(dd.data().iter().all(|&v| v == 0), "p = {p}");
        }
        let b = CubicalGrid::block(3, 3, &[0.0; 3], &[1.0; 3]).unwrap();
        let dd = &incidence(&b, 1).unwrap() * &incidence(&b, 0).unwrap();
        assert!(dd.data().iter().all(|&v| v == 0));
    }

    #[test]
    fn d_of_constant_is_zero() {
        let g = CubicalGrid::torus(4, 4).unwrap();
        let d0 = build_d(&g, 0).unwrap();
        let ones = vec![1.0; g.num_cells(0)];
        assert!(apply(&d0, &ones).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn rank_of_first_d_on_torus() {
        // rank d_0 = #vertices - b_0.
        let g = CubicalGrid::torus(4, 4).unwrap();
        assert_eq!(rank_mod_prime(&incidence(&g, 0).unwrap()), 256 - 1);
    }

    #[test]
    fn betti_numbers_of_small_torus() {
        let g = CubicalGrid::torus(4, 3).unwrap();
        let b: Vec<usize> = (0..=4).map(|p| betti_number(&g, p).unwrap()).collect();
        assert_eq!(b, vec![1, 4, 6, 4, 1]);
    }

    #[test]
    fn star_entries() {
        let g = CubicalGrid::torus(4, 4).unwrap();
        let flat = MetricField::flat(&g);
        assert!(build_star(&g, &flat, 1).unwrap().iter().all(|&s| s == 1.0));
        let g2 = CubicalGrid::new(4, vec![3; 4], vec![0.5, 1.0, 2.0, 3.0], vec![0.0; 4], vec![true; 4]).unwrap();
        let s = build_star(&g2, &MetricField::flat(&g2), 1).unwrap();
        // First 1-cell lies along axis 0: dual 3-volume 1·2·3 over length 0.5.
        assert_relative_eq!(s[0], 12.0);
    }

    #[test]
    fn middle_star_ignores_the_metric() {
        let g = CubicalGrid::torus(4, 4).unwrap();
        let u = MetricField::random(&g, 3, 0.5).unwrap();
        let flat = MetricField::flat(&g);
        assert_eq!(build_star(&g, &u, 2).unwrap(), build_star(&g, &flat, 2).unwrap());
        assert_ne!(build_star(&g, &u, 1).unwrap(), build_star(&g, &flat, 1).unwrap());
    }

    #[test]
    fn star_star_sign() {
        let g = CubicalGrid::new(4, vec![3; 4], vec![0.5, 1.0, 2.0, 3.0], vec![0.0; 4], vec![true; 4]).unwrap();
        let u = MetricField::random(&g, 1, 0.3).unwrap();
        for p in 0..=4 {
            let expected = if (p * (4 - p)) % 2 == 0 { 1.0 } else { -1.0 };
            let s = build_star(&g, &u, p).unwrap();
            let t = build_dual_star(&g, &u, p).unwrap();
            for (a, b) in s.iter().zip(&t) {
                assert_relative_eq!(a * b, expected, max_relative = 1e-15);
            }
        }
    }

    #[test]
    fn codifferential_is_adjoint_and_squares_to_zero() {
        let g = CubicalGrid::torus(4, 3).unwrap();
        let u = MetricField::random(&g, 7, 0.4).unwrap();
        for p in 1..4 {
            let d = build_d(&g, p).unwrap();
            let delta = codifferential(&g, &u, p + 1).unwrap();
            let (sp, sq) = (build_star(&g, &u, p).unwrap(), build_star(&g, &u, p + 1).unwrap());
            for k in 0..50u64 {
                let a = Cochain::random(&g, p, 1000 + k);
                let b = Cochain::random(&g, p + 1, 2000 + k);
                let lhs = inner_product(&g, &sq, &apply_to(&d, &a, p + 1), &b);
                let rhs = inner_product(&g, &sp, &a, &apply_to(&delta, &b, p));
                assert!((lhs - rhs).abs() < 1e-12 * lhs.abs().max(1.0), "{lhs} {rhs}");
            }
            let dd = &codifferential(&g, &u, p).unwrap() * &delta;
            assert!(max_abs_entry(&dd) < 1e-12);
        }
    }

    #[test]
    fn laplacian_does_not_see_orientation() {
        let g = CubicalGrid::torus(4, 3).unwrap();
        let r = g.clone().with_orientation(Orientation::Reversed);
        let u = MetricField::random(&g, 5, 0.3).unwrap();
        for p in 0..=4 {
            let a = hodge_laplacian(&g, &u, p).unwrap();
            let b = hodge_laplacian(&r, &u, p).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn middle_coclosedness_is_conformal() {
        // d⋆ω on middle forms is the same for every u, so δ_u ω = 0 ⇔ δ_0 ω = 0.
        let g = CubicalGrid::torus(4, 3).unwrap();
        let u = MetricField::random(&g, 11, 0.5).unwrap();
        let flat = MetricField::flat(&g);
        let w = Cochain::random(&g, 2, 4);
        let dt = transpose(&build_d(&g, 1).unwrap());
        let star_u: Vec<f64> = build_star(&g, &u, 2)
            .unwrap()
            .iter()
            .zip(&w.values)
            .map(|(s, v)| s * v)
            .collect();
        let star_0: Vec<f64> = build_star(&g, &flat, 2)
            .unwrap()
            .iter()
            .zip(&w.values)
            .map(|(s, v)| s * v)
            .collect();
        assert_eq!(apply(&dt, &star_u), apply(&dt, &star_0));
    }
}
