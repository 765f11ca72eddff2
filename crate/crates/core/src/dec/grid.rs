//! Cubical complexes, cochains and diagonal conformal metrics.
//!
//! A `p`-cell is a base vertex together with a sorted set of `p` axes; it
//! spans `[v, v + e_a]` along each of those axes. Cells of each axis set form
//! a rectangular block, blocks are stored in lexicographic order of their
//! axis sets, and cells inside a block in row-major order of the base vertex.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::geometry::Dimension;
use crate::{Error, Result};

/// Global orientation of the complex. Reversing it flips the sign of every
/// Hodge star (and of the volume form used by the inner product).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    Standard,
    Reversed,
}

impl Orientation {
    pub fn sign(self) -> f64 {
        match self {
            Self::Standard => 1.0,
            Self::Reversed => -1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CubicalGrid {
    n: Dimension,
    counts: Vec<usize>,
    spacings: Vec<f64>,
    origin: Vec<f64>,
    periodic: Vec<bool>,
    orientation: Orientation,
}

/// All `p`-cells sharing one axis set.
#[derive(Debug, Clone)]
pub(crate) struct CellBlock {
    pub mask: u32,
    pub axes: Vec<usize>,
    /// Number of base vertices along each axis.
    pub extents: Vec<usize>,
    pub offset: usize,
    pub len: usize,
}

impl CellBlock {
    pub fn base(&self, local: usize) -> Vec<usize> {
        let mut v = vec![0; self.extents.len()];
        let mut rest = local;
        for i in (0..v.len()).rev() {
            v[i] = rest % self.extents[i];
            rest /= self.extents[i];
        }
        v
    }

    fn local(&self, v: &[usize]) -> usize {
        v.iter().zip(&self.extents).fold(0, |acc, (vi, e)| acc * e + vi)
    }
}

/// Sorted axis sets of size `p` in lexicographic order.
pub(crate) fn axis_sets(n: usize, p: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, p: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == p {
            out.push(cur.clone());
            return;
        }
        for a in start..n {
            cur.push(a);
            rec(a + 1, n, p, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, p, &mut Vec::new(), &mut out);
    out
}

pub(crate) fn mask_of(axes: &[usize]) -> u32 {
    axes.iter().fold(0, |m, a| m | (1 << a))
}

impl CubicalGrid {
    pub fn new(n: u32, counts: Vec<usize>, spacings: Vec<f64>, origin: Vec<f64>, periodic: Vec<bool>) -> Result<Self> {
        let n = Dimension::new(n)?;
        let k = n.as_usize();
        if counts.len() != k || spacings.len() != k || origin.len() != k || periodic.len() != k {
            return Err(Error::InvalidArgument(format!(
                "grid needs {k} counts, spacings, origin coordinates and periodicity flags"
            )));
        }
        if let Some(c) = counts.iter().find(|&&c| c < 3) {
            return Err(Error::InvalidArgument(format!(
                "grid needs at least 3 cells per axis, got {c}"
            )));
        }
        if let Some(h) = spacings.iter().find(|h| !(h.is_finite() && **h > 0.0)) {
            return Err(Error::InvalidArgument(format!(
                "grid spacing must be positive, got {h}"
            )));
        }
        Ok(Self {
            n,
            counts,
            spacings,
            origin,
            periodic,
            orientation: Orientation::Standard,
        })
    }

    /// Periodic grid with `cells` cells of unit size along every axis.
    pub fn torus(n: u32, cells: usize) -> Result<Self> {
        Self::torus_with_length(n, cells, cells as f64)
    }

    /// Periodic grid of `cells` cells per axis on `ℝⁿ / (length ℤ)ⁿ`.
    pub fn torus_with_length(n: u32, cells: usize, length: f64) -> Result<Self> {
        let k = n as usize;
        Self::new(
            n,
            vec![cells; k],
            vec![length / cells as f64; k],
            vec![0.0; k],
            vec![true; k],
        )
    }

    /// Non-periodic box `Π [lower_i, upper_i]` with `cells` cells per axis.
    pub fn block(n: u32, cells: usize, lower: &[f64], upper: &[f64]) -> Result<Self> {
        let k = n as usize;
        if lower.len() != k || upper.len() != k {
            return Err(Error::InvalidArgument(format!("block needs {k} bounds per side")));
        }
        let spacings = lower.iter().zip(upper).map(|(a, b)| (b - a) / cells as f64).collect();
        Self::new(n, vec![cells; k], spacings, lower.to_vec(), vec![false; k])
    }

    pub fn with_orientation(mut self, orientation: Orientation) -> Self {
        self.orientation = orientation;
        self
    }

    pub fn dimension(&self) -> Dimension {
        self.n
    }

    pub fn n(&self) -> usize {
        self.n.as_usize()
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn spacings(&self) -> &[f64] {
        &self.spacings
    }

    pub fn periodic(&self) -> &[bool] {
        &self.periodic
    }

    pub fn is_closed(&self) -> bool {
        self.periodic.iter().all(|&p| p)
    }

    pub fn orientation(&self) -> Orientation {
        self.orientation
    }

    /// Vertices along axis `i`.
    fn vertex_extent(&self, i: usize) -> usize {
        if self.periodic[i] {
            self.counts[i]
        } else {
            self.counts[i] + 1
        }
    }

    pub(crate) fn blocks(&self, p: usize) -> Vec<CellBlock> {
        let mut offset = 0;
        axis_sets(self.n(), p)
            .into_iter()
            .map(|axes| {
                let mask = mask_of(&axes);
                let extents: Vec<usize> = (0..self.n())
                    .map(|i| {
                        if mask & (1 << i) != 0 {
                            self.counts[i]
                        } else {
                            self.vertex_extent(i)
                        }
                    })
                    .collect();
                let len = extents.iter().product();
                let block = CellBlock {
                    mask,
                    axes,
                    extents,
                    offset,
                    len,
                };
                offset += len;
                block
            })
            .collect()
    }

    pub fn num_cells(&self, p: usize) -> usize {
        self.blocks(p).iter().map(|b| b.len).sum()
    }

    /// Index of the cell with base `v` (wrapped on periodic axes) in `block`.
    pub(crate) fn index_in(&self, block: &CellBlock, v: &[isize]) -> Option<usize> {
        let mut w = Vec::with_capacity(v.len());
        for (i, &vi) in v.iter().enumerate() {
            let e = block.extents[i] as isize;
            if self.periodic[i] {
                w.push(vi.rem_euclid(self.counts[i] as isize) as usize);
            } else if (0..e).contains(&vi) {
                w.push(vi as usize);
            } else {
                return None;
            }
        }
        Some(block.offset + block.local(&w))
    }

    /// Coordinates on the doubled lattice of the centre of a cell.
    pub(crate) fn doubled_center(&self, base: &[usize], mask: u32) -> Vec<usize> {
        base.iter()
            .enumerate()
            .map(|(i, &v)| 2 * v + usize::from(mask & (1 << i) != 0))
            .collect()
    }

    pub(crate) fn doubled_to_point(&self, c: &[usize]) -> Vec<f64> {
        c.iter()
            .enumerate()
            .map(|(i, &ci)| self.origin[i] + self.spacings[i] * ci as f64 / 2.0)
            .collect()
    }

    /// Physical centre of every `p`-cell, in storage order.
    pub fn cell_centers(&self, p: usize) -> Vec<Vec<f64>> {
        let mut out = Vec::with_capacity(self.num_cells(p));
        for b in self.blocks(p) {
            for local in 0..b.len {
                out.push(self.doubled_to_point(&self.doubled_center(&b.base(local), b.mask)));
            }
        }
        out
    }

    /// Axis set of every `p`-cell, in storage order.
    pub fn cell_axes(&self, p: usize) -> Vec<Vec<usize>> {
        let mut out = Vec::with_capacity(self.num_cells(p));
        for b in self.blocks(p) {
            out.extend(std::iter::repeat_n(b.axes.clone(), b.len));
        }
        out
    }

    /// Euclidean volume of a cell spanning `axes`.
    pub(crate) fn volume(&self, axes: impl Iterator<Item = usize>) -> f64 {
        axes.map(|a| self.spacings[a]).product()
    }

    fn doubled_extent(&self, i: usize) -> usize {
        if self.periodic[i] {
            2 * self.counts[i]
        } else {
            2 * self.counts[i] + 1
        }
    }
}

/// A real value on every oriented `p`-cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Cochain {
    pub degree: usize,
    pub values: Vec<f64>,
}

impl Cochain {
    pub fn new(grid: &CubicalGrid, degree: usize, values: Vec<f64>) -> Result<Self> {
        if degree > grid.n() {
            return Err(Error::InvalidArgument(format!(
                "degree {degree} exceeds n = {}",
                grid.n()
            )));
        }
        let expected = grid.num_cells(degree);
        if values.len() != expected {
            return Err(Error::InvalidArgument(format!(
                "{degree}-cochain needs {expected} values, got {}",
                values.len()
            )));
        }
        Ok(Self { degree, values })
    }

    pub fn zeros(grid: &CubicalGrid, degree: usize) -> Self {
        Self {
            degree,
            values: vec![0.0; grid.num_cells(degree)],
        }
    }

    /// Independent uniform values in `[-1, 1)`.
    pub fn random(grid: &CubicalGrid, degree: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let values = (0..grid.num_cells(degree))
            .map(|_| rng.random_range(-1.0..1.0))
            .collect();
        Self { degree, values }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Conformal metric `e^{2u}·flat`, sampled at the centre of every cell of
/// every degree (the doubled lattice).
#[derive(Debug, Clone, PartialEq)]
pub struct MetricField {
    extents: Vec<usize>,
    factors: Vec<f64>,
}

impl MetricField {
    pub fn flat(grid: &CubicalGrid) -> Self {
        let extents: Vec<usize> = (0..grid.n()).map(|i| grid.doubled_extent(i)).collect();
        let len = extents.iter().product();
        Self {
            extents,
            factors: vec![1.0; len],
        }
    }

    /// Samples `e^{2u}` from a function of the physical point.
    pub fn from_fn<F: Fn(&[f64]) -> f64>(grid: &CubicalGrid, f: F) -> Result<Self> {
        let mut m = Self::flat(grid);
        let extents = m.extents.clone();
        for (k, value) in m.factors.iter_mut().enumerate() {
            let c = unravel(k, &extents);
            *value = f(&grid.doubled_to_point(&c));
        }
        m.validate()
    }

    /// Independent samples `e^{2u}` with `u` uniform in `[-amplitude, amplitude]`.
    pub fn random(grid: &CubicalGrid, seed: u64, amplitude: f64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut m = Self::flat(grid);
        for v in m.factors.iter_mut() {
            *v = (2.0 * rng.random_range(-amplitude..=amplitude)).exp();
        }
        m.validate()
    }

    pub fn from_samples(grid: &CubicalGrid, factors: Vec<f64>) -> Result<Self> {
        let mut m = Self::flat(grid);
        if factors.len() != m.factors.len() {
            return Err(Error::InvalidArgument(format!(
                "metric needs {} samples, got {}",
                m.factors.len(),
                factors.len()
            )));
        }
        m.factors = factors;
        m.validate()
    }

    fn validate(self) -> Result<Self> {
        match self.factors.iter().position(|v| !(v.is_finite() && *v > 0.0)) {
            Some(k) => Err(Error::InvalidArgument(format!(
                "metric factor e^(2u) must be positive, got {} at sample {k}",
                self.factors[k]
            ))),
            None => Ok(self),
        }
    }

    /// `e^{2u}` at a doubled-lattice point.
    pub(crate) fn factor(&self, c: &[usize]) -> f64 {
        let k = c.iter().zip(&self.extents).fold(0, |acc, (ci, e)| acc * e + ci);
        self.factors[k]
    }

    pub(crate) fn fits(&self, grid: &CubicalGrid) -> bool {
        self.extents.len() == grid.n() && (0..grid.n()).all(|i| self.extents[i] == grid.doubled_extent(i))
    }
}

fn unravel(mut k: usize, extents: &[usize]) -> Vec<usize> {
    let mut c = vec![0; extents.len()];
    for i in (0..extents.len()).rev() {
        c[i] = k % extents[i];
        k /= extents[i];
    }
    c
}
