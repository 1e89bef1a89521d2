//! Symmetric banded matrices and their Cholesky factorization.

use crate::error::{Error, Result};

/// Symmetric matrix storing only the diagonal and `bandwidth` sub-diagonals, row-major.
///
/// Entry `(i, j)` with `i - bandwidth <= j <= i` lives at `i * (bandwidth + 1) + bandwidth + j - i`.
#[derive(Debug, Clone, PartialEq)]
pub struct BandedSymMatrix {
    dim: usize,
    bandwidth: usize,
    bands: Vec<f64>,
}

impl BandedSymMatrix {
    pub fn zeros(dim: usize, bandwidth: usize) -> Self {
        BandedSymMatrix {
            dim,
            bandwidth,
            bands: vec![0.0; dim * (bandwidth + 1)],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut a = Self::zeros(dim, 0);
        for i in 0..dim {
            a.set(i, i, 1.0);
        }
        a
    }

    /// Builds from a dense symmetric matrix, keeping `bandwidth` sub-diagonals.
    pub fn from_dense(rows: &[Vec<f64>], bandwidth: usize) -> Self {
        let mut a = Self::zeros(rows.len(), bandwidth);
        for (i, row) in rows.iter().enumerate() {
            let lo = i.saturating_sub(bandwidth);
            for (j, &v) in row.iter().enumerate().take(i + 1).skip(lo) {
                a.set(i, j, v);
            }
        }
        a
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn bandwidth(&self) -> usize {
        self.bandwidth
    }

    pub fn bands(&self) -> &[f64] {
        &self.bands
    }

    fn slot(&self, i: usize, j: usize) -> Option<usize> {
        let (i, j) = if i >= j { (i, j) } else { (j, i) };
        (i - j <= self.bandwidth && i < self.dim).then(|| i * (self.bandwidth + 1) + self.bandwidth + j - i)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.slot(i, j).map_or(0.0, |s| self.bands[s])
    }

    /// Sets `(i, j)` and, by symmetry, `(j, i)`. Panics outside the band.
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let s = self.slot(i, j).expect("entry outside band");
        self.bands[s] = v;
    }

    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let s = self.slot(i, j).expect("entry outside band");
        self.bands[s] += v;
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        (0..self.dim)
            .map(|i| (0..self.dim).map(|j| self.get(i, j)).collect())
            .collect()
    }

    /// Maximum absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        (0..self.dim)
            .map(|i| {
                let lo = i.saturating_sub(self.bandwidth);
                let hi = (i + self.bandwidth).min(self.dim - 1);
                (lo..=hi).map(|j| self.get(i, j).abs()).sum::<f64>()
            })
            .fold(0.0, f64::max)
    }
}

/// Lower-triangular banded factor `L` with `A = L Lᵀ`.
#[derive(Debug, Clone, PartialEq)]
pub struct BandedCholesky {
    dim: usize,
    bandwidth: usize,
    bands: Vec<f64>,
}

/// Factors a symmetric positive definite banded matrix.
pub fn cholesky_banded(a: &BandedSymMatrix) -> Result<BandedCholesky> {
    let n = a.dim;
    let bw = a.bandwidth;
    let w = bw + 1;
    let mut l = a.bands.clone();
    let at = |i: usize, j: usize| i * w + bw + j - i;
    for i in 0..n {
        let lo = i.saturating_sub(bw);
        for j in lo..=i {
            let mut s = l[at(i, j)];
            let klo = lo.max(j.saturating_sub(bw));
            for k in klo..j {
                s -= l[at(i, k)] * l[at(j, k)];
            }
            if j == i {
                if !(s > 0.0) {
                    return Err(Error::NotPositiveDefinite { row: i, pivot: s });
                }
                l[at(i, i)] = s.sqrt();
            } else {
                l[at(i, j)] = s / l[at(j, j)];
            }
        }
    }
    Ok(BandedCholesky {
        dim: n,
        bandwidth: bw,
        bands: l,
    })
}

impl BandedCholesky {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn bandwidth(&self) -> usize {
        self.bandwidth
    }

    /// Entry `L[i][j]` (zero above the diagonal and outside the band).
    pub fn get(&self, i: usize, j: usize) -> f64 {
        if j > i || i - j > self.bandwidth {
            0.0
        } else {
            self.bands[i * (self.bandwidth + 1) + self.bandwidth + j - i]
        }
    }

    /// Solves `L y = b` then `Lᵀ x = y`, overwriting `b` with `x`.
    pub fn solve_in_place(&self, b: &mut [f64]) {
        let n = self.dim;
        let bw = self.bandwidth;
        let w = bw + 1;
        let l = &self.bands;
        for i in 0..n {
            let mut s = b[i];
            for k in i.saturating_sub(bw)..i {
                s -= l[i * w + bw + k - i] * b[k];
            }
            b[i] = s / l[i * w + bw];
        }
        for i in (0..n).rev() {
            let mut s = b[i];
            for k in i + 1..(i + bw + 1).min(n) {
                s -= l[k * w + bw + i - k] * b[k];
            }
            b[i] = s / l[i * w + bw];
        }
    }

    /// Dense `L Lᵀ`, used for reconstruction checks.
    pub fn reconstruct(&self) -> Vec<Vec<f64>> {
        let n = self.dim;
        let mut out = vec![vec![0.0; n]; n];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                let lo = i.saturating_sub(self.bandwidth).max(j.saturating_sub(self.bandwidth));
                *v = (lo..=i.min(j)).map(|k| self.get(i, k) * self.get(j, k)).sum();
            }
        }
        out
    }
}

/// Solver for a Gramian system using symmetric diagonal scaling before factorization.
#[derive(Debug, Clone)]
pub struct GramSolver {
    scale: Vec<f64>,
    factor: BandedCholesky,
}

impl GramSolver {
    pub fn new(a: &BandedSymMatrix) -> Result<Self> {
        let n = a.dim();
        let mut scale = Vec::with_capacity(n);
        for i in 0..n {
            let d = a.get(i, i);
            if !(d > 0.0) {
                return Err(Error::NotPositiveDefinite { row: i, pivot: d });
            }
            scale.push(1.0 / d.sqrt());
        }
        let mut s = a.clone();
        for i in 0..n {
            for j in i.saturating_sub(a.bandwidth())..=i {
                s.set(i, j, a.get(i, j) * scale[i] * scale[j]);
            }
        }
        Ok(GramSolver {
            scale,
            factor: cholesky_banded(&s)?,
        })
    }

    pub fn solve_in_place(&self, b: &mut [f64]) {
        for (x, s) in b.iter_mut().zip(&self.scale) {
            *x *= s;
        }
        self.factor.solve_in_place(b);
        for (x, s) in b.iter_mut().zip(&self.scale) {
            *x *= s;
        }
    }
}
