//! Sparse flip-flop Hamiltonian `H = (1/2S) sum_{i != j} J(i - j) S+_i S-_j`
//! for spin 1/2, where the matrix element between states that differ by one
//! flip-flop is the hopping amplitude of the pair.

use faer::complex_native::c64;
use faer::Mat;

use super::basis::{sz, SpinBasis};
use crate::error::{Error, Result};
use crate::geometry::{Boundary, CouplingModel};
use crate::C64;

/// Compressed-sparse-row complex matrix.
#[derive(Debug, Clone)]
pub struct SparseOperator {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<C64>,
}

impl SparseOperator {
    /// Assemble from per-row entry lists; duplicate columns are summed.
    pub fn from_rows(rows: Vec<Vec<(usize, C64)>>) -> Self {
        let dim = rows.len();
        let mut row_ptr = Vec::with_capacity(dim + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for mut row in rows {
            row.sort_by_key(|&(c, _)| c);
            let mut last: Option<usize> = None;
            for (c, v) in row {
                if last == Some(c) {
                    *vals.last_mut().unwrap() += v;
                } else {
                    cols.push(c);
                    vals.push(v);
                    last = Some(c);
                }
            }
            row_ptr.push(cols.len());
        }
        Self {
            dim,
            row_ptr,
            cols,
            vals,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    /// Entries of row `r` as `(column, value)`.
    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, C64)> + '_ {
        let range = self.row_ptr[r]..self.row_ptr[r + 1];
        self.cols[range.clone()]
            .iter()
            .copied()
            .zip(self.vals[range].iter().copied())
    }

    /// `y = A x`.
    pub fn apply(&self, x: &[C64], y: &mut [C64]) {
        for (r, out) in y.iter_mut().enumerate() {
            let mut acc = C64::new(0.0, 0.0);
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.vals[k] * x[self.cols[k]];
            }
            *out = acc;
        }
    }

    pub fn mul(&self, x: &[C64]) -> Vec<C64> {
        let mut y = vec![C64::new(0.0, 0.0); self.dim];
        self.apply(x, &mut y);
        y
    }

    /// `<x|A|x>`.
    pub fn expectation(&self, x: &[C64]) -> C64 {
        let y = self.mul(x);
        x.iter().zip(&y).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn get(&self, r: usize, c: usize) -> C64 {
        self.row(r)
            .find(|&(col, _)| col == c)
            .map_or(C64::new(0.0, 0.0), |(_, v)| v)
    }

    /// Largest `|A_rc - conj(A_cr)|`.
    pub fn hermiticity_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for r in 0..self.dim {
            for (c, v) in self.row(r) {
                worst = worst.max((v - self.get(c, r).conj()).norm());
            }
        }
        worst
    }

    /// True when every stored value has zero imaginary part.
    pub fn is_real(&self) -> bool {
        self.vals.iter().all(|v| v.im == 0.0)
    }

    pub fn to_dense(&self) -> Mat<c64> {
        let mut m = Mat::<c64>::zeros(self.dim, self.dim);
        for r in 0..self.dim {
            for (c, v) in self.row(r) {
                m.write(r, c, c64::new(v.re, v.im));
            }
        }
        m
    }

    pub fn to_dense_real(&self) -> Mat<f64> {
        let mut m = Mat::<f64>::zeros(self.dim, self.dim);
        for r in 0..self.dim {
            for (c, v) in self.row(r) {
                m.write(r, c, v.re);
            }
        }
        m
    }

    /// Gershgorin interval containing the spectrum of a Hermitian operator.
    pub fn spectral_bounds(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for r in 0..self.dim {
            let mut center = 0.0;
            let mut radius = 0.0;
            for (c, v) in self.row(r) {
                if c == r {
                    center += v.re;
                } else {
                    radius += v.norm();
                }
            }
            lo = lo.min(center - radius);
            hi = hi.max(center + radius);
        }
        if self.dim == 0 {
            (0.0, 0.0)
        } else {
            (lo, hi)
        }
    }
}

/// Build `H` on `basis`. Symmetric bases require a periodic model of the same size.
pub fn build_hamiltonian(model: &CouplingModel, basis: &SpinBasis) -> Result<SparseOperator> {
    let n = model.n_sites();
    if basis.n_sites() != n {
        return Err(Error::InvalidParameter(format!(
            "basis has {} sites, model has {n}",
            basis.n_sites()
        )));
    }
    if basis.sector().is_some() && model.boundary() != Boundary::Periodic {
        return Err(Error::Unsupported(
            "symmetry sectors need a periodic model".into(),
        ));
    }
    let bonds = model.bonds();
    // column c: H applied to the representative of basis vector c
    let columns: Vec<Vec<(usize, C64)>> = (0..basis.dim())
        .map(|c| {
            let mask = basis.state(c);
            let weight = (basis.orbit_size(c) as f64).sqrt();
            let mut row = Vec::new();
            for &(i, j, amp) in &bonds {
                // flip-flop acts only on antiparallel pairs
                if (mask >> i & 1) == (mask >> j & 1) {
                    continue;
                }
                let target = mask ^ (1 << i) ^ (1 << j);
                if let Some((r, chi)) = basis.representative(target) {
                    let other = (basis.orbit_size(r) as f64).sqrt();
                    row.push((r, chi * (amp * weight / other)));
                }
            }
            row
        })
        .collect();
    let mut by_row: Vec<Vec<(usize, C64)>> = vec![Vec::new(); basis.dim()];
    for (c, entries) in columns.into_iter().enumerate() {
        for (r, v) in entries {
            by_row[r].push((c, v));
        }
    }
    Ok(SparseOperator::from_rows(by_row))
}

/// Diagonal of `sum_j S^z_j` over the basis.
pub fn total_sz(basis: &SpinBasis) -> Vec<f64> {
    let n = basis.n_sites();
    basis
        .states()
        .iter()
        .map(|&m| (0..n).map(|j| sz(m, j)).sum())
        .collect()
}

/// Diagonal of `S^z_site` over a basis without symmetry restriction.
pub fn site_sz(basis: &SpinBasis, site: usize) -> Vec<f64> {
    basis.states().iter().map(|&m| sz(m, site)).collect()
}
