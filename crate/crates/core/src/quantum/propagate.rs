//! Time evolution `exp(-i H t)`: dense eigendecomposition for small sectors and
//! a Chebyshev expansion for vectors in spaces too large to diagonalise.

use faer::complex_native::c64;
use faer::{Mat, Side};

use super::hamiltonian::SparseOperator;
use crate::error::{Error, Result};
use crate::C64;

/// Largest matrix the dense route will diagonalise.
pub const DENSE_LIMIT: usize = 6000;

pub(crate) fn from_c64(z: c64) -> C64 {
    C64::new(z.re, z.im)
}

/// `H = V diag(E) V^dagger`.
#[derive(Debug, Clone)]
pub struct Eigensystem {
    values: Vec<f64>,
    vectors: Mat<c64>,
}

impl Eigensystem {
    pub fn new(h: &SparseOperator) -> Result<Self> {
        if h.dim() > DENSE_LIMIT {
            return Err(Error::DimensionOverflow {
                dim: h.dim(),
                limit: DENSE_LIMIT,
            });
        }
        if h.dim() == 0 {
            return Ok(Self {
                values: Vec::new(),
                vectors: Mat::zeros(0, 0),
            });
        }
        let evd = h.to_dense().selfadjoint_eigendecomposition(Side::Lower);
        let s = evd.s().column_vector();
        let values = (0..h.dim()).map(|k| s.read(k).re).collect();
        Ok(Self {
            values,
            vectors: evd.u().to_owned(),
        })
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// Eigenvalues in ascending order.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn vectors(&self) -> &Mat<c64> {
        &self.vectors
    }

    /// Coefficients in the eigenbasis, `V^dagger v`.
    pub fn project(&self, v: &[C64]) -> Vec<C64> {
        let n = self.dim();
        (0..n)
            .map(|a| {
                let mut acc = C64::new(0.0, 0.0);
                for (x, &vx) in v.iter().enumerate() {
                    acc += from_c64(self.vectors.read(x, a)).conj() * vx;
                }
                acc
            })
            .collect()
    }

    /// Back to the original basis, `V c`.
    pub fn reconstruct(&self, c: &[C64]) -> Vec<C64> {
        let n = self.dim();
        let mut out = vec![C64::new(0.0, 0.0); n];
        for (a, &ca) in c.iter().enumerate() {
            if ca == C64::new(0.0, 0.0) {
                continue;
            }
            for (x, o) in out.iter_mut().enumerate() {
                *o += from_c64(self.vectors.read(x, a)) * ca;
            }
        }
        out
    }

    /// `exp(-i H t) v`.
    pub fn evolve(&self, v: &[C64], t: f64) -> Vec<C64> {
        let c: Vec<C64> = self
            .project(v)
            .into_iter()
            .zip(&self.values)
            .map(|(ca, &e)| ca * C64::from_polar(1.0, -e * t))
            .collect();
        self.reconstruct(&c)
    }
}

/// Bessel functions `J_k(x)` for `k = 0..=kmax` by Miller's backward recurrence,
/// normalised with `J_0 + 2 sum J_2k = 1`.
pub fn bessel_j_sequence(x: f64, kmax: usize) -> Vec<f64> {
    let mut out = vec![0.0; kmax + 1];
    if x == 0.0 {
        out[0] = 1.0;
        return out;
    }
    let ax = x.abs();
    let start = kmax.max(ax.ceil() as usize) + 20 + (ax.sqrt() as usize) * 4;
    let mut next = 0.0; // J_{k+1}
    let mut cur = 1e-300; // J_k
    let mut norm = 0.0;
    let mut values = vec![0.0; start + 1];
    values[start] = cur;
    for k in (1..=start).rev() {
        let prev = 2.0 * k as f64 / ax * cur - next;
        next = cur;
        cur = prev;
        values[k - 1] = cur;
        if cur.abs() > 1e250 {
            for v in values[k - 1..].iter_mut() {
                *v *= 1e-250;
            }
            cur *= 1e-250;
            next *= 1e-250;
        }
    }
    for (k, v) in values.iter().enumerate() {
        if k == 0 {
            norm += v;
        } else if k % 2 == 0 {
            norm += 2.0 * v;
        }
    }
    for k in 0..=kmax {
        let mut v = values[k] / norm;
        // J_k(-x) = (-1)^k J_k(x)
        if x < 0.0 && k % 2 == 1 {
            v = -v;
        }
        out[k] = v;
    }
    out
}

/// Chebyshev expansion of `exp(-i H t)` acting on vectors.
#[derive(Debug, Clone)]
pub struct ChebyshevPropagator<'a> {
    h: &'a SparseOperator,
    center: f64,
    half_width: f64,
    tol: f64,
}

impl<'a> ChebyshevPropagator<'a> {
    pub fn new(h: &'a SparseOperator) -> Self {
        let (lo, hi) = h.spectral_bounds();
        let center = 0.5 * (lo + hi);
        let half_width = (0.5 * (hi - lo)).max(1e-12) * 1.01;
        Self {
            h,
            center,
            half_width,
            tol: 1e-15,
        }
    }

    /// `exp(-i H t) v`.
    pub fn evolve(&self, v: &[C64], t: f64) -> Vec<C64> {
        let x = self.half_width * t;
        let kmax = (x.abs() * 1.2 + 40.0) as usize;
        let bessel = bessel_j_sequence(x, kmax);
        let n = v.len();
        let scaled = |src: &[C64], dst: &mut [C64]| {
            self.h.apply(src, dst);
            for (d, s) in dst.iter_mut().zip(src) {
                *d = (*d - s * self.center) / self.half_width;
            }
        };
        let mut out: Vec<C64> = v.iter().map(|z| z * bessel[0]).collect();
        let mut t_prev = v.to_vec();
        let mut t_cur = vec![C64::new(0.0, 0.0); n];
        scaled(v, &mut t_cur);
        let mut phase = C64::new(0.0, -1.0);
        let mut tail = 0usize;
        for k in 1..=kmax {
            let coeff = phase * (2.0 * bessel[k]);
            for (o, z) in out.iter_mut().zip(&t_cur) {
                *o += coeff * z;
            }
            if k as f64 > x.abs() && bessel[k].abs() < self.tol {
                tail += 1;
                if tail >= 3 {
                    break;
                }
            }
            // T_{k+1} = 2 H~ T_k - T_{k-1}
            let mut t_next = vec![C64::new(0.0, 0.0); n];
            scaled(&t_cur, &mut t_next);
            for (a, b) in t_next.iter_mut().zip(&t_prev) {
                *a = *a * 2.0 - b;
            }
            t_prev = std::mem::replace(&mut t_cur, t_next);
            phase *= C64::new(0.0, -1.0);
        }
        let global = C64::from_polar(1.0, -self.center * t);
        out.iter_mut().for_each(|z| *z *= global);
        out
    }
}
