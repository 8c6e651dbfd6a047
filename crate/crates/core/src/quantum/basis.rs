//! Spin-1/2 bases: bit masks with optional magnetization and symmetry
//! restrictions.
//!
//! Bit `j` set means site `j` is flipped up, i.e. carries a magnon. A symmetric
//! basis is built from orbit representatives (smallest mask in the orbit) of
//! the group generated by translation, and optionally the reflection
//! `j -> -j` and the global spin flip.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::C64;

/// Largest Hilbert-space dimension any routine will build.
pub const MAX_DIMENSION: usize = 1 << 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    fn sign(self) -> f64 {
        match self {
            Parity::Even => 1.0,
            Parity::Odd => -1.0,
        }
    }
}

/// One-dimensional representation of the lattice symmetry group.
///
/// `reflection` is only meaningful for momenta `0` and `N/2`, and `flip` only
/// at half filling (or without a fixed magnon number).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SymmetrySector {
    /// Momentum index `m`, wavenumber `2 pi m / N`.
    pub momentum: usize,
    pub reflection: Option<Parity>,
    pub flip: Option<Parity>,
}

impl SymmetrySector {
    pub fn momentum(momentum: usize) -> Self {
        Self {
            momentum,
            reflection: None,
            flip: None,
        }
    }
}

/// Group element `T^shift R^reflect F^flip`, applied right to left.
#[derive(Debug, Clone, Copy)]
struct Element {
    shift: usize,
    reflect: bool,
    flip: bool,
}

#[derive(Debug, Clone)]
pub struct SpinBasis {
    n_sites: usize,
    magnon_number: Option<usize>,
    sector: Option<SymmetrySector>,
    /// Basis masks (representatives for a symmetric basis), ascending.
    states: Vec<u64>,
    /// Orbit sizes, parallel to `states`; all ones without symmetry.
    orbit_sizes: Vec<usize>,
    elements: Vec<Element>,
}

impl SpinBasis {
    /// All `2^N` product states.
    pub fn full(n_sites: usize) -> Result<Self> {
        Self::new(n_sites, None, None)
    }

    /// States with exactly `magnons` up spins.
    pub fn magnetization(n_sites: usize, magnons: usize) -> Result<Self> {
        Self::new(n_sites, Some(magnons), None)
    }

    /// Fixed magnon number and translation momentum.
    pub fn momentum(n_sites: usize, magnons: usize, momentum: usize) -> Result<Self> {
        Self::new(
            n_sites,
            Some(magnons),
            Some(SymmetrySector::momentum(momentum)),
        )
    }

    pub fn new(
        n_sites: usize,
        magnon_number: Option<usize>,
        sector: Option<SymmetrySector>,
    ) -> Result<Self> {
        if n_sites == 0 || n_sites > 20 {
            return Err(Error::InvalidParameter(format!(
                "spin basis supports 1..=20 sites, got {n_sites}"
            )));
        }
        if let Some(n) = magnon_number {
            if n > n_sites {
                return Err(Error::InvalidParameter(format!(
                    "{n} magnons do not fit on {n_sites} sites"
                )));
            }
        }
        let elements = match sector {
            None => Vec::new(),
            Some(sec) => group_elements(n_sites, magnon_number, sec)?,
        };
        let candidates: Box<dyn Iterator<Item = u64>> = match magnon_number {
            Some(n) => Box::new(masks_with_weight(n_sites, n)),
            None => Box::new(0..(1u64 << n_sites)),
        };
        let mut states = Vec::new();
        let mut orbit_sizes = Vec::new();
        match sector {
            None => {
                states.extend(candidates);
                orbit_sizes.resize(states.len(), 1);
            }
            Some(sec) => {
                for mask in candidates {
                    if let Some(orbit) = representative_orbit(mask, n_sites, &elements, sec) {
                        states.push(mask);
                        orbit_sizes.push(orbit);
                    }
                }
            }
        }
        if states.len() > MAX_DIMENSION {
            return Err(Error::DimensionOverflow {
                dim: states.len(),
                limit: MAX_DIMENSION,
            });
        }
        Ok(Self {
            n_sites,
            magnon_number,
            sector,
            states,
            orbit_sizes,
            elements,
        })
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn magnon_number(&self) -> Option<usize> {
        self.magnon_number
    }

    pub fn sector(&self) -> Option<SymmetrySector> {
        self.sector
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn states(&self) -> &[u64] {
        &self.states
    }

    pub fn state(&self, index: usize) -> u64 {
        self.states[index]
    }

    pub fn orbit_size(&self, index: usize) -> usize {
        self.orbit_sizes[index]
    }

    /// Index of a basis mask (which must be a representative for symmetric bases).
    pub fn index_of(&self, mask: u64) -> Option<usize> {
        if self.sector.is_none() && self.magnon_number.is_none() {
            return ((mask as usize) < self.states.len()).then_some(mask as usize);
        }
        self.states.binary_search(&mask).ok()
    }

    /// Representative of the orbit of `mask` and the character `chi(g)` of an
    /// element `g` with `g(rep) = mask`. Identity for a non-symmetric basis.
    ///
    /// Returns `None` when the orbit is not compatible with the sector.
    pub fn representative(&self, mask: u64) -> Option<(usize, C64)> {
        let Some(sec) = self.sector else {
            return self.index_of(mask).map(|i| (i, C64::new(1.0, 0.0)));
        };
        let mut best = u64::MAX;
        let mut best_g = self.elements[0];
        for &g in &self.elements {
            let image = apply(g, mask, self.n_sites);
            if image < best {
                best = image;
                best_g = g;
            }
        }
        let index = self.index_of(best)?;
        // best_g maps mask -> rep, so the inverse maps rep -> mask
        Some((index, character(best_g, self.n_sites, sec).conj()))
    }

    /// Components of basis vector `index` on product states: `(mask, amplitude)`.
    pub fn expand(&self, index: usize) -> Vec<(u64, C64)> {
        let rep = self.states[index];
        let Some(sec) = self.sector else {
            return vec![(rep, C64::new(1.0, 0.0))];
        };
        let norm = 1.0 / (self.orbit_sizes[index] as f64).sqrt();
        let mut out: Vec<(u64, C64)> = Vec::with_capacity(self.orbit_sizes[index]);
        for &g in &self.elements {
            let image = apply(g, rep, self.n_sites);
            if out.iter().all(|&(m, _)| m != image) {
                out.push((image, character(g, self.n_sites, sec).conj() * norm));
            }
        }
        out
    }

    /// Embed coefficients over this basis into a full `2^N` product-state vector.
    pub fn embed_into(&self, coefficients: &[C64], full: &mut [C64]) {
        debug_assert_eq!(full.len(), 1usize << self.n_sites);
        for (index, &c) in coefficients.iter().enumerate() {
            if self.sector.is_none() {
                full[self.states[index] as usize] += c;
            } else {
                for (mask, amp) in self.expand(index) {
                    full[mask as usize] += c * amp;
                }
            }
        }
    }
}

/// Number of up spins on sites `0..n` (the magnon count).
pub fn magnon_count(mask: u64) -> usize {
    mask.count_ones() as usize
}

/// `S^z_j` eigenvalue of `mask`: `+1/2` for an up spin.
pub fn sz(mask: u64, site: usize) -> f64 {
    if mask >> site & 1 == 1 {
        0.5
    } else {
        -0.5
    }
}

/// All `n_sites`-bit masks with `weight` bits set, ascending.
pub fn masks_with_weight(n_sites: usize, weight: usize) -> impl Iterator<Item = u64> {
    let limit = 1u64 << n_sites;
    let first = if weight == 0 { 0 } else { (1u64 << weight) - 1 };
    let mut next = Some(first);
    std::iter::from_fn(move || {
        let current = next?;
        if current >= limit {
            return None;
        }
        next = if current == 0 {
            None
        } else {
            // Gosper's hack
            let c = current & current.wrapping_neg();
            let r = current + c;
            Some((((r ^ current) >> 2) / c) | r)
        };
        Some(current)
    })
}

fn group_elements(
    n_sites: usize,
    magnon_number: Option<usize>,
    sec: SymmetrySector,
) -> Result<Vec<Element>> {
    if sec.momentum >= n_sites {
        return Err(Error::InvalidParameter(format!(
            "momentum index {} out of range for {n_sites} sites",
            sec.momentum
        )));
    }
    if sec.reflection.is_some() && !(sec.momentum == 0 || 2 * sec.momentum == n_sites) {
        return Err(Error::InvalidParameter(
            "reflection parity requires momentum 0 or N/2".into(),
        ));
    }
    if sec.flip.is_some() {
        if let Some(n) = magnon_number {
            if 2 * n != n_sites {
                return Err(Error::InvalidParameter(
                    "spin-flip parity requires half filling".into(),
                ));
            }
        }
    }
    let reflects: &[bool] = if sec.reflection.is_some() {
        &[false, true]
    } else {
        &[false]
    };
    let flips: &[bool] = if sec.flip.is_some() {
        &[false, true]
    } else {
        &[false]
    };
    let mut out = Vec::new();
    for shift in 0..n_sites {
        for &reflect in reflects {
            for &flip in flips {
                out.push(Element {
                    shift,
                    reflect,
                    flip,
                });
            }
        }
    }
    Ok(out)
}

fn apply(g: Element, mask: u64, n_sites: usize) -> u64 {
    let full = (1u64 << n_sites) - 1;
    let mut m = mask;
    if g.flip {
        m ^= full;
    }
    if g.reflect {
        let mut r = 0u64;
        for j in 0..n_sites {
            if m >> j & 1 == 1 {
                r |= 1 << ((n_sites - j) % n_sites);
            }
        }
        m = r;
    }
    if g.shift != 0 {
        m = ((m << g.shift) | (m >> (n_sites - g.shift))) & full;
    }
    m
}

fn character(g: Element, n_sites: usize, sec: SymmetrySector) -> C64 {
    let phase = 2.0 * PI * (sec.momentum * g.shift) as f64 / n_sites as f64;
    let mut chi = C64::from_polar(1.0, phase);
    if g.reflect {
        chi *= sec.reflection.map_or(1.0, Parity::sign);
    }
    if g.flip {
        chi *= sec.flip.map_or(1.0, Parity::sign);
    }
    chi
}

/// Orbit size if `mask` is the smallest element of its orbit and the sector
/// character is trivial on its stabiliser.
fn representative_orbit(
    mask: u64,
    n_sites: usize,
    elements: &[Element],
    sec: SymmetrySector,
) -> Option<usize> {
    let mut stabilizer_sum = C64::new(0.0, 0.0);
    let mut stabilizer = 0usize;
    for &g in elements {
        let image = apply(g, mask, n_sites);
        if image < mask {
            return None;
        }
        if image == mask {
            stabilizer += 1;
            stabilizer_sum += character(g, n_sites, sec);
        }
    }
    if (stabilizer_sum.re - stabilizer as f64).abs() > 1e-9 || stabilizer_sum.im.abs() > 1e-9 {
        return None;
    }
    Some(elements.len() / stabilizer)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn binomial(n: usize, k: usize) -> usize {
        (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
    }

    #[test]
    fn weight_enumeration() {
        let v: Vec<u64> = masks_with_weight(4, 2).collect();
        assert_eq!(v, vec![0b0011, 0b0101, 0b0110, 0b1001, 0b1010, 0b1100]);
        assert_eq!(masks_with_weight(5, 0).collect::<Vec<_>>(), vec![0]);
        assert_eq!(masks_with_weight(3, 3).collect::<Vec<_>>(), vec![0b111]);
    }

    #[test]
    fn momentum_dims_sum_to_binomial() {
        for n in [4usize, 6, 8, 10] {
            for m in 0..=n {
                let total: usize = (0..n)
                    .map(|k| SpinBasis::momentum(n, m, k).unwrap().dim())
                    .sum();
                assert_eq!(total, binomial(n, m), "n={n} m={m}");
            }
        }
    }

    #[test]
    fn fully_resolved_dims_sum_to_binomial() {
        let n = 8;
        let mut total = 0;
        for k in 0..n {
            let refl: &[Option<Parity>] = if k == 0 || k == n / 2 {
                &[Some(Parity::Even), Some(Parity::Odd)]
            } else {
                &[None]
            };
            for &reflection in refl {
                for flip in [Parity::Even, Parity::Odd] {
                    let sec = SymmetrySector {
                        momentum: k,
                        reflection,
                        flip: Some(flip),
                    };
                    total += SpinBasis::new(n, Some(4), Some(sec)).unwrap().dim();
                }
            }
        }
        assert_eq!(total, binomial(8, 4));
    }

    #[test]
    fn expanded_vectors_are_normalized() {
        let b = SpinBasis::momentum(8, 3, 2).unwrap();
        for i in 0..b.dim() {
            let norm: f64 = b.expand(i).iter().map(|(_, a)| a.norm_sqr()).sum();
            assert!((norm - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn representative_roundtrip() {
        let b = SpinBasis::momentum(8, 3, 1).unwrap();
        for i in 0..b.dim() {
            for (mask, amp) in b.expand(i) {
                let (rep, chi) = b.representative(mask).unwrap();
                assert_eq!(rep, i);
                // amplitude of |mask> in |rep^> is chi(g)^* / sqrt(orbit)
                let expect = chi.conj() / (b.orbit_size(i) as f64).sqrt();
                assert!((expect - amp).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn bad_sectors_rejected() {
        let sec = SymmetrySector {
            momentum: 1,
            reflection: Some(Parity::Even),
            flip: None,
        };
        assert!(SpinBasis::new(8, Some(4), Some(sec)).is_err());
        let sec = SymmetrySector {
            momentum: 0,
            reflection: None,
            flip: Some(Parity::Even),
        };
        assert!(SpinBasis::new(8, Some(3), Some(sec)).is_err());
        assert!(SpinBasis::full(21).is_err());
    }
}
