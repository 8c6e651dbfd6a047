//! Von Neumann entanglement entropy of full `2^N` state vectors.
//!
//! The reduced density matrix of a subset `A` is `Psi Psi^dagger`, where the
//! amplitudes are reshuffled into a `2^|A| x 2^|B|` matrix by bit-mask
//! deposit tables. When the state has definite global spin-flip parity, the
//! reduced density matrix commutes with the flip on `A`, and its spectrum is
//! assembled from two half-size blocks.

use faer::complex_native::c64;
use faer::{Mat, Side};

use super::basis::masks_with_weight;
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::geometry::monna_map;
use crate::C64;

/// Eigenvalues below this are dropped from the entropy sum.
pub const EIGENVALUE_CLIP: f64 = 1e-14;

/// Amplitudes over all `2^N` product states, indexed by bit mask.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumState {
    n_sites: usize,
    amplitudes: Vec<C64>,
}

impl QuantumState {
    pub fn new(n_sites: usize, amplitudes: Vec<C64>) -> Result<Self> {
        if n_sites == 0 || n_sites > 20 || amplitudes.len() != 1usize << n_sites {
            return Err(Error::InvalidParameter(format!(
                "state of {} amplitudes does not match {n_sites} sites",
                amplitudes.len()
            )));
        }
        let norm = amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidParameter(format!(
                "state norm {norm} is not 1"
            )));
        }
        Ok(Self {
            n_sites,
            amplitudes,
        })
    }

    /// Every spin along `+x`.
    pub fn x_polarized(n_sites: usize) -> Result<Self> {
        let dim = 1usize << n_sites;
        let a = C64::new((dim as f64).sqrt().recip(), 0.0);
        Self::new(n_sites, vec![a; dim])
    }

    /// `(|0...0> + |1...1>) / sqrt 2`.
    pub fn ghz(n_sites: usize) -> Result<Self> {
        let dim = 1usize << n_sites;
        let mut amps = vec![C64::new(0.0, 0.0); dim];
        amps[0] = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        amps[dim - 1] = amps[0];
        Self::new(n_sites, amps)
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes
            .iter()
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// `Some(+1)` or `Some(-1)` if `psi(~x) = +-psi(x)` for every mask.
    pub fn flip_parity(&self, tol: f64) -> Option<f64> {
        let full = self.amplitudes.len() - 1;
        'sign: for sign in [1.0, -1.0] {
            for (x, &a) in self.amplitudes.iter().enumerate() {
                if (self.amplitudes[full ^ x] - a * sign).norm() > tol {
                    continue 'sign;
                }
            }
            return Some(sign);
        }
        None
    }
}

/// How a subsystem was chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PartitionKind {
    /// Blocks of consecutive sites (cyclically).
    Archimedean,
    /// Blocks consecutive in Monna (tree-leaf) order, i.e. unions of subtrees.
    TwoAdic,
    /// Any subset.
    Arbitrary,
}

impl std::fmt::Display for PartitionKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            PartitionKind::Archimedean => "archimedean",
            PartitionKind::TwoAdic => "2adic",
            PartitionKind::Arbitrary => "min_all",
        })
    }
}

impl std::str::FromStr for PartitionKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "archimedean" | "contiguous" | "physical" => Ok(PartitionKind::Archimedean),
            "2adic" | "two-adic" | "two_adic" | "monna" | "subtree" => Ok(PartitionKind::TwoAdic),
            "min_all" | "arbitrary" | "all" | "min" => Ok(PartitionKind::Arbitrary),
            other => Err(Error::Parse(format!("unknown partition kind `{other}`"))),
        }
    }
}

/// A subsystem `A` given as a bit mask of its sites.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Bipartition {
    pub subset: u64,
    pub kind: PartitionKind,
}

impl Bipartition {
    pub fn new(n_sites: usize, subset: u64, kind: PartitionKind) -> Result<Self> {
        check_size(n_sites, subset.count_ones() as usize)?;
        if n_sites < 64 && subset >> n_sites != 0 {
            return Err(Error::InvalidParameter(
                "subset contains sites beyond N".into(),
            ));
        }
        Ok(Self { subset, kind })
    }

    pub fn sites(&self) -> Vec<usize> {
        (0..64).filter(|&j| self.subset >> j & 1 == 1).collect()
    }
}

fn check_size(n_sites: usize, size: usize) -> Result<()> {
    if size == 0 || size >= n_sites {
        return Err(Error::InvalidParameter(format!(
            "partition size must be in 1..{n_sites}, got {size}"
        )));
    }
    Ok(())
}

/// All blocks of `size` consecutive sites, wrapping around the ring when `cyclic`.
pub fn contiguous_partitions(n_sites: usize, size: usize, cyclic: bool) -> Result<Vec<u64>> {
    check_size(n_sites, size)?;
    let starts = if cyclic { n_sites } else { n_sites - size + 1 };
    let mut out: Vec<u64> = (0..starts)
        .map(|start| (0..size).fold(0u64, |m, k| m | 1 << ((start + k) % n_sites)))
        .collect();
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

/// All cyclic blocks of `size` sites consecutive in Monna order.
pub fn two_adic_partitions(n_sites: usize, size: usize) -> Result<Vec<u64>> {
    check_size(n_sites, size)?;
    // leaf position q holds the site whose Monna image is q
    let mut site_at = vec![0usize; n_sites];
    for i in 0..n_sites {
        site_at[monna_map(n_sites, i)?] = i;
    }
    let mut out: Vec<u64> = (0..n_sites)
        .map(|start| (0..size).fold(0u64, |m, k| m | 1 << site_at[(start + k) % n_sites]))
        .collect();
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

fn deposit_table(mask: u64, n_sites: usize) -> Vec<usize> {
    let bits: Vec<usize> = (0..n_sites).filter(|&j| mask >> j & 1 == 1).collect();
    (0..1usize << bits.len())
        .map(|a| {
            bits.iter()
                .enumerate()
                .filter(|(k, _)| a >> k & 1 == 1)
                .fold(0usize, |x, (_, &j)| x | 1 << j)
        })
        .collect()
}

fn entropy_of(eigenvalues: impl IntoIterator<Item = f64>) -> f64 {
    eigenvalues
        .into_iter()
        .filter(|&p| p > EIGENVALUE_CLIP)
        .map(|p| -p * p.ln())
        .sum::<f64>()
        .max(0.0)
}

fn gram_eigenvalues(psi: &Mat<c64>) -> Vec<f64> {
    let rho = psi * psi.adjoint();
    rho.selfadjoint_eigenvalues(Side::Lower)
}

/// Entanglement entropy of the sites in `subset`, by the general route.
pub fn entanglement_entropy(state: &QuantumState, subset: u64) -> Result<f64> {
    let n = state.n_sites();
    let size = subset.count_ones() as usize;
    check_size(n, size)?;
    let full = (1u64 << n) - 1;
    // the smaller side keeps the Gram matrix small; the spectra agree
    let a_mask = if 2 * size <= n { subset } else { full ^ subset };
    let dep_a = deposit_table(a_mask, n);
    let dep_b = deposit_table(full ^ a_mask, n);
    let amps = state.amplitudes();
    let psi = Mat::<c64>::from_fn(dep_a.len(), dep_b.len(), |a, b| {
        let z = amps[dep_a[a] | dep_b[b]];
        c64::new(z.re, z.im)
    });
    Ok(entropy_of(gram_eigenvalues(&psi)))
}

/// Entropy using the flip-parity block structure. The state must have definite
/// global flip parity, see [`QuantumState::flip_parity`].
pub fn entanglement_entropy_flip_symmetric(state: &QuantumState, subset: u64) -> Result<f64> {
    let n = state.n_sites();
    let size = subset.count_ones() as usize;
    check_size(n, size)?;
    let full = (1u64 << n) - 1;
    let a_mask = if 2 * size <= n { subset } else { full ^ subset };
    let dep_a = deposit_table(a_mask, n);
    let dep_b = deposit_table(full ^ a_mask, n);
    let half = dep_a.len() / 2;
    let top = dep_a.len() - 1;
    let amps = state.amplitudes();
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let mut eigenvalues = Vec::with_capacity(dep_a.len());
    for sign in [1.0, -1.0] {
        // a in the half with the highest A-bit clear, paired with its complement
        let psi = Mat::<c64>::from_fn(half, dep_b.len(), |a, b| {
            let z = (amps[dep_a[a] | dep_b[b]] + amps[dep_a[top ^ a] | dep_b[b]] * sign) * r;
            c64::new(z.re, z.im)
        });
        eigenvalues.extend(gram_eigenvalues(&psi));
    }
    Ok(entropy_of(eigenvalues))
}

/// Minimum entropy over all subsets of `size` sites, with the achieving subset.
///
/// At `size = N/2` only subsets containing site 0 are visited, since a subset
/// and its complement have equal entropy.
pub fn min_entanglement_over_partitions(
    state: &QuantumState,
    size: usize,
    exec: Execution,
) -> Result<(f64, u64)> {
    let n = state.n_sites();
    check_size(n, size)?;
    let mut subsets: Vec<u64> = masks_with_weight(n, size).collect();
    if 2 * size == n {
        subsets.retain(|m| m & 1 == 1);
    }
    min_over_subsets(state, &subsets, exec)
}

/// Minimum entropy over an explicit list of subsets.
pub fn min_over_subsets(
    state: &QuantumState,
    subsets: &[u64],
    exec: Execution,
) -> Result<(f64, u64)> {
    if subsets.is_empty() {
        return Err(Error::InvalidParameter("no subsets to scan".into()));
    }
    let symmetric = state.flip_parity(1e-12).is_some();
    let entropies = exec.map_slice(subsets, |&m| {
        if symmetric {
            entanglement_entropy_flip_symmetric(state, m)
        } else {
            entanglement_entropy(state, m)
        }
    });
    let mut best = (f64::INFINITY, 0u64);
    for (&m, e) in subsets.iter().zip(entropies) {
        let e = e?;
        if e < best.0 {
            best = (e, m);
        }
    }
    Ok(best)
}

/// Subsets of the given kind and size; `Arbitrary` yields all of them (one of
/// each complementary pair at half size). Archimedean blocks wrap when `cyclic`.
pub fn partitions_of_kind(
    n_sites: usize,
    size: usize,
    kind: PartitionKind,
    cyclic: bool,
) -> Result<Vec<u64>> {
    match kind {
        PartitionKind::Archimedean => contiguous_partitions(n_sites, size, cyclic),
        PartitionKind::TwoAdic => two_adic_partitions(n_sites, size),
        PartitionKind::Arbitrary => {
            check_size(n_sites, size)?;
            let mut v: Vec<u64> = masks_with_weight(n_sites, size).collect();
            if 2 * size == n_sites {
                v.retain(|m| m & 1 == 1);
            }
            Ok(v)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn random_state(n: usize, seed: u64) -> QuantumState {
        let mut x = seed;
        let mut next = || {
            x ^= x << 13;
            x ^= x >> 7;
            x ^= x << 17;
            (x >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        let amps: Vec<C64> = (0..1usize << n).map(|_| C64::new(next(), next())).collect();
        let norm = amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        QuantumState::new(n, amps.into_iter().map(|z| z / norm).collect()).unwrap()
    }

    #[test]
    fn product_state_has_zero_entropy() {
        let s = QuantumState::x_polarized(6).unwrap();
        for m in [0b1u64, 0b101, 0b111000] {
            assert!(entanglement_entropy(&s, m).unwrap().abs() < 1e-12);
        }
    }

    #[test]
    fn ghz_has_log_two() {
        let s = QuantumState::ghz(6).unwrap();
        for m in [0b1u64, 0b11, 0b10101, 0b111110] {
            let e = entanglement_entropy(&s, m).unwrap();
            assert!((e - 2f64.ln()).abs() < 1e-12);
        }
    }

    #[test]
    fn complement_symmetry() {
        let s = random_state(7, 42);
        for m in [0b1u64, 0b110, 0b1010101, 0b0110011] {
            let a = entanglement_entropy(&s, m).unwrap();
            let b = entanglement_entropy(&s, 0b1111111 ^ m).unwrap();
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn flip_route_agrees() {
        let raw = random_state(8, 7);
        let full = 255usize;
        let amps: Vec<C64> = (0..256)
            .map(|x| (raw.amplitudes()[x] + raw.amplitudes()[full ^ x]) * 0.5)
            .collect();
        let norm = amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let s = QuantumState::new(8, amps.into_iter().map(|z| z / norm).collect()).unwrap();
        assert_eq!(s.flip_parity(1e-14), Some(1.0));
        for m in [0b1u64, 0b11, 0b1111, 0b10110100, 0b11111110] {
            let a = entanglement_entropy(&s, m).unwrap();
            let b = entanglement_entropy_flip_symmetric(&s, m).unwrap();
            assert!((a - b).abs() < 1e-12, "{m:b}: {a} vs {b}");
        }
    }

    #[test]
    fn partition_families() {
        let c = contiguous_partitions(8, 4, true).unwrap();
        assert_eq!(c.len(), 8);
        assert_eq!(contiguous_partitions(8, 4, false).unwrap().len(), 5);
        assert!(c.contains(&0b00001111));
        let t = two_adic_partitions(8, 4).unwrap();
        // even sites form the first half of the tree leaves
        assert!(t.contains(&0b01010101));
        assert!(t.contains(&0b10101010));
        assert_eq!(
            partitions_of_kind(8, 4, PartitionKind::Arbitrary, true)
                .unwrap()
                .len(),
            35
        );
        assert!(contiguous_partitions(8, 8, true).is_err());
        assert!(contiguous_partitions(8, 0, true).is_err());
    }
}
