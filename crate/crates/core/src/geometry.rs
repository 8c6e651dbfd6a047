//! Coupling graph and the distance notions it carries.
//!
//! Sites `i` and `j` interact when their separation is a power of two,
//! `|i - j| = 2^l`, with strength `J_s * 2^(l s)`. The prefactor `J_s` keeps the
//! largest coupling equal to `j0` for every `s`.
//!
//! Besides the ordinary (Archimedean) separation, three other distances are
//! exposed: the 2-adic norm `|i - j|_2`, the edge count between leaves of the
//! binary tree whose leaves are ordered by the Monna (bit-reversal) map, and
//! the hop count on the coupling graph itself.

use std::collections::VecDeque;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Boundary {
    /// Ring of `N` sites with minimal-image separation; `N` must be a power of two.
    Periodic,
    /// Chain with literal separation `|i - j|`.
    Open,
}

impl std::fmt::Display for Boundary {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Boundary::Periodic => write!(f, "periodic"),
            Boundary::Open => write!(f, "open"),
        }
    }
}

impl std::str::FromStr for Boundary {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "periodic" | "pbc" => Ok(Boundary::Periodic),
            "open" | "obc" => Ok(Boundary::Open),
            other => Err(Error::Parse(format!("unknown boundary `{other}`"))),
        }
    }
}

/// The power-of-two coupling model on `n_sites` sites.
///
/// Immutable after construction; adjacency lists are built once.
#[derive(Debug, Clone)]
pub struct CouplingModel {
    n_sites: usize,
    s: f64,
    j0: f64,
    boundary: Boundary,
    /// Coupling at separation `2^l`, indexed by `l`.
    level_strengths: Vec<f64>,
    /// Per site: `(neighbour, hopping amplitude)`, neighbours distinct and sorted.
    neighbors: Vec<Vec<(usize, f64)>>,
}

impl CouplingModel {
    pub fn new(n_sites: usize, s: f64, j0: f64, boundary: Boundary) -> Result<Self> {
        if n_sites < 4 {
            return Err(Error::InvalidModel(format!(
                "n_sites must be at least 4, got {n_sites}"
            )));
        }
        if boundary == Boundary::Periodic && !n_sites.is_power_of_two() {
            return Err(Error::InvalidModel(format!(
                "periodic boundary requires a power-of-two size, got {n_sites}"
            )));
        }
        if !s.is_finite() {
            return Err(Error::InvalidModel("exponent s must be finite".into()));
        }
        if !(j0.is_finite() && j0 > 0.0) {
            return Err(Error::InvalidModel(format!(
                "j0 must be positive, got {j0}"
            )));
        }
        let max_sep = match boundary {
            Boundary::Periodic => n_sites / 2,
            Boundary::Open => n_sites - 1,
        };
        // largest l with 2^l <= max_sep
        let top_level = (usize::BITS - 1 - max_sep.leading_zeros()) as usize;
        let scale = if s <= 0.0 {
            j0
        } else {
            j0 * 2f64.powf(-(top_level as f64) * s)
        };
        let level_strengths: Vec<f64> = (0..=top_level)
            .map(|l| scale * 2f64.powf(l as f64 * s))
            .collect();

        let mut neighbors = Vec::with_capacity(n_sites);
        for i in 0..n_sites {
            let mut row: Vec<(usize, f64)> = Vec::new();
            for (l, &strength) in level_strengths.iter().enumerate() {
                let d = 1usize << l;
                for &sign in &[1i64, -1] {
                    let target = i as i64 + sign * d as i64;
                    let j = match boundary {
                        Boundary::Periodic => target.rem_euclid(n_sites as i64) as usize,
                        Boundary::Open => {
                            if target < 0 || target >= n_sites as i64 {
                                continue;
                            }
                            target as usize
                        }
                    };
                    // The antipodal partner at N/2 is reached by both windings.
                    match row.iter_mut().find(|(k, _)| *k == j) {
                        Some(entry) => entry.1 += strength,
                        None => row.push((j, strength)),
                    }
                }
            }
            row.sort_by_key(|&(j, _)| j);
            neighbors.push(row);
        }

        Ok(Self {
            n_sites,
            s,
            j0,
            boundary,
            level_strengths,
            neighbors,
        })
    }

    /// Periodic model with `j0 = 1`.
    pub fn periodic(n_sites: usize, s: f64) -> Result<Self> {
        Self::new(n_sites, s, 1.0, Boundary::Periodic)
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn j0(&self) -> f64 {
        self.j0
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    /// The prefactor `J_s`.
    pub fn scale(&self) -> f64 {
        self.level_strengths[0]
    }

    /// Coupling strength at separation `2^l` for `l = 0..`.
    pub fn level_strengths(&self) -> &[f64] {
        &self.level_strengths
    }

    /// `log2` of the number of sites (periodic models only are exact powers).
    pub fn depth(&self) -> u32 {
        self.n_sites.next_power_of_two().trailing_zeros()
    }

    fn check(&self, i: usize) -> Result<()> {
        if i >= self.n_sites {
            Err(Error::IndexOutOfRange {
                index: i,
                n_sites: self.n_sites,
            })
        } else {
            Ok(())
        }
    }

    /// Boundary-respecting separation: minimal image for periodic, literal for open.
    pub fn separation(&self, i: usize, j: usize) -> Result<usize> {
        self.check(i)?;
        self.check(j)?;
        let d = i.abs_diff(j);
        Ok(match self.boundary {
            Boundary::Periodic => d.min(self.n_sites - d),
            Boundary::Open => d,
        })
    }

    /// `J(i - j)`: `J_s 2^(l s)` when the separation is `2^l`, else zero.
    pub fn coupling(&self, i: usize, j: usize) -> Result<f64> {
        let d = self.separation(i, j)?;
        if d == 0 || !d.is_power_of_two() {
            return Ok(0.0);
        }
        Ok(self.level_strengths[d.trailing_zeros() as usize])
    }

    /// Single-magnon hopping amplitude between `i` and `j`.
    ///
    /// Equal to [`coupling`](Self::coupling) except for the antipodal pair of a
    /// periodic ring, which is reached through both windings and so carries
    /// twice the coupling. This is the convention under which the one-magnon
    /// spectrum is exactly `E(k) = 2 J_s sum_l 2^(l s) cos(2^l k)`.
    pub fn hopping(&self, i: usize, j: usize) -> Result<f64> {
        self.check(i)?;
        self.check(j)?;
        Ok(self.neighbors[i]
            .iter()
            .find(|(k, _)| *k == j)
            .map_or(0.0, |&(_, a)| a))
    }

    /// Neighbours of `i` with hopping amplitudes.
    pub fn neighbors(&self, i: usize) -> &[(usize, f64)] {
        &self.neighbors[i]
    }

    /// Every unordered bond `(i, j, amplitude)` with `i < j`.
    pub fn bonds(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::new();
        for (i, row) in self.neighbors.iter().enumerate() {
            for &(j, a) in row {
                if i < j {
                    out.push((i, j, a));
                }
            }
        }
        out
    }

    /// Hop counts from `source` to every site by breadth-first search.
    pub fn graph_distances_from(&self, source: usize) -> Result<Vec<usize>> {
        self.check(source)?;
        let mut dist = vec![usize::MAX; self.n_sites];
        let mut queue = VecDeque::new();
        dist[source] = 0;
        queue.push_back(source);
        while let Some(u) = queue.pop_front() {
            for &(v, _) in &self.neighbors[u] {
                if dist[v] == usize::MAX {
                    dist[v] = dist[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        Ok(dist)
    }

    /// Length of the shortest path between `i` and `j` on the coupling graph.
    pub fn graph_distance(&self, i: usize, j: usize) -> Result<usize> {
        self.check(j)?;
        Ok(self.graph_distances_from(i)?[j])
    }

    /// All four distances between a pair of sites.
    pub fn site_distance(&self, i: usize, j: usize) -> Result<SiteDistance> {
        let archimedean = self.separation(i, j)?;
        let graph = self.graph_distance(i, j)?;
        let (two_adic, tree) = if i == j {
            (None, None)
        } else {
            let norm = two_adic_norm(self.n_sites, i, j)?;
            let tree = match self.boundary {
                Boundary::Periodic => Some(tree_distance(self.n_sites, i, j)?),
                Boundary::Open => None,
            };
            (Some(norm), tree)
        };
        Ok(SiteDistance {
            archimedean,
            two_adic,
            tree,
            graph,
        })
    }
}

/// Distances between two sites.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SiteDistance {
    pub archimedean: usize,
    /// `|i - j|_2`; `None` for coincident sites.
    pub two_adic: Option<f64>,
    /// Leaf-to-leaf edge count on the Monna-ordered tree (periodic rings only).
    pub tree: Option<usize>,
    pub graph: usize,
}

fn log2_exact(n_sites: usize) -> Result<u32> {
    if n_sites == 0 || !n_sites.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(n_sites));
    }
    Ok(n_sites.trailing_zeros())
}

/// Reverse the `log2(n_sites)` low bits of `i`.
pub fn monna_map(n_sites: usize, i: usize) -> Result<usize> {
    let bits = log2_exact(n_sites)?;
    if i >= n_sites {
        return Err(Error::IndexOutOfRange { index: i, n_sites });
    }
    if bits == 0 {
        return Ok(0);
    }
    Ok(i.reverse_bits() >> (usize::BITS - bits))
}

/// Exponent `v` of the largest power of two dividing a nonzero integer.
pub fn two_adic_valuation(x: i64) -> Result<u32> {
    if x == 0 {
        return Err(Error::Degenerate("2-adic valuation of zero".into()));
    }
    Ok(x.trailing_zeros())
}

/// `|i - j|_2 = 2^(-v(i - j))`. Exact as an `f64` since it is a power of two.
pub fn two_adic_norm(n_sites: usize, i: usize, j: usize) -> Result<f64> {
    for &k in &[i, j] {
        if k >= n_sites {
            return Err(Error::IndexOutOfRange { index: k, n_sites });
        }
    }
    if i == j {
        return Err(Error::Degenerate(format!(
            "2-adic norm of zero separation (i = j = {i})"
        )));
    }
    let v = two_adic_valuation(i as i64 - j as i64)?;
    Ok(2f64.powi(-(v as i32)))
}

/// Edge count between leaves `i` and `j` of the depth-`log2 N` binary tree whose
/// leaves, read left to right, are the sites in increasing Monna order.
pub fn tree_distance(n_sites: usize, i: usize, j: usize) -> Result<usize> {
    let pi = monna_map(n_sites, i)?;
    let pj = monna_map(n_sites, j)?;
    // leaves share the path from the root down to the first differing bit
    let diverge = (usize::BITS - (pi ^ pj).leading_zeros()) as usize;
    Ok(2 * diverge)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coupling_examples() {
        let m = CouplingModel::periodic(8, 0.0).unwrap();
        assert_eq!(m.coupling(0, 1).unwrap(), 1.0);
        assert_eq!(m.coupling(0, 3).unwrap(), 0.0);
        assert_eq!(m.coupling(2, 2).unwrap(), 0.0);
        let m2 = CouplingModel::periodic(8, 2.0).unwrap();
        assert_eq!(m2.coupling(0, 4).unwrap(), 1.0);
        assert_eq!(m2.coupling(0, 1).unwrap(), 1.0 / 16.0);
    }

    #[test]
    fn normalization_by_brute_force_max() {
        for k in -12..=12 {
            let s = k as f64 * 0.25;
            for &n in &[8usize, 16, 64] {
                let m = CouplingModel::periodic(n, s).unwrap();
                let max = (0..n)
                    .flat_map(|i| (0..n).map(move |j| (i, j)))
                    .map(|(i, j)| m.coupling(i, j).unwrap())
                    .fold(0.0, f64::max);
                assert!((max - 1.0).abs() < 1e-12, "s={s} n={n} max={max}");
            }
        }
    }

    #[test]
    fn antipodal_hopping_is_doubled() {
        let m = CouplingModel::periodic(8, 0.0).unwrap();
        assert_eq!(m.hopping(0, 4).unwrap(), 2.0);
        assert_eq!(m.hopping(0, 1).unwrap(), 1.0);
        assert_eq!(m.neighbors(0).len(), 5);
        let open = CouplingModel::new(8, 0.0, 1.0, Boundary::Open).unwrap();
        assert_eq!(open.hopping(0, 4).unwrap(), 1.0);
        assert_eq!(open.hopping(0, 7).unwrap(), 0.0);
    }

    #[test]
    fn invalid_models_are_rejected() {
        assert!(CouplingModel::periodic(12, 0.0).is_err());
        assert!(CouplingModel::periodic(2, 0.0).is_err());
        assert!(CouplingModel::new(12, 0.0, 1.0, Boundary::Open).is_ok());
        assert!(CouplingModel::new(8, 0.0, -1.0, Boundary::Periodic).is_err());
        let m = CouplingModel::periodic(8, 0.0).unwrap();
        assert!(matches!(
            m.coupling(0, 8),
            Err(Error::IndexOutOfRange { index: 8, .. })
        ));
    }

    #[test]
    fn monna_examples() {
        assert_eq!(monna_map(8, 1).unwrap(), 4);
        assert_eq!(monna_map(8, 0).unwrap(), 0);
        // brute-force reversal of 011
        let brute = |i: usize| -> usize { (0..3).map(|b| ((i >> b) & 1) << (2 - b)).sum() };
        for i in 0..8 {
            assert_eq!(monna_map(8, i).unwrap(), brute(i));
        }
        assert_eq!(monna_map(8, 3).unwrap(), 6);
        assert!(matches!(monna_map(12, 1), Err(Error::NotPowerOfTwo(12))));
    }

    #[test]
    fn two_adic_examples() {
        assert_eq!(two_adic_norm(16, 4, 0).unwrap(), 0.25);
        assert_eq!(two_adic_norm(16, 3, 0).unwrap(), 1.0);
        assert!(two_adic_norm(8, 2, 2).is_err());
        // |x|_2 = 2^(d_tree/2) / N
        assert_eq!(tree_distance(8, 0, 4).unwrap(), 2);
        let lhs = two_adic_norm(8, 0, 4).unwrap();
        assert_eq!(lhs, 2f64.powf(2.0 / 2.0) / 8.0);
    }

    #[test]
    fn graph_distance_examples() {
        let m = CouplingModel::periodic(8, 0.0).unwrap();
        assert_eq!(m.graph_distance(0, 3).unwrap(), 2);
        assert_eq!(m.graph_distance(0, 7).unwrap(), 1);
        let max = (0..8)
            .map(|i| {
                m.graph_distances_from(i)
                    .unwrap()
                    .into_iter()
                    .max()
                    .unwrap()
            })
            .max()
            .unwrap();
        assert_eq!(max, 2);
    }

    #[test]
    fn site_distance_open_has_no_tree() {
        let m = CouplingModel::new(12, 0.0, 1.0, Boundary::Open).unwrap();
        let d = m.site_distance(0, 11).unwrap();
        assert_eq!(d.archimedean, 11);
        assert_eq!(d.graph, 3);
        assert_eq!(d.tree, None);
        assert_eq!(d.two_adic, Some(1.0));
    }
}
