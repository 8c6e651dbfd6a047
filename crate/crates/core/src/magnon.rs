//! Exact single-magnon dynamics.
//!
//! In the one-excitation sector the Hamiltonian is a circulant hopping matrix,
//! diagonalised by plane waves with energies
//! `E(k) = 2 J_s sum_{l=0}^{log2(N/2)} 2^(l s) cos(2^l k)`. An excitation
//! released at site `i` therefore has amplitude
//! `psi_j(t) = (1/N) sum_k exp(i k (j - i)) exp(-i E(k) t)`, evaluated here
//! with one inverse FFT per output time.

use std::f64::consts::PI;
use std::sync::Arc;

use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::geometry::{monna_map, Boundary, CouplingModel};
use crate::C64;

/// Default sampling step for occupation grids (units of `1/j0`).
pub const DEFAULT_DT: f64 = 0.02;
/// Default time horizon for occupation grids (units of `1/j0`).
pub const DEFAULT_HORIZON: f64 = 50.0;

/// `E(k)` on the grid `k = 2 pi m / N`.
#[derive(Debug, Clone, PartialEq)]
pub struct DispersionTable {
    pub energies: Vec<f64>,
}

impl DispersionTable {
    pub fn n_sites(&self) -> usize {
        self.energies.len()
    }

    pub fn wavenumber(&self, m: usize) -> f64 {
        2.0 * PI * m as f64 / self.n_sites() as f64
    }

    /// Energies relabelled by Monna-mapped wavenumber: entry `M(m)` holds `E(k_m)`.
    pub fn monna_ordered(&self) -> Vec<f64> {
        let n = self.n_sites();
        let mut out = vec![0.0; n];
        for (m, &e) in self.energies.iter().enumerate() {
            out[monna_map(n, m).expect("dispersion size is a power of two")] = e;
        }
        out
    }
}

/// Evaluate the dispersion relation at an arbitrary wavenumber `k`.
pub fn dispersion_at(model: &CouplingModel, k: f64) -> f64 {
    2.0 * model
        .level_strengths()
        .iter()
        .enumerate()
        .map(|(l, &j)| j * ((1u64 << l) as f64 * k).cos())
        .sum::<f64>()
}

/// Dispersion table of a periodic model.
pub fn dispersion(model: &CouplingModel) -> Result<DispersionTable> {
    if model.boundary() != Boundary::Periodic {
        return Err(Error::Unsupported(
            "plane-wave dispersion requires periodic boundary".into(),
        ));
    }
    let n = model.n_sites();
    let energies = (0..n)
        .map(|m| dispersion_at(model, 2.0 * PI * m as f64 / n as f64))
        .collect();
    Ok(DispersionTable { energies })
}

/// Bit-reversed wavenumber index, `N k_M / 2 pi = M(N k / 2 pi)`.
pub fn monna_wavenumber(n_sites: usize, k_index: usize) -> Result<usize> {
    monna_map(n_sites, k_index)
}

/// `sum_m |v_{m+1} - v_m|`.
pub fn total_variation(values: &[f64]) -> f64 {
    values.windows(2).map(|w| (w[1] - w[0]).abs()).sum()
}

/// Amplitudes of one magnon at a given time.
#[derive(Debug, Clone)]
pub struct MagnonField {
    pub amplitudes: Vec<C64>,
    pub time: f64,
    pub source_site: usize,
}

impl MagnonField {
    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn occupations(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }
}

/// Propagates an excitation released at `source` under a fixed dispersion.
#[derive(Clone)]
pub struct MagnonPropagator {
    source: usize,
    energies: Vec<f64>,
    fft: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for MagnonPropagator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("MagnonPropagator")
            .field("source", &self.source)
            .field("n_sites", &self.energies.len())
            .finish()
    }
}

impl MagnonPropagator {
    pub fn new(model: &CouplingModel, source: usize) -> Result<Self> {
        let table = dispersion(model)?;
        let n = table.n_sites();
        if source >= n {
            return Err(Error::IndexOutOfRange {
                index: source,
                n_sites: n,
            });
        }
        let fft = FftPlanner::new().plan_fft_inverse(n);
        Ok(Self {
            source,
            energies: table.energies,
            fft,
        })
    }

    pub fn n_sites(&self) -> usize {
        self.energies.len()
    }

    pub fn source(&self) -> usize {
        self.source
    }

    pub fn field_at(&self, t: f64) -> MagnonField {
        let n = self.n_sites();
        let inv_n = 1.0 / n as f64;
        let mut buf: Vec<C64> = self
            .energies
            .iter()
            .enumerate()
            .map(|(m, &e)| {
                let phase = -e * t - 2.0 * PI * (m * self.source % n) as f64 * inv_n;
                C64::from_polar(inv_n, phase)
            })
            .collect();
        self.fft.process(&mut buf);
        MagnonField {
            amplitudes: buf,
            time: t,
            source_site: self.source,
        }
    }

    /// `|psi_j(t)|^2` by direct summation; `O(N)` per call.
    pub fn occupation_of(&self, j: usize, t: f64) -> f64 {
        let n = self.n_sites();
        let rel = (j + n - self.source) % n;
        let mut acc = C64::new(0.0, 0.0);
        for (m, &e) in self.energies.iter().enumerate() {
            let phase = 2.0 * PI * ((m * rel) % n) as f64 / n as f64 - e * t;
            acc += C64::from_polar(1.0, phase);
        }
        (acc / n as f64).norm_sqr()
    }
}

/// `<n_j(t)>` sampled on a time grid; rows are times, columns sites.
#[derive(Debug, Clone, PartialEq)]
pub struct OccupancyMatrix {
    pub times: Vec<f64>,
    pub n_sites: usize,
    pub source_site: usize,
    data: Vec<f64>,
}

impl OccupancyMatrix {
    pub fn row(&self, time_index: usize) -> &[f64] {
        &self.data[time_index * self.n_sites..(time_index + 1) * self.n_sites]
    }

    pub fn get(&self, time_index: usize, site: usize) -> f64 {
        self.data[time_index * self.n_sites + site]
    }

    pub fn column(&self, site: usize) -> Vec<f64> {
        (0..self.times.len()).map(|t| self.get(t, site)).collect()
    }

    /// Reorder columns so that column `M(j)` holds site `j`.
    pub fn monna_ordered(&self) -> Result<OccupancyMatrix> {
        let n = self.n_sites;
        let perm: Vec<usize> = (0..n).map(|j| monna_map(n, j)).collect::<Result<_>>()?;
        let mut data = vec![0.0; self.data.len()];
        for t in 0..self.times.len() {
            for (j, &p) in perm.iter().enumerate() {
                data[t * n + p] = self.data[t * n + j];
            }
        }
        Ok(OccupancyMatrix {
            times: self.times.clone(),
            n_sites: n,
            source_site: perm[self.source_site],
            data,
        })
    }
}

/// Uniform grid `0, dt, 2 dt, ...` up to and including `tmax` (within rounding).
pub fn time_grid(tmax: f64, dt: f64) -> Result<Vec<f64>> {
    if !(tmax >= 0.0 && tmax.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "tmax must be >= 0, got {tmax}"
        )));
    }
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidParameter(format!("dt must be > 0, got {dt}")));
    }
    let steps = (tmax / dt + 1e-9).floor() as usize;
    Ok((0..=steps).map(|k| k as f64 * dt).collect())
}

/// Occupation profile of a single excitation released at `source`.
pub fn evolve_magnon(
    model: &CouplingModel,
    source: usize,
    times: &[f64],
    exec: Execution,
) -> Result<OccupancyMatrix> {
    if let Some(t) = times.iter().find(|t| !(**t >= 0.0)) {
        return Err(Error::InvalidParameter(format!("negative time {t}")));
    }
    let prop = MagnonPropagator::new(model, source)?;
    let rows = exec.map_slice(times, |&t| prop.field_at(t).occupations());
    Ok(OccupancyMatrix {
        times: times.to_vec(),
        n_sites: prop.n_sites(),
        source_site: source,
        data: rows.concat(),
    })
}

/// First time a site's occupation reaches the threshold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Crossing {
    pub time: f64,
    /// Grid samples bracketing the crossing.
    pub bracket: (f64, f64),
}

/// Per-site threshold times `t_eps`; `None` marks sites never reaching `epsilon`.
#[derive(Debug, Clone, PartialEq)]
pub struct Thresholds {
    pub epsilon: f64,
    pub source_site: usize,
    pub crossings: Vec<Option<Crossing>>,
}

impl Thresholds {
    pub fn time(&self, site: usize) -> Option<f64> {
        self.crossings[site].map(|c| c.time)
    }

    pub fn unreached(&self) -> Vec<usize> {
        (0..self.crossings.len())
            .filter(|&j| self.crossings[j].is_none())
            .collect()
    }

    /// Replace interpolated crossing times with bisection on the exact
    /// propagator inside each bracket.
    pub fn refine(&self, prop: &MagnonPropagator, tol: f64) -> Thresholds {
        let crossings = self
            .crossings
            .iter()
            .enumerate()
            .map(|(j, c)| {
                c.map(|c| {
                    let (mut lo, mut hi) = c.bracket;
                    if hi <= lo {
                        return c;
                    }
                    while hi - lo > tol {
                        let mid = 0.5 * (lo + hi);
                        if prop.occupation_of(j, mid) >= self.epsilon {
                            hi = mid;
                        } else {
                            lo = mid;
                        }
                    }
                    Crossing {
                        time: 0.5 * (lo + hi),
                        bracket: c.bracket,
                    }
                })
            })
            .collect();
        Thresholds {
            epsilon: self.epsilon,
            source_site: self.source_site,
            crossings,
        }
    }
}

/// Locate the first crossing `<n_j(t)> >= epsilon` for each site.
///
/// Between the bracketing samples the log-occupation is interpolated linearly
/// in time; if the earlier sample is zero (or below `1e-300`) the occupation
/// itself is interpolated instead.
pub fn threshold_times(occ: &OccupancyMatrix, epsilon: f64) -> Result<Thresholds> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "threshold must lie in (0, 1), got {epsilon}"
        )));
    }
    let crossings = (0..occ.n_sites)
        .map(|j| {
            let first = (0..occ.times.len()).find(|&k| occ.get(k, j) >= epsilon)?;
            if first == 0 {
                let t0 = occ.times[0];
                return Some(Crossing {
                    time: t0,
                    bracket: (t0, t0),
                });
            }
            let (t0, t1) = (occ.times[first - 1], occ.times[first]);
            let (n0, n1) = (occ.get(first - 1, j), occ.get(first, j));
            let frac = if n0 > 1e-300 {
                (epsilon.ln() - n0.ln()) / (n1.ln() - n0.ln())
            } else {
                (epsilon - n0) / (n1 - n0)
            };
            Some(Crossing {
                time: t0 + frac.clamp(0.0, 1.0) * (t1 - t0),
                bracket: (t0, t1),
            })
        })
        .collect();
    Ok(Thresholds {
        epsilon,
        source_site: occ.source_site,
        crossings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dispersion_examples() {
        let m = CouplingModel::periodic(8, 0.0).unwrap();
        let table = dispersion(&m).unwrap();
        assert!((table.energies[0] - 6.0).abs() < 1e-12);
        assert!((table.energies[4] - 2.0).abs() < 1e-12);
        for k in 1..8 {
            assert!((table.energies[k] - table.energies[8 - k]).abs() < 1e-12);
        }
    }

    #[test]
    fn open_boundary_has_no_dispersion() {
        let m = CouplingModel::new(8, 0.0, 1.0, Boundary::Open).unwrap();
        assert!(matches!(dispersion(&m), Err(Error::Unsupported(_))));
    }

    #[test]
    fn monna_wavenumber_examples() {
        assert_eq!(monna_wavenumber(8, 1).unwrap(), 4);
        assert_eq!(monna_wavenumber(8, 0).unwrap(), 0);
    }

    #[test]
    fn initial_state_is_localized() {
        let m = CouplingModel::periodic(16, 0.3).unwrap();
        let occ = evolve_magnon(&m, 5, &[0.0], Execution::Sequential).unwrap();
        for j in 0..16 {
            let expect = if j == 5 { 1.0 } else { 0.0 };
            assert!((occ.get(0, j) - expect).abs() < 1e-14);
        }
    }

    #[test]
    fn fft_and_direct_sum_agree() {
        let m = CouplingModel::periodic(32, -0.7).unwrap();
        let p = MagnonPropagator::new(&m, 3).unwrap();
        let f = p.field_at(1.3);
        for j in 0..32 {
            assert!((f.amplitudes[j].norm_sqr() - p.occupation_of(j, 1.3)).abs() < 1e-13);
        }
    }

    #[test]
    fn source_threshold_is_zero_and_unreached_flagged() {
        let m = CouplingModel::periodic(16, -2.0).unwrap();
        let times = time_grid(0.1, 0.02).unwrap();
        let occ = evolve_magnon(&m, 0, &times, Execution::Sequential).unwrap();
        let th = threshold_times(&occ, 1.0 / 256.0).unwrap();
        assert_eq!(th.time(0), Some(0.0));
        assert!(th.time(8).is_none());
        assert!(th.unreached().contains(&8));
    }

    #[test]
    fn refinement_matches_bisection_target() {
        let m = CouplingModel::periodic(16, 0.0).unwrap();
        let times = time_grid(5.0, 0.1).unwrap();
        let occ = evolve_magnon(&m, 0, &times, Execution::Sequential).unwrap();
        let eps = 1.0 / 256.0;
        let prop = MagnonPropagator::new(&m, 0).unwrap();
        let th = threshold_times(&occ, eps).unwrap().refine(&prop, 1e-12);
        for j in 1..16 {
            let t = th.time(j).unwrap();
            assert!(prop.occupation_of(j, t + 1e-9) >= eps * (1.0 - 1e-6));
        }
    }

    #[test]
    fn grid_rejects_bad_steps() {
        assert!(time_grid(1.0, 0.0).is_err());
        assert!(time_grid(-1.0, 0.1).is_err());
        assert_eq!(time_grid(0.0, 0.1).unwrap(), vec![0.0]);
        assert_eq!(time_grid(1.0, 0.25).unwrap().len(), 5);
    }
}
