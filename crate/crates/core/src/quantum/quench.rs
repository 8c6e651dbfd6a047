//! Quench from the x-polarized product state and the entanglement it builds.
//!
//! The initial state is a sum over all magnon numbers. Each magnetization
//! sector evolves independently; on a periodic ring the state is also
//! translation invariant, so only the zero-momentum block of each sector is
//! diagonalised.

use super::basis::{SpinBasis, SymmetrySector};
use super::entanglement::{
    entanglement_entropy, min_over_subsets, partitions_of_kind, PartitionKind, QuantumState,
};
use super::hamiltonian::{build_hamiltonian, total_sz, SparseOperator};
use super::propagate::Eigensystem;
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::geometry::{Boundary, CouplingModel};
use crate::C64;

/// Largest ring for full-space quench evolution.
pub const MAX_QUENCH_SITES: usize = 16;

struct SectorEvolution {
    basis: SpinBasis,
    eig: Eigensystem,
    /// Initial state in the eigenbasis.
    weights: Vec<C64>,
}

/// Sector-resolved propagator for the x-polarized initial state.
pub struct XQuench {
    n_sites: usize,
    sectors: Vec<SectorEvolution>,
}

impl XQuench {
    pub fn new(model: &CouplingModel, exec: Execution) -> Result<Self> {
        let n = model.n_sites();
        if n > MAX_QUENCH_SITES {
            return Err(Error::DimensionOverflow {
                dim: 1 << n,
                limit: 1 << MAX_QUENCH_SITES,
            });
        }
        let amp0 = (0.5f64).powf(n as f64 / 2.0);
        let sectors = exec.map_range(n + 1, |magnons| -> Result<SectorEvolution> {
            let basis = match model.boundary() {
                Boundary::Periodic => {
                    SpinBasis::new(n, Some(magnons), Some(SymmetrySector::momentum(0)))?
                }
                Boundary::Open => SpinBasis::magnetization(n, magnons)?,
            };
            let h = build_hamiltonian(model, &basis)?;
            let eig = Eigensystem::new(&h)?;
            // <r^| x-state> = sqrt(orbit) 2^(-N/2)
            let initial: Vec<C64> = (0..basis.dim())
                .map(|r| C64::new(amp0 * (basis.orbit_size(r) as f64).sqrt(), 0.0))
                .collect();
            let weights = eig.project(&initial);
            Ok(SectorEvolution {
                basis,
                eig,
                weights,
            })
        });
        Ok(Self {
            n_sites: n,
            sectors: sectors.into_iter().collect::<Result<_>>()?,
        })
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    /// Full `2^N` state at time `t`.
    pub fn state_at(&self, t: f64) -> Result<QuantumState> {
        let mut full = vec![C64::new(0.0, 0.0); 1 << self.n_sites];
        for sec in &self.sectors {
            let c: Vec<C64> = sec
                .weights
                .iter()
                .zip(sec.eig.values())
                .map(|(w, &e)| w * C64::from_polar(1.0, -e * t))
                .collect();
            let coeffs = sec.eig.reconstruct(&c);
            sec.basis.embed_into(&coeffs, &mut full);
        }
        QuantumState::new(self.n_sites, full)
    }
}

/// One entropy value of the quench table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntropyRecord {
    pub time: f64,
    pub size: usize,
    pub kind: PartitionKind,
    /// Minimum over the partitions of this kind and size.
    pub entropy: f64,
    /// Subset achieving the minimum.
    pub subset: u64,
}

/// Largest deviations of conserved quantities from their initial values.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ConservationReport {
    pub norm: f64,
    pub energy: f64,
    pub magnetization: f64,
}

impl ConservationReport {
    pub fn within(&self, tol: f64) -> bool {
        self.norm < tol && self.energy < tol && self.magnetization < tol
    }
}

#[derive(Debug, Clone)]
pub struct QuenchResult {
    pub records: Vec<EntropyRecord>,
    pub conservation: ConservationReport,
}

/// Conserved-quantity drift measured on full-space states with the full
/// product-basis Hamiltonian.
struct Monitor {
    h: SparseOperator,
    sz: Vec<f64>,
    initial: Option<(f64, f64)>,
    report: ConservationReport,
}

impl Monitor {
    fn new(model: &CouplingModel) -> Result<Self> {
        let basis = SpinBasis::full(model.n_sites())?;
        Ok(Self {
            h: build_hamiltonian(model, &basis)?,
            sz: total_sz(&basis),
            initial: None,
            report: ConservationReport::default(),
        })
    }

    fn observe(&mut self, state: &QuantumState) {
        let amps = state.amplitudes();
        let energy = self.h.expectation(amps).re;
        let mz: f64 = amps
            .iter()
            .zip(&self.sz)
            .map(|(a, s)| a.norm_sqr() * s)
            .sum();
        let (e0, m0) = *self.initial.get_or_insert((energy, mz));
        let r = &mut self.report;
        r.norm = r.norm.max((state.norm() - 1.0).abs());
        r.energy = r.energy.max((energy - e0).abs());
        r.magnetization = r.magnetization.max((mz - m0).abs());
    }
}

/// Entropy after a quench from the x-polarized state, for every time, size and
/// partition kind requested. Each record is the minimum over the partitions of
/// its kind (all cyclic placements for the block kinds).
pub fn quench_entanglement(
    model: &CouplingModel,
    times: &[f64],
    sizes: &[usize],
    kinds: &[PartitionKind],
    exec: Execution,
) -> Result<QuenchResult> {
    let n = model.n_sites();
    let mut families = Vec::new();
    for &size in sizes {
        for &kind in kinds {
            if kind == PartitionKind::TwoAdic && !n.is_power_of_two() {
                return Err(Error::Unsupported(
                    "2-adic partitions need a power-of-two size".into(),
                ));
            }
            let cyclic = model.boundary() == Boundary::Periodic;
            families.push((size, kind, partitions_of_kind(n, size, kind, cyclic)?));
        }
    }
    let quench = XQuench::new(model, exec)?;
    let mut monitor = Monitor::new(model)?;
    let mut records = Vec::new();
    // include t = 0 so drift is measured against the initial state
    monitor.observe(&quench.state_at(0.0)?);
    for &t in times {
        let state = quench.state_at(t)?;
        monitor.observe(&state);
        for (size, kind, subsets) in &families {
            let (entropy, subset) = min_over_subsets(&state, subsets, exec)?;
            records.push(EntropyRecord {
                time: t,
                size: *size,
                kind: *kind,
                entropy,
                subset,
            });
        }
    }
    Ok(QuenchResult {
        records,
        conservation: monitor.report,
    })
}

/// Entropy of one fixed subset along the quench.
pub fn quench_entropy_of_subset(
    model: &CouplingModel,
    times: &[f64],
    subset: u64,
    exec: Execution,
) -> Result<Vec<f64>> {
    let quench = XQuench::new(model, exec)?;
    times
        .iter()
        .map(|&t| entanglement_entropy(&quench.state_at(t)?, subset))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn initial_state_is_x_polarized() {
        let model = CouplingModel::periodic(8, 0.0).unwrap();
        let q = XQuench::new(&model, Execution::Sequential).unwrap();
        let s0 = q.state_at(0.0).unwrap();
        let x = QuantumState::x_polarized(8).unwrap();
        for (a, b) in s0.amplitudes().iter().zip(x.amplitudes()) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn zero_time_entropy_vanishes() {
        let model = CouplingModel::periodic(8, 1.0).unwrap();
        let res = quench_entanglement(
            &model,
            &[0.0],
            &[1, 2, 4],
            &[
                PartitionKind::Archimedean,
                PartitionKind::TwoAdic,
                PartitionKind::Arbitrary,
            ],
            Execution::Sequential,
        )
        .unwrap();
        assert_eq!(res.records.len(), 9);
        assert!(res.records.iter().all(|r| r.entropy.abs() < 1e-12));
    }

    #[test]
    fn conserved_quantities_hold() {
        let model = CouplingModel::periodic(8, -0.5).unwrap();
        let times: Vec<f64> = (0..20).map(|k| 0.5 * k as f64).collect();
        let res = quench_entanglement(
            &model,
            &times,
            &[4],
            &[PartitionKind::Archimedean],
            Execution::Sequential,
        )
        .unwrap();
        assert!(res.conservation.within(1e-9), "{:?}", res.conservation);
    }

    #[test]
    fn open_chain_is_supported() {
        let model = CouplingModel::new(6, 0.0, 1.0, Boundary::Open).unwrap();
        let res = quench_entanglement(
            &model,
            &[1.0],
            &[3],
            &[PartitionKind::Archimedean],
            Execution::Sequential,
        )
        .unwrap();
        assert!(res.records[0].entropy > 0.0);
    }
}
