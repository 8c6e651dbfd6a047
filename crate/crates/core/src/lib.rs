//! Simulation and analysis toolkit for spin models with couplings between
//! sites separated by powers of two.
//!
//! The coupling exponent `s` tunes the interaction graph from a nearest-neighbour
//! chain (`s -> -inf`) through the hypercube-like graph at `s = 0` to a treelike,
//! 2-adic geometry (`s -> +inf`). The crate covers:
//!
//! * [`geometry`]: coupling graph, Archimedean / 2-adic / tree / graph distances, Monna map.
//! * [`magnon`]: exact single-excitation dynamics from the dispersion relation.
//! * [`lightcone`]: lower and upper bounds on magnon threshold times.
//! * [`quantum`]: spin-1/2 exact diagonalization (quench entanglement, OTOCs, level statistics).
//! * [`semiclassical`]: large-S classical dynamics, sensitivity and scrambling-time fits.
//! * [`expdesign`]: cavity-QED coupling and cooperativity budgets, modulation waveforms.
//!
//! Sites are indexed `0..N`. Energies are in units of the coupling scale `j0`
//! and times in units of `1/j0`.

pub mod error;
pub mod exec;
pub mod expdesign;
pub mod geometry;
pub mod lightcone;
pub mod magnon;
pub mod output;
pub mod quantum;
pub mod semiclassical;
pub mod stats;

pub use error::{Error, Result};
pub use exec::Execution;
pub use geometry::{Boundary, CouplingModel};

/// Complex scalar used for state vectors throughout the crate.
pub type C64 = num_complex::Complex64;
