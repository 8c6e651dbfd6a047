//! Exact many-body dynamics of the spin-1/2 model.

pub mod basis;
pub mod entanglement;
pub mod hamiltonian;
pub mod levels;
pub mod otoc;
pub mod propagate;
pub mod quench;

pub use basis::{Parity, SpinBasis, SymmetrySector, MAX_DIMENSION};
pub use entanglement::{Bipartition, PartitionKind, QuantumState};
pub use hamiltonian::{build_hamiltonian, SparseOperator};
pub use levels::{level_statistics, LevelOptions, SpectrumData};
pub use otoc::{otoc, short_time_exponent, Ensemble, OtocCurve, OtocMethod, OtocOptions};
pub use propagate::{ChebyshevPropagator, Eigensystem};
pub use quench::{quench_entanglement, QuenchResult, XQuench};
