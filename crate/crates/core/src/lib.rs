//! Shot-frugal ADAPT-VQE simulation.
//!
//! The crate is organised bottom-up:
//!
//! - [`pauli`]: Pauli strings and sums, products and commutators.
//! - [`fermion`] and [`hamiltonian`]: fermionic operators, the Jordan–Wigner
//!   map and validated Hamiltonian files.
//! - [`pools`]: the fermionic, qubit, qubit-excitation and CEO pools.
//! - [`state`]: dense statevectors, Pauli-rotation evolution and noisy sampling.
//! - [`measurement`]: QWC grouping, clique estimators, shot allocation and
//!   the cross-iteration reuse cache.
//! - [`optimize`]: BFGS for exact and noisy objectives.
//! - [`adapt`]: the ADAPT-VQE loop.
//! - [`experiment`]: configuration, repeated runs, aggregation and reports.

pub mod adapt;
pub mod error;
pub mod experiment;
pub mod fermion;
pub mod hamiltonian;
pub mod measurement;
pub mod optimize;
pub mod pauli;
pub mod pools;
pub mod state;

pub use error::{Error, Result};
pub use hamiltonian::{hartree_fock_state, load_hamiltonian, Hamiltonian, HamiltonianFile};
pub use pauli::{Pauli, PauliString, PauliSum, Phase};
pub use pools::{build_pool, OperatorKind, PoolKind, PoolOperator};
pub use state::{evolve, expectation_exact, sample_in_basis, Histogram, NoiseChannels, NoiseSpec, Statevector};

/// Chemical accuracy in Hartree.
pub const CHEMICAL_ACCURACY: f64 = 1.594e-3;
