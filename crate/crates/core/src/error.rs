use std::path::PathBuf;

/// Errors raised by the simulation engine.
///
/// Hamiltonian-file problems are split into schema, Hermiticity and
/// reference-state variants so callers can report them distinctly.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("qubit count mismatch: {left} vs {right}")]
    QubitMismatch { left: usize, right: usize },

    #[error("invalid Pauli string {0:?}")]
    InvalidPauli(String),

    #[error("fermionic mode {mode} out of range for {n_modes} modes")]
    ModeOutOfRange { mode: usize, n_modes: usize },

    #[error("hamiltonian schema error: {0}")]
    Schema(String),

    #[error("hamiltonian term {pauli} has imaginary part {im:e}; the operator must be Hermitian")]
    NonHermitian { pauli: String, im: f64 },

    #[error("bad Hartree-Fock bitstring: {0}")]
    BadHartreeFock(String),

    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("invalid pool request: {0}")]
    InvalidPool(String),

    #[error("operator takes {expected} parameter(s), got {got}")]
    Arity { expected: usize, got: usize },

    #[error("allocation error: {0}")]
    Allocation(String),

    #[error("record basis {record} does not match clique basis {clique}")]
    BasisMismatch { record: String, clique: String },

    #[error("measurement record holds zero shots")]
    ZeroShots,

    #[error("expectation value has imaginary residue {0:e}")]
    ComplexExpectation(f64),

    #[error("invalid noise specification: {0}")]
    Noise(String),

    #[error("configuration error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
