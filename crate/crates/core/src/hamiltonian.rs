//! Loading and validating molecular qubit Hamiltonian files.
//!
//! Files are JSON with the fields of [`HamiltonianFile`]. Unknown metadata
//! keys (geometry, orbital ordering notes and so on) are preserved verbatim.
//! Floats are written in shortest round-trip form, so save → load reproduces
//! every coefficient bit for bit.

use std::fs;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pauli::{PauliString, PauliSum, MAX_QUBITS};
use crate::state::Statevector;

/// Imaginary parts above this make a Hamiltonian file non-Hermitian.
pub const HERMITIAN_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermRecord {
    pub pauli: String,
    pub re: f64,
    pub im: f64,
}

/// On-disk representation of a qubit Hamiltonian plus reference energies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HamiltonianFile {
    pub n_qubits: usize,
    pub n_electrons: usize,
    pub molecule: String,
    pub basis: String,
    pub mapping: String,
    /// Occupation per qubit, qubit 0 first.
    pub hf_bitstring: String,
    pub hf_energy: f64,
    pub fci_energy: f64,
    pub terms: Vec<TermRecord>,
    #[serde(flatten)]
    pub extra: serde_json::Map<String, serde_json::Value>,
}

/// A validated Hamiltonian: file metadata plus the operator as a [`PauliSum`].
#[derive(Debug, Clone)]
pub struct Hamiltonian {
    pub file: HamiltonianFile,
    pub operator: PauliSum,
    hf_index: usize,
}

impl Hamiltonian {
    pub fn from_file(file: HamiltonianFile) -> Result<Self> {
        if file.n_qubits == 0 || file.n_qubits > MAX_QUBITS {
            return Err(Error::Schema(format!(
                "n_qubits must be in 1..={MAX_QUBITS}, got {}",
                file.n_qubits
            )));
        }
        if file.mapping != "jordan_wigner" {
            return Err(Error::Schema(format!(
                "unsupported mapping {:?}, expected \"jordan_wigner\"",
                file.mapping
            )));
        }
        if file.terms.is_empty() {
            return Err(Error::Schema("terms list is empty".into()));
        }
        let mut parsed = Vec::with_capacity(file.terms.len());
        for (k, t) in file.terms.iter().enumerate() {
            if t.pauli.chars().count() != file.n_qubits {
                return Err(Error::Schema(format!(
                    "term {k}: pauli string {:?} has length {}, expected {}",
                    t.pauli,
                    t.pauli.chars().count(),
                    file.n_qubits
                )));
            }
            let p: PauliString = t
                .pauli
                .parse()
                .map_err(|_| Error::Schema(format!("term {k}: invalid pauli string {:?}", t.pauli)))?;
            if !t.re.is_finite() || !t.im.is_finite() {
                return Err(Error::Schema(format!("term {k}: non-finite coefficient")));
            }
            if t.im.abs() > HERMITIAN_TOLERANCE {
                return Err(Error::NonHermitian {
                    pauli: t.pauli.clone(),
                    im: t.im,
                });
            }
            // The Hermitian part is kept; the sub-tolerance imaginary residue is dropped.
            parsed.push((p, Complex64::new(t.re, 0.0)));
        }
        let hf_index = parse_occupation(&file.hf_bitstring, file.n_qubits, file.n_electrons)?;
        let operator = PauliSum::from_terms(file.n_qubits, parsed)?;
        Ok(Hamiltonian {
            file,
            operator,
            hf_index,
        })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: HamiltonianFile = serde_json::from_str(text).map_err(|e| Error::Schema(e.to_string()))?;
        Hamiltonian::from_file(file)
    }

    pub fn n_qubits(&self) -> usize {
        self.file.n_qubits
    }

    pub fn n_electrons(&self) -> usize {
        self.file.n_electrons
    }

    pub fn molecule(&self) -> &str {
        &self.file.molecule
    }

    pub fn fci_energy(&self) -> f64 {
        self.file.fci_energy
    }

    pub fn hf_energy(&self) -> f64 {
        self.file.hf_energy
    }

    /// Basis-state index of the reference determinant (qubit 0 most significant).
    pub fn hf_index(&self) -> usize {
        self.hf_index
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.file).expect("file structure always serializes")
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_json()).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })
    }
}

/// Converts an occupation string into a basis-state index.
fn parse_occupation(bits: &str, n_qubits: usize, n_electrons: usize) -> Result<usize> {
    if bits.len() != n_qubits {
        return Err(Error::BadHartreeFock(format!(
            "{bits:?} has length {}, expected {n_qubits}",
            bits.len()
        )));
    }
    let mut index = 0usize;
    let mut ones = 0usize;
    for ch in bits.chars() {
        index <<= 1;
        match ch {
            '0' => {}
            '1' => {
                index |= 1;
                ones += 1;
            }
            _ => {
                return Err(Error::BadHartreeFock(format!(
                    "{bits:?} contains {ch:?}; only '0' and '1' are allowed"
                )))
            }
        }
    }
    if ones != n_electrons {
        return Err(Error::BadHartreeFock(format!(
            "{bits:?} has {ones} occupied orbitals but n_electrons is {n_electrons}"
        )));
    }
    Ok(index)
}

pub fn load_hamiltonian(path: impl AsRef<Path>) -> Result<Hamiltonian> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Hamiltonian::from_json(&text)
}

pub fn hartree_fock_state(h: &Hamiltonian) -> Statevector {
    Statevector::basis_state(h.n_qubits(), h.hf_index())
}
