//! Second-quantized fermionic operators and their Jordan–Wigner images.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::pauli::{Pauli, PauliString, PauliSum};

/// One ladder operator: `(mode, dagger)`.
pub type Ladder = (usize, bool);

/// A linear combination of products of creation/annihilation operators.
///
/// Products are stored left to right as written, so `[(2, true), (0, false)]`
/// means `a_2† a_0`.
#[derive(Debug, Clone, PartialEq)]
pub struct FermionOperator {
    n_modes: usize,
    products: Vec<(Vec<Ladder>, Complex64)>,
}

impl FermionOperator {
    pub fn zero(n_modes: usize) -> Self {
        FermionOperator {
            n_modes,
            products: Vec::new(),
        }
    }

    pub fn term(n_modes: usize, ladders: &[Ladder], coefficient: Complex64) -> Result<Self> {
        let mut op = FermionOperator::zero(n_modes);
        op.push(ladders, coefficient)?;
        Ok(op)
    }

    pub fn push(&mut self, ladders: &[Ladder], coefficient: Complex64) -> Result<()> {
        if let Some(&(mode, _)) = ladders.iter().find(|(m, _)| *m >= self.n_modes) {
            return Err(Error::ModeOutOfRange {
                mode,
                n_modes: self.n_modes,
            });
        }
        self.products.push((ladders.to_vec(), coefficient));
        Ok(())
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn products(&self) -> &[(Vec<Ladder>, Complex64)] {
        &self.products
    }

    /// Hermitian conjugate: reverse each product, flip daggers, conjugate.
    pub fn adjoint(&self) -> Self {
        FermionOperator {
            n_modes: self.n_modes,
            products: self
                .products
                .iter()
                .map(|(ls, c)| (ls.iter().rev().map(|&(m, d)| (m, !d)).collect(), c.conj()))
                .collect(),
        }
    }

    pub fn minus(&self, other: &FermionOperator) -> Self {
        let mut out = self.clone();
        out.products
            .extend(other.products.iter().map(|(ls, c)| (ls.clone(), -c)));
        out
    }

    /// `a_a† a_i − a_i† a_a`.
    pub fn single_excitation(n_modes: usize, i: usize, a: usize) -> Result<Self> {
        let t = FermionOperator::term(n_modes, &[(a, true), (i, false)], Complex64::new(1.0, 0.0))?;
        Ok(t.minus(&t.adjoint()))
    }

    /// `a_a† a_b† a_j a_i − h.c.`
    pub fn double_excitation(n_modes: usize, i: usize, j: usize, a: usize, b: usize) -> Result<Self> {
        let t = FermionOperator::term(
            n_modes,
            &[(a, true), (b, true), (j, false), (i, false)],
            Complex64::new(1.0, 0.0),
        )?;
        Ok(t.minus(&t.adjoint()))
    }
}

/// Jordan–Wigner image of a single ladder operator:
/// `a_p† ↦ ½(X_p − iY_p) Π_{q<p} Z_q`, `a_p ↦ ½(X_p + iY_p) Π_{q<p} Z_q`.
pub fn ladder_image(mode: usize, dagger: bool, n_qubits: usize) -> PauliSum {
    let mut x = PauliString::identity(n_qubits);
    for q in 0..mode {
        x.set(q, Pauli::Z);
    }
    let mut y = x;
    x.set(mode, Pauli::X);
    y.set(mode, Pauli::Y);
    let y_coeff = if dagger { -0.5 } else { 0.5 };
    PauliSum::from_terms(
        n_qubits,
        [(x, Complex64::new(0.5, 0.0)), (y, Complex64::new(0.0, y_coeff))],
    )
    .expect("lengths agree by construction")
}

pub fn jordan_wigner(op: &FermionOperator, n_qubits: usize) -> Result<PauliSum> {
    if n_qubits < op.n_modes {
        return Err(Error::ModeOutOfRange {
            mode: op.n_modes - 1,
            n_modes: n_qubits,
        });
    }
    let identity = PauliString::identity(n_qubits);
    let mut total = PauliSum::new(n_qubits);
    for (ladders, c) in &op.products {
        let mut product = PauliSum::single(identity, *c);
        for &(mode, dagger) in ladders {
            product = product.mul(&ladder_image(mode, dagger, n_qubits))?;
        }
        total = total.add(&product)?;
    }
    Ok(total)
}
