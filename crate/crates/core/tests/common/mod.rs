//! Test-side oracles: dense matrices built from Kronecker products, a
//! scaling-and-squaring matrix exponential, and fixture loading. Nothing here
//! reuses the library's bit-level conventions.
#![allow(dead_code)]

use std::path::PathBuf;

use num_complex::Complex64;
use shotwise_core::{load_hamiltonian, Hamiltonian, Pauli, PauliString, PauliSum};

pub type C = Complex64;

pub fn c(re: f64, im: f64) -> C {
    C::new(re, im)
}

pub fn fixture(name: &str) -> Hamiltonian {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../data/hamiltonians")
        .join(format!("{name}.json"));
    load_hamiltonian(&path).unwrap_or_else(|e| panic!("loading {}: {e}", path.display()))
}

/// Row-major square complex matrix.
#[derive(Clone, Debug)]
pub struct Dense {
    pub dim: usize,
    pub a: Vec<C>,
}

impl Dense {
    pub fn zeros(dim: usize) -> Self {
        Dense {
            dim,
            a: vec![c(0.0, 0.0); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.a[i * dim + i] = c(1.0, 0.0);
        }
        m
    }

    pub fn at(&self, i: usize, j: usize) -> C {
        self.a[i * self.dim + j]
    }

    pub fn kron(&self, other: &Dense) -> Dense {
        let d = self.dim * other.dim;
        let mut m = Dense::zeros(d);
        for i in 0..self.dim {
            for j in 0..self.dim {
                for k in 0..other.dim {
                    for l in 0..other.dim {
                        m.a[(i * other.dim + k) * d + j * other.dim + l] = self.at(i, j) * other.at(k, l);
                    }
                }
            }
        }
        m
    }

    pub fn matmul(&self, o: &Dense) -> Dense {
        let n = self.dim;
        let mut m = Dense::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let v = self.a[i * n + k];
                if v == c(0.0, 0.0) {
                    continue;
                }
                for j in 0..n {
                    m.a[i * n + j] += v * o.a[k * n + j];
                }
            }
        }
        m
    }

    pub fn add(&self, o: &Dense) -> Dense {
        Dense {
            dim: self.dim,
            a: self.a.iter().zip(&o.a).map(|(x, y)| x + y).collect(),
        }
    }

    pub fn sub(&self, o: &Dense) -> Dense {
        Dense {
            dim: self.dim,
            a: self.a.iter().zip(&o.a).map(|(x, y)| x - y).collect(),
        }
    }

    pub fn scale(&self, s: C) -> Dense {
        Dense {
            dim: self.dim,
            a: self.a.iter().map(|x| x * s).collect(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.a.iter().fold(0.0, |m, x| m.max(x.norm()))
    }

    pub fn one_norm(&self) -> f64 {
        (0..self.dim)
            .map(|j| (0..self.dim).map(|i| self.at(i, j).norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn apply(&self, v: &[C]) -> Vec<C> {
        (0..self.dim)
            .map(|i| (0..self.dim).map(|j| self.at(i, j) * v[j]).sum())
            .collect()
    }
}

pub fn single_qubit(p: Pauli) -> Dense {
    let (o, z, i) = (c(1.0, 0.0), c(0.0, 0.0), c(0.0, 1.0));
    let a = match p {
        Pauli::I => vec![o, z, z, o],
        Pauli::X => vec![z, o, o, z],
        Pauli::Y => vec![z, -i, i, z],
        Pauli::Z => vec![o, z, z, -o],
    };
    Dense { dim: 2, a }
}

/// Qubit 0 is the leftmost Kronecker factor (the most significant index bit).
pub fn dense_string(p: &PauliString) -> Dense {
    let mut m = Dense::identity(1);
    for q in 0..p.n_qubits() {
        m = m.kron(&single_qubit(p.get(q)));
    }
    m
}

pub fn dense_sum(s: &PauliSum) -> Dense {
    let dim = 1usize << s.n_qubits();
    let mut m = Dense::zeros(dim);
    for (p, coeff) in s.iter() {
        m = m.add(&dense_string(p).scale(*coeff));
    }
    m
}

/// `exp(A)` by scaling and squaring with a degree-18 Taylor polynomial.
pub fn expm(a: &Dense) -> Dense {
    let norm = a.one_norm();
    let s = if norm > 0.5 {
        (norm / 0.5).log2().ceil() as i32
    } else {
        0
    };
    let scaled = a.scale(c(0.5f64.powi(s), 0.0));
    let mut result = Dense::identity(a.dim);
    let mut term = Dense::identity(a.dim);
    for k in 1..=18 {
        term = term.matmul(&scaled).scale(c(1.0 / k as f64, 0.0));
        result = result.add(&term);
    }
    for _ in 0..s {
        result = result.matmul(&result);
    }
    result
}

pub fn max_diff(a: &[C], b: &[C]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).norm()))
}

pub fn dense_expectation(m: &Dense, v: &[C]) -> C {
    let mv = m.apply(v);
    v.iter().zip(&mv).map(|(x, y)| x.conj() * y).sum()
}
