//! Pauli-string counts for one gradient screen.
//!
//! - `full`: Σ_k number of terms of `[H, A_k]`, no cross-operator merging.
//! - `grouped`: QWC cliques over the union of all gradient terms.
//! - `grouped_per_operator`: Σ_k QWC cliques of `[H, A_k]` alone.
//! - `reused`: Σ_k QWC cliques formed by the terms of `[H, A_k]` that no
//!   Hamiltonian clique basis covers, i.e. what is still measured per
//!   operator once cached energy outcomes are reused.
//!
//! Operators with several parameters contribute one commutator per generator.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::Result;
use crate::hamiltonian::Hamiltonian;
use crate::measurement::grouping::group_qwc;
use crate::pauli::PauliSum;
use crate::pools::{build_pool, PoolKind, PoolOperator};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CountReport {
    pub molecule: String,
    pub n_qubits: usize,
    pub h_terms: usize,
    pub pool: PoolKind,
    pub n_operators: usize,
    pub full: usize,
    pub grouped: usize,
    pub grouped_per_operator: usize,
    pub reused: usize,
    /// Plain count of gradient terms not covered by any Hamiltonian clique.
    pub uncovered_terms: usize,
}

impl CountReport {
    /// Grouping-only cost as a percentage of `full`.
    pub fn grouped_pct(&self) -> f64 {
        pct(self.grouped_per_operator, self.full)
    }

    /// Grouping-plus-reuse cost as a percentage of `full`.
    pub fn reused_pct(&self) -> f64 {
        pct(self.reused, self.full)
    }

    pub fn reused_ratio(&self) -> f64 {
        self.reused as f64 / self.full as f64
    }

    pub const CSV_HEADER: &'static str =
        "molecule,n_qubits,h_terms,pool,full,grouped,reused,grouped_per_operator,uncovered_terms,grouped_pct,reused_pct";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{:.2},{:.2}",
            self.molecule,
            self.n_qubits,
            self.h_terms,
            self.pool,
            self.full,
            self.grouped,
            self.reused,
            self.grouped_per_operator,
            self.uncovered_terms,
            self.grouped_pct(),
            self.reused_pct()
        )
    }
}

fn pct(a: usize, b: usize) -> f64 {
    if b == 0 {
        0.0
    } else {
        100.0 * a as f64 / b as f64
    }
}

pub fn count_report(h: &Hamiltonian, kind: PoolKind) -> Result<CountReport> {
    let pool = build_pool(kind, h.n_electrons(), h.n_qubits())?;
    count_for_pool(h, kind, &pool)
}

pub fn count_for_pool(h: &Hamiltonian, kind: PoolKind, pool: &[PoolOperator]) -> Result<CountReport> {
    let n = h.n_qubits();
    let h_cliques = group_qwc(&h.operator);
    let mut union = PauliSum::new(n);
    let mut full = 0;
    let mut reused = 0;
    let mut per_operator = 0;
    let mut uncovered_terms = 0;
    for op in pool {
        for g in &op.generators {
            let c = h.operator.commutator(g)?;
            full += c.len();
            per_operator += group_qwc(&c).len();
            let mut rest = PauliSum::new(n);
            for (p, coeff) in c.iter() {
                union.add_term(*p, Complex64::new(coeff.norm(), 0.0))?;
                if !h_cliques.iter().any(|cl| cl.covers(p)) {
                    rest.add_term(*p, *coeff)?;
                    uncovered_terms += 1;
                }
            }
            reused += group_qwc(&rest).len();
        }
    }
    Ok(CountReport {
        molecule: h.molecule().to_string(),
        n_qubits: n,
        h_terms: h.operator.len(),
        pool: kind,
        n_operators: pool.len(),
        full,
        grouped: group_qwc(&union).len(),
        grouped_per_operator: per_operator,
        reused,
        uncovered_terms,
    })
}
