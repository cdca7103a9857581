//! Turning histograms into clique and term estimates.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measurement::grouping::MeasurementClique;
use crate::pauli::PauliString;
use crate::state::{index_mask, Histogram};

/// Outcomes of measuring one clique basis on one prepared state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasurementRecord {
    pub clique_id: usize,
    pub basis: PauliString,
    pub histogram: Histogram,
    pub shots: u64,
    /// ADAPT iteration whose state was measured.
    pub tag: usize,
}

impl MeasurementRecord {
    pub fn new(clique_id: usize, basis: PauliString, histogram: Histogram, tag: usize) -> Self {
        let shots = histogram.values().sum();
        MeasurementRecord {
            clique_id,
            basis,
            histogram,
            shots,
            tag,
        }
    }

    /// Adds the outcomes of `other` (same basis) to this record.
    pub fn merge(&mut self, other: &Histogram) {
        for (k, v) in other {
            *self.histogram.entry(*k).or_default() += v;
            self.shots += v;
        }
    }

    /// Sample mean of a single term diagonal in this record's basis.
    pub fn term_mean(&self, term: &PauliString) -> Option<f64> {
        if !term.diagonal_in(&self.basis) || self.shots == 0 {
            return None;
        }
        let mask = index_mask(term.support_mask(), term.n_qubits());
        let signed: i64 = self
            .histogram
            .iter()
            .map(|(b, c)| {
                if (b & mask).count_ones() % 2 == 1 {
                    -(*c as i64)
                } else {
                    *c as i64
                }
            })
            .sum();
        Some(signed as f64 / self.shots as f64)
    }
}

/// Eigenvalue (±1) of a term diagonal in the measured basis on outcome `b`.
#[inline]
pub fn eigenvalue(term: &PauliString, outcome: usize) -> f64 {
    let mask = index_mask(term.support_mask(), term.n_qubits());
    if (outcome & mask).count_ones() % 2 == 1 {
        -1.0
    } else {
        1.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CliqueEstimate {
    /// Sample mean of `e^s = Σ_members c · eigenvalue`.
    pub mean: f64,
    /// Unbiased sample variance of `e^s` (zero for a single shot).
    pub variance: f64,
    pub shots: u64,
    /// Sample mean of each member's eigenvalue, in member order.
    pub term_means: Vec<f64>,
}

impl CliqueEstimate {
    pub fn std_dev(&self) -> f64 {
        self.variance.sqrt()
    }

    /// Standard error of `mean`.
    pub fn std_error(&self) -> f64 {
        if self.shots == 0 {
            0.0
        } else {
            (self.variance / self.shots as f64).sqrt()
        }
    }
}

pub fn estimate_clique(record: &MeasurementRecord, clique: &MeasurementClique) -> Result<CliqueEstimate> {
    if record.basis != clique.basis {
        return Err(Error::BasisMismatch {
            record: record.basis.to_string(),
            clique: clique.basis.to_string(),
        });
    }
    estimate_from_histogram(&record.histogram, clique)
}

pub(crate) fn estimate_from_histogram(hist: &Histogram, clique: &MeasurementClique) -> Result<CliqueEstimate> {
    let shots: u64 = hist.values().sum();
    if shots == 0 {
        return Err(Error::ZeroShots);
    }
    let masks: Vec<usize> = clique
        .members
        .iter()
        .map(|(p, _)| index_mask(p.support_mask(), p.n_qubits()))
        .collect();
    let mut term_sums = vec![0.0; clique.members.len()];
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for (&b, &count) in hist {
        let mut e = 0.0;
        for (k, ((_, c), m)) in clique.members.iter().zip(&masks).enumerate() {
            let ev = if (b & m).count_ones() % 2 == 1 { -1.0 } else { 1.0 };
            term_sums[k] += ev * count as f64;
            e += c * ev;
        }
        sum += e * count as f64;
        sum_sq += e * e * count as f64;
    }
    let n = shots as f64;
    let mean = sum / n;
    let variance = if shots > 1 {
        ((sum_sq - n * mean * mean) / (n - 1.0)).max(0.0)
    } else {
        0.0
    };
    Ok(CliqueEstimate {
        mean,
        variance,
        shots,
        term_means: term_sums.into_iter().map(|s| s / n).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn clique(members: &[(&str, f64)]) -> MeasurementClique {
        let members: Vec<(PauliString, f64)> = members.iter().map(|(s, c)| (s.parse().unwrap(), *c)).collect();
        let basis = members[0].0;
        MeasurementClique { id: 0, members, basis }
    }

    #[test]
    fn single_z_mean() {
        let cl = clique(&[("Z", 1.0)]);
        let rec = MeasurementRecord::new(0, cl.basis, Histogram::from([(0, 7), (1, 3)]), 0);
        let est = estimate_clique(&rec, &cl).unwrap();
        assert!((est.mean - 0.4).abs() < 1e-15);
    }

    #[test]
    fn deterministic_outcome_has_zero_variance() {
        let mut cl = clique(&[("ZZ", 1.0), ("ZI", 0.5)]);
        cl.basis = "ZZ".parse().unwrap();
        let rec = MeasurementRecord::new(0, cl.basis, Histogram::from([(0, 10)]), 0);
        let est = estimate_clique(&rec, &cl).unwrap();
        assert_eq!(est.mean, 1.5);
        assert_eq!(est.variance, 0.0);
        assert_eq!(est.term_means, vec![1.0, 1.0]);
    }

    #[test]
    fn basis_mismatch_and_zero_shots() {
        let cl = clique(&[("Z", 1.0)]);
        let rec = MeasurementRecord::new(0, "X".parse().unwrap(), Histogram::from([(0, 1)]), 0);
        assert!(matches!(estimate_clique(&rec, &cl), Err(Error::BasisMismatch { .. })));
        let empty = MeasurementRecord::new(0, cl.basis, Histogram::new(), 0);
        assert!(matches!(estimate_clique(&empty, &cl), Err(Error::ZeroShots)));
    }

    #[test]
    fn term_mean_from_record() {
        let rec = MeasurementRecord::new(
            0,
            "XZ".parse().unwrap(),
            Histogram::from([(0b00, 6), (0b01, 2), (0b10, 2)]),
            0,
        );
        assert_eq!(rec.term_mean(&"IZ".parse().unwrap()), Some(0.6));
        assert_eq!(rec.term_mean(&"XI".parse().unwrap()), Some(0.6));
        assert_eq!(rec.term_mean(&"XZ".parse().unwrap()), Some(0.2));
        assert_eq!(rec.term_mean(&"YI".parse().unwrap()), None);
    }
}
