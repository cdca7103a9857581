//! Greedy qubit-wise-commuting partition of an observable.

use crate::pauli::{PauliString, PauliSum};

/// A set of pairwise qubit-wise commuting terms with a shared eigenbasis.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementClique {
    pub id: usize,
    /// Terms with their real coefficients, in insertion order.
    pub members: Vec<(PauliString, f64)>,
    /// One non-identity axis per qubit; positions no member touches are Z.
    pub basis: PauliString,
}

impl MeasurementClique {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// True when `term` is diagonal in this clique's measurement basis.
    pub fn covers(&self, term: &PauliString) -> bool {
        term.diagonal_in(&self.basis)
    }
}

/// Clique under construction: members plus the axes fixed so far.
struct OpenClique {
    members: Vec<(PauliString, f64)>,
    x: u64,
    z: u64,
    support: u64,
}

impl OpenClique {
    fn accepts(&self, p: &PauliString) -> bool {
        // QWC with every member is the same as agreeing with the fixed axes.
        let overlap = self.support & p.support_mask();
        (self.x ^ p.x_mask()) & overlap == 0 && (self.z ^ p.z_mask()) & overlap == 0
    }

    fn push(&mut self, p: PauliString, c: f64) {
        self.x |= p.x_mask();
        self.z |= p.z_mask();
        self.support |= p.support_mask();
        self.members.push((p, c));
    }
}

/// Greedy QWC grouping of the non-identity terms of `obs`.
///
/// Terms are visited by descending |coefficient|, ties in canonical order,
/// and each joins the first clique it is qubit-wise compatible with. Only
/// real parts of coefficients are kept, so `obs` should be Hermitian.
pub fn group_qwc(obs: &PauliSum) -> Vec<MeasurementClique> {
    let n = obs.n_qubits();
    let mut terms: Vec<(PauliString, f64)> = obs
        .iter()
        .filter(|(p, _)| !p.is_identity())
        .map(|(p, c)| (*p, c.re))
        .collect();
    // Stable sort keeps canonical order among equal magnitudes.
    terms.sort_by(|a, b| b.1.abs().total_cmp(&a.1.abs()));

    let mut open: Vec<OpenClique> = Vec::new();
    for (p, c) in terms {
        match open.iter_mut().find(|cl| cl.accepts(&p)) {
            Some(cl) => cl.push(p, c),
            None => {
                let mut cl = OpenClique {
                    members: Vec::new(),
                    x: 0,
                    z: 0,
                    support: 0,
                };
                cl.push(p, c);
                open.push(cl);
            }
        }
    }
    let all = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    open.into_iter()
        .enumerate()
        .map(|(id, cl)| {
            let unset = all & !cl.support;
            MeasurementClique {
                id,
                members: cl.members,
                basis: PauliString::from_masks(n, cl.x, cl.z | unset),
            }
        })
        .collect()
}

/// An observable split into a constant offset and measurable cliques.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupedObservable {
    pub n_qubits: usize,
    /// Identity coefficient; contributes without any shots.
    pub constant: f64,
    pub cliques: Vec<MeasurementClique>,
}

impl GroupedObservable {
    pub fn new(obs: &PauliSum) -> Self {
        GroupedObservable {
            n_qubits: obs.n_qubits(),
            constant: obs.identity_coefficient().re,
            cliques: group_qwc(obs),
        }
    }

    pub fn n_cliques(&self) -> usize {
        self.cliques.len()
    }

    pub fn n_terms(&self) -> usize {
        self.cliques.iter().map(|c| c.len()).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    fn sum(terms: &[(&str, f64)]) -> PauliSum {
        let v: Vec<(&str, Complex64)> = terms.iter().map(|(s, c)| (*s, Complex64::new(*c, 0.0))).collect();
        PauliSum::from_labels(&v).unwrap()
    }

    #[test]
    fn single_term() {
        let cl = group_qwc(&sum(&[("ZZ", 1.0)]));
        assert_eq!(cl.len(), 1);
        assert_eq!(cl[0].basis.to_string(), "ZZ");
    }

    #[test]
    fn identity_only_gives_no_cliques() {
        let g = GroupedObservable::new(&sum(&[("II", -0.5)]));
        assert!(g.cliques.is_empty());
        assert_eq!(g.constant, -0.5);
    }

    #[test]
    fn idle_positions_resolve_to_z() {
        let cl = group_qwc(&sum(&[("XI", 1.0)]));
        assert_eq!(cl[0].basis.to_string(), "XZ");
    }

    #[test]
    fn greedy_follows_coefficient_order() {
        // XX is largest and opens clique 0; YY cannot join; XI joins XX.
        let cl = group_qwc(&sum(&[("XX", 0.9), ("YY", 0.5), ("XI", 0.1), ("IY", 0.05)]));
        assert_eq!(cl.len(), 2);
        assert_eq!(
            cl[0].members.iter().map(|m| m.0.to_string()).collect::<Vec<_>>(),
            ["XX", "XI"]
        );
        assert_eq!(
            cl[1].members.iter().map(|m| m.0.to_string()).collect::<Vec<_>>(),
            ["YY", "IY"]
        );
    }

    #[test]
    fn coverage_uses_basis_axes() {
        let cl = &group_qwc(&sum(&[("ZZZZ", 1.0)]))[0];
        assert!(cl.covers(&"ZIZI".parse().unwrap()));
        assert!(!cl.covers(&"YYYY".parse().unwrap()));
    }
}
