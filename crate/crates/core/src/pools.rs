//! The four ADAPT operator pools: fermionic, qubit, qubit-excitation and
//! coupled-exchange (CEO).
//!
//! Spin orbitals are interleaved: qubit `2p` is the alpha spin orbital of
//! spatial orbital `p`, qubit `2p + 1` the beta one. Only excitations that
//! conserve total S_z are generated. Every generator is skew-Hermitian and
//! its Pauli terms commute pairwise, which lets the state engine apply
//! `exp(θ G)` as a product of single-Pauli rotations.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fermion::{jordan_wigner, FermionOperator};
use crate::pauli::{PauliString, PauliSum};

/// Pool requested by the user.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PoolKind {
    Fermionic,
    Qubit,
    QubitExcitation,
    Ceo,
}

impl PoolKind {
    pub const ALL: [PoolKind; 4] = [
        PoolKind::Fermionic,
        PoolKind::Qubit,
        PoolKind::QubitExcitation,
        PoolKind::Ceo,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PoolKind::Fermionic => "fermionic",
            PoolKind::Qubit => "qubit",
            PoolKind::QubitExcitation => "qubit_excitation",
            PoolKind::Ceo => "ceo",
        }
    }
}

impl fmt::Display for PoolKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PoolKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "fermionic" | "fermion" => Ok(PoolKind::Fermionic),
            "qubit" => Ok(PoolKind::Qubit),
            "qubit_excitation" | "qe" => Ok(PoolKind::QubitExcitation),
            "ceo" | "dvg_ceo" => Ok(PoolKind::Ceo),
            other => Err(Error::InvalidPool(format!("unknown pool kind {other:?}"))),
        }
    }
}

/// Kind of an individual pool operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OperatorKind {
    Fermionic,
    Qubit,
    QubitExcitation,
    CeoOvpPlus,
    CeoOvpMinus,
    CeoMvp,
}

impl OperatorKind {
    pub fn name(self) -> &'static str {
        match self {
            OperatorKind::Fermionic => "fermionic",
            OperatorKind::Qubit => "qubit",
            OperatorKind::QubitExcitation => "qubit_excitation",
            OperatorKind::CeoOvpPlus => "ceo_ovp_plus",
            OperatorKind::CeoOvpMinus => "ceo_ovp_minus",
            OperatorKind::CeoMvp => "ceo_mvp",
        }
    }
}

impl fmt::Display for OperatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PoolOperator {
    /// Position in the pool it was built for.
    pub id: usize,
    pub kind: OperatorKind,
    /// Orbitals that are emptied by the excitation (for the qubit pool: the
    /// qubits carrying X or Y).
    pub sources: Vec<usize>,
    /// Orbitals that are filled; empty for the qubit pool.
    pub targets: Vec<usize>,
    /// One skew-Hermitian generator per variational parameter.
    pub generators: Vec<PauliSum>,
    /// For CEO operators: shared by the OVP(+), OVP(−) and MVP built from the
    /// same pair of qubit excitations.
    pub family: Option<usize>,
}

impl PoolOperator {
    fn new(
        kind: OperatorKind,
        sources: Vec<usize>,
        targets: Vec<usize>,
        generators: Vec<PauliSum>,
        family: Option<usize>,
    ) -> Self {
        for g in &generators {
            assert!(!g.is_empty(), "empty generator");
            assert!(g.is_skew_hermitian(1e-14), "generator is not skew-Hermitian: {g}");
            assert!(g.terms_mutually_commute(), "generator terms do not commute: {g}");
        }
        PoolOperator {
            id: 0,
            kind,
            sources,
            targets,
            generators,
            family,
        }
    }

    pub fn n_parameters(&self) -> usize {
        self.generators.len()
    }

    pub fn n_qubits(&self) -> usize {
        self.generators[0].n_qubits()
    }

    /// Short human-readable label such as `qubit_excitation(0,1->2,3)`.
    pub fn label(&self) -> String {
        let join = |v: &[usize]| v.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(",");
        if self.targets.is_empty() {
            format!("{}({})", self.kind, join(&self.sources))
        } else {
            format!("{}({}->{})", self.kind, join(&self.sources), join(&self.targets))
        }
    }

    /// One dump line: id, kind, indices, Pauli expansion of each generator.
    pub fn dump_line(&self) -> String {
        let expansion = self
            .generators
            .iter()
            .map(|g| {
                g.iter()
                    .map(|(p, c)| format!("{:+}i·{}", c.im, p))
                    .collect::<Vec<_>>()
                    .join(" ")
            })
            .collect::<Vec<_>>()
            .join(" | ");
        format!("{}\t{}\t{}", self.id, self.label(), expansion)
    }
}

fn spin(orbital: usize) -> usize {
    orbital % 2
}

fn check_sizes(n_electrons: usize, n_qubits: usize) -> Result<()> {
    if n_qubits == 0 || !n_qubits.is_multiple_of(2) {
        return Err(Error::InvalidPool(format!(
            "number of qubits must be even and positive, got {n_qubits}"
        )));
    }
    if n_electrons == 0 || n_electrons >= n_qubits {
        return Err(Error::InvalidPool(format!(
            "need 0 < n_electrons < n_qubits, got {n_electrons} electrons on {n_qubits} qubits"
        )));
    }
    Ok(())
}

/// A fermionic excitation before pool-specific post-processing.
struct Excitation {
    sources: Vec<usize>,
    targets: Vec<usize>,
    image: PauliSum,
}

/// Spin-conserving generalized singles and doubles, mapped through
/// Jordan–Wigner, in ascending index order.
fn excitations(n_qubits: usize) -> Result<Vec<Excitation>> {
    let mut out = Vec::new();
    for i in 0..n_qubits {
        for a in i + 1..n_qubits {
            if spin(i) != spin(a) {
                continue;
            }
            let t = FermionOperator::single_excitation(n_qubits, i, a)?;
            out.push(Excitation {
                sources: vec![i],
                targets: vec![a],
                image: jordan_wigner(&t, n_qubits)?,
            });
        }
    }
    for p in 0..n_qubits {
        for q in p + 1..n_qubits {
            for r in q + 1..n_qubits {
                for s in r + 1..n_qubits {
                    for ((i, j), (a, b)) in [((p, q), (r, s)), ((p, r), (q, s)), ((p, s), (q, r))] {
                        let mut from = [spin(i), spin(j)];
                        let mut to = [spin(a), spin(b)];
                        from.sort_unstable();
                        to.sort_unstable();
                        if from != to {
                            continue;
                        }
                        let t = FermionOperator::double_excitation(n_qubits, i, j, a, b)?;
                        out.push(Excitation {
                            sources: vec![i, j],
                            targets: vec![a, b],
                            image: jordan_wigner(&t, n_qubits)?,
                        });
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Drops generators equal (up to sign) to an earlier one and assigns ids.
fn finish(ops: Vec<PoolOperator>) -> Vec<PoolOperator> {
    let mut kept: Vec<PoolOperator> = Vec::with_capacity(ops.len());
    for op in ops {
        let duplicate = kept.iter().any(|k| {
            k.kind == op.kind
                && k.generators.len() == op.generators.len()
                && k.generators
                    .iter()
                    .zip(&op.generators)
                    .all(|(a, b)| a.equal_up_to_sign(b, 1e-12))
        });
        if !duplicate {
            kept.push(op);
        }
    }
    for (id, op) in kept.iter_mut().enumerate() {
        op.id = id;
    }
    kept
}

fn strip_z(image: &PauliSum) -> Result<PauliSum> {
    PauliSum::from_terms(image.n_qubits(), image.iter().map(|(p, c)| (p.without_z(), *c)))
}

pub fn build_fermionic_pool(n_electrons: usize, n_qubits: usize) -> Result<Vec<PoolOperator>> {
    check_sizes(n_electrons, n_qubits)?;
    let ops = excitations(n_qubits)?
        .into_iter()
        .map(|e| PoolOperator::new(OperatorKind::Fermionic, e.sources, e.targets, vec![e.image], None))
        .collect();
    Ok(finish(ops))
}

/// Individual Z-stripped Pauli strings of the fermionic images, each as `i·P`.
pub fn build_qubit_pool(n_electrons: usize, n_qubits: usize) -> Result<Vec<PoolOperator>> {
    check_sizes(n_electrons, n_qubits)?;
    let mut seen = HashSet::new();
    let mut ops = Vec::new();
    for e in excitations(n_qubits)? {
        for (p, _) in e.image.iter() {
            let stripped = p.without_z();
            if !seen.insert(stripped) {
                continue;
            }
            let support: Vec<usize> = (0..n_qubits)
                .filter(|&q| stripped.support_mask() >> q & 1 == 1)
                .collect();
            let g = PauliSum::single(stripped, Complex64::new(0.0, 1.0));
            ops.push(PoolOperator::new(
                OperatorKind::Qubit,
                support,
                Vec::new(),
                vec![g],
                None,
            ));
        }
    }
    Ok(finish(ops))
}

/// Qubit excitations: fermionic images with every parity string removed.
pub fn build_qe_pool(n_electrons: usize, n_qubits: usize) -> Result<Vec<PoolOperator>> {
    check_sizes(n_electrons, n_qubits)?;
    let mut ops = Vec::new();
    for e in excitations(n_qubits)? {
        let g = strip_z(&e.image)?;
        ops.push(PoolOperator::new(
            OperatorKind::QubitExcitation,
            e.sources,
            e.targets,
            vec![g],
            None,
        ));
    }
    Ok(finish(ops))
}

/// QE singles, then for each pair of double QEs acting on the same four
/// qubits: OVP(+) = QE_a + QE_b, OVP(−) = QE_a − QE_b and the two-parameter
/// MVP with generators `[QE_a, QE_b]`.
pub fn build_ceo_pool(n_electrons: usize, n_qubits: usize) -> Result<Vec<PoolOperator>> {
    let qe = build_qe_pool(n_electrons, n_qubits)?;
    let mut ops = Vec::new();
    let mut by_quad: BTreeMap<Vec<usize>, Vec<&PoolOperator>> = BTreeMap::new();
    for op in &qe {
        if op.sources.len() == 1 {
            ops.push(op.clone());
        } else {
            let mut quad: Vec<usize> = op.sources.iter().chain(&op.targets).copied().collect();
            quad.sort_unstable();
            by_quad.entry(quad).or_default().push(op);
        }
    }
    let mut family = 0;
    for doubles in by_quad.values() {
        for x in 0..doubles.len() {
            for y in x + 1..doubles.len() {
                let (a, b) = (&doubles[x].generators[0], &doubles[y].generators[0]);
                let sources = doubles[x].sources.clone();
                let targets = doubles[x].targets.clone();
                ops.push(PoolOperator::new(
                    OperatorKind::CeoOvpPlus,
                    sources.clone(),
                    targets.clone(),
                    vec![a.add(b)?],
                    Some(family),
                ));
                ops.push(PoolOperator::new(
                    OperatorKind::CeoOvpMinus,
                    sources.clone(),
                    targets.clone(),
                    vec![a.sub(b)?],
                    Some(family),
                ));
                let mut mvp_targets = targets;
                mvp_targets.extend(doubles[y].sources.iter().chain(&doubles[y].targets));
                ops.push(PoolOperator::new(
                    OperatorKind::CeoMvp,
                    sources,
                    mvp_targets,
                    vec![a.clone(), b.clone()],
                    Some(family),
                ));
                family += 1;
            }
        }
    }
    Ok(finish(ops))
}

pub fn build_pool(kind: PoolKind, n_electrons: usize, n_qubits: usize) -> Result<Vec<PoolOperator>> {
    match kind {
        PoolKind::Fermionic => build_fermionic_pool(n_electrons, n_qubits),
        PoolKind::Qubit => build_qubit_pool(n_electrons, n_qubits),
        PoolKind::QubitExcitation => build_qe_pool(n_electrons, n_qubits),
        PoolKind::Ceo => build_ceo_pool(n_electrons, n_qubits),
    }
}

/// Renders a pool as one line per operator.
pub fn dump_pool(pool: &[PoolOperator]) -> String {
    let mut out = String::new();
    for op in pool {
        out.push_str(&op.dump_line());
        out.push('\n');
    }
    out
}

/// Convenience for tests and callers that want a `PauliString` lookup.
pub fn generator_strings(op: &PoolOperator) -> Vec<PauliString> {
    op.generators.iter().flat_map(|g| g.iter().map(|(p, _)| *p)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn invalid_sizes() {
        assert!(build_fermionic_pool(0, 4).is_err());
        assert!(build_qubit_pool(4, 4).is_err());
        assert!(build_qe_pool(2, 5).is_err());
    }

    #[test]
    fn h2_pool_sizes() {
        // Singles 0→2, 1→3; doubles (0,1→2,3) and (0,3→1,2).
        assert_eq!(build_fermionic_pool(2, 4).unwrap().len(), 4);
        assert_eq!(build_qe_pool(2, 4).unwrap().len(), 4);
        assert_eq!(build_qubit_pool(2, 4).unwrap().len(), 12);
        // Two singles plus one OVP(+), OVP(−), MVP triple.
        let ceo = build_ceo_pool(2, 4).unwrap();
        let kinds: Vec<_> = ceo.iter().map(|o| o.kind).collect();
        assert_eq!(
            kinds,
            [
                OperatorKind::QubitExcitation,
                OperatorKind::QubitExcitation,
                OperatorKind::CeoOvpPlus,
                OperatorKind::CeoOvpMinus,
                OperatorKind::CeoMvp
            ]
        );
        assert_eq!(ceo[4].n_parameters(), 2);
    }

    #[test]
    fn qubit_pool_is_single_imaginary_strings() {
        for op in build_qubit_pool(2, 4).unwrap() {
            assert_eq!(op.generators.len(), 1);
            let g = &op.generators[0];
            assert_eq!(g.len(), 1);
            let (p, c) = g.iter().next().unwrap();
            assert_eq!(*c, Complex64::new(0.0, 1.0));
            assert_eq!(p.without_z(), *p);
            assert!(p.y_count() % 2 == 1);
        }
    }

    #[test]
    fn single_qe_on_zero_two() {
        let qe = build_qe_pool(2, 4).unwrap();
        let g = &qe[0].generators[0];
        let expected =
            PauliSum::from_labels(&[("XIYI", Complex64::new(0.0, 0.5)), ("YIXI", Complex64::new(0.0, -0.5))]).unwrap();
        assert!(g.equal_up_to_sign(&expected, 1e-14), "{g}");
    }

    #[test]
    fn ovp_plus_is_termwise_sum() {
        let qe = build_qe_pool(2, 4).unwrap();
        let ceo = build_ceo_pool(2, 4).unwrap();
        let sum = qe[2].generators[0].add(&qe[3].generators[0]).unwrap();
        assert_eq!(ceo[2].generators[0], sum);
        assert_eq!(ceo[4].generators[0], qe[2].generators[0]);
        assert_eq!(ceo[4].generators[1], qe[3].generators[0]);
    }

    #[test]
    fn pools_are_deterministic() {
        for kind in PoolKind::ALL {
            assert_eq!(build_pool(kind, 2, 4).unwrap(), build_pool(kind, 2, 4).unwrap());
        }
    }

    #[test]
    fn kind_parsing() {
        assert_eq!("qe".parse::<PoolKind>().unwrap(), PoolKind::QubitExcitation);
        assert_eq!(
            "qubit-excitation".parse::<PoolKind>().unwrap(),
            PoolKind::QubitExcitation
        );
        assert!("bogus".parse::<PoolKind>().is_err());
    }
}
