//! Library results against independent dense-matrix oracles.

mod common;

use common::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use shotwise_core::adapt::AnsatzState;
use shotwise_core::fermion::{jordan_wigner, FermionOperator};
use shotwise_core::measurement::group_qwc;
use shotwise_core::{
    build_pool, evolve, expectation_exact, hartree_fock_state, Pauli, PauliString, PauliSum, PoolKind, Statevector,
};

fn pauli_string(n: usize) -> impl Strategy<Value = PauliString> {
    prop::collection::vec(0u8..4, n).prop_map(|v| {
        let axes: Vec<Pauli> = v
            .into_iter()
            .map(|k| [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z][k as usize])
            .collect();
        PauliString::from_axes(&axes)
    })
}

fn pauli_sum(n: usize, max_terms: usize) -> impl Strategy<Value = PauliSum> {
    prop::collection::vec((pauli_string(n), -2.0f64..2.0, -2.0f64..2.0), 1..max_terms)
        .prop_map(move |terms| PauliSum::from_terms(n, terms.into_iter().map(|(p, re, im)| (p, c(re, im)))).unwrap())
}

fn random_state(n: usize, rng: &mut ChaCha8Rng) -> Statevector {
    let amps = (0..1usize << n)
        .map(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect();
    Statevector::from_amplitudes(amps).unwrap()
}

#[test]
fn multiply_matches_dense_exhaustively_on_two_qubits() {
    let all: Vec<PauliString> = (0..16)
        .map(|k| {
            let axes = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];
            PauliString::from_axes(&[axes[k / 4], axes[k % 4]])
        })
        .collect();
    for a in &all {
        for b in &all {
            let (phase, prod) = a.multiply(b).unwrap();
            let lhs = dense_string(a).matmul(&dense_string(b));
            let rhs = dense_string(&prod).scale(phase.to_complex());
            assert!(lhs.sub(&rhs).max_abs() < 1e-15, "{a} * {b}");
            let commute = lhs.sub(&dense_string(b).matmul(&dense_string(a))).max_abs() < 1e-15;
            assert_eq!(a.commutes(b).unwrap(), commute, "{a} vs {b}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn multiply_matches_dense(a in pauli_string(5), b in pauli_string(5)) {
        let (phase, prod) = a.multiply(&b).unwrap();
        let lhs = dense_string(&a).matmul(&dense_string(&b));
        let rhs = dense_string(&prod).scale(phase.to_complex());
        prop_assert!(lhs.sub(&rhs).max_abs() < 1e-15);
    }

    #[test]
    fn commutes_matches_dense(a in pauli_string(4), b in pauli_string(4)) {
        let (da, db) = (dense_string(&a), dense_string(&b));
        let commute = da.matmul(&db).sub(&db.matmul(&da)).max_abs() < 1e-15;
        prop_assert_eq!(a.commutes(&b).unwrap(), commute);
        if a.qubit_wise_commutes(&b).unwrap() {
            prop_assert!(commute);
        }
    }

    #[test]
    fn commutator_matches_dense(h in pauli_sum(4, 8), a in pauli_sum(4, 6)) {
        let got = dense_sum(&h.commutator(&a).unwrap());
        let (dh, da) = (dense_sum(&h), dense_sum(&a));
        let want = dh.matmul(&da).sub(&da.matmul(&dh));
        prop_assert!(got.sub(&want).max_abs() <= 1e-12);
    }
}

#[test]
fn commutator_with_pool_generators_matches_dense() {
    for (name, n) in [("h2", 4), ("lih_reduced", 4), ("h3", 6)] {
        let h = fixture(name);
        let dh = dense_sum(&h.operator);
        for kind in PoolKind::ALL {
            for op in build_pool(kind, h.n_electrons(), n).unwrap() {
                for g in &op.generators {
                    let dg = dense_sum(g);
                    let want = dh.matmul(&dg).sub(&dg.matmul(&dh));
                    let got = dense_sum(&h.operator.commutator(g).unwrap());
                    assert!(got.sub(&want).max_abs() <= 1e-12, "{name} {}", op.label());
                }
            }
        }
    }
}

#[test]
fn evolve_matches_matrix_exponential() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for (ne, n) in [(2, 4), (3, 6)] {
        for kind in PoolKind::ALL {
            let pool = build_pool(kind, ne, n).unwrap();
            // Every operator on 4 qubits; a spread sample on 6.
            let step = if n == 4 { 1 } else { (pool.len() / 12).max(1) };
            for op in pool.iter().step_by(step) {
                let psi = random_state(n, &mut rng);
                let theta: Vec<f64> = (0..op.n_parameters()).map(|_| rng.random_range(-3.0..3.0)).collect();
                let got = evolve(&psi, op, &theta).unwrap();
                let mut want = psi.amplitudes().to_vec();
                for (g, t) in op.generators.iter().zip(&theta) {
                    want = expm(&dense_sum(g).scale(c(*t, 0.0))).apply(&want);
                }
                let err = max_diff(got.amplitudes(), &want);
                assert!(err <= 1e-10, "{} on {n} qubits: {err:e}", op.label());
            }
        }
    }
}

#[test]
fn expectation_matches_dense() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for name in ["h2", "lih_reduced", "h3"] {
        let h = fixture(name);
        let psi = random_state(h.n_qubits(), &mut rng);
        let want = dense_expectation(&dense_sum(&h.operator), psi.amplitudes());
        let got = expectation_exact(&psi, &h.operator).unwrap();
        assert!(want.im.abs() < 1e-12);
        assert!((got - want.re).abs() < 1e-12, "{name}: {got} vs {}", want.re);
    }
}

#[test]
fn hartree_fock_energy_matches_file() {
    for name in ["h2", "lih_reduced", "h3", "h4"] {
        let h = fixture(name);
        let e = expectation_exact(&hartree_fock_state(&h), &h.operator).unwrap();
        assert!((e - h.hf_energy()).abs() <= 1e-8, "{name}: {e} vs {}", h.hf_energy());
    }
}

#[test]
fn jordan_wigner_anticommutation() {
    let n = 4;
    let ladder = |mode: usize, dagger: bool| {
        let op = FermionOperator::term(n, &[(mode, dagger)], c(1.0, 0.0)).unwrap();
        dense_sum(&jordan_wigner(&op, n).unwrap())
    };
    for p in 0..n {
        for q in 0..n {
            let (ap, aq_dag) = (ladder(p, false), ladder(q, true));
            let anti = ap.matmul(&aq_dag).add(&aq_dag.matmul(&ap));
            let want = if p == q {
                Dense::identity(1 << n)
            } else {
                Dense::zeros(1 << n)
            };
            assert!(anti.sub(&want).max_abs() < 1e-14, "{{a_{p}, a_{q}^dag}}");
            let (ap, aq) = (ladder(p, false), ladder(q, false));
            assert!(
                ap.matmul(&aq).add(&aq.matmul(&ap)).max_abs() < 1e-14,
                "{{a_{p}, a_{q}}}"
            );
        }
    }
}

#[test]
fn qubit_excitation_double_couples_only_its_two_determinants() {
    let pool = build_pool(PoolKind::QubitExcitation, 2, 4).unwrap();
    let op = pool
        .iter()
        .find(|o| o.sources == [0, 1] && o.targets == [2, 3])
        .unwrap();
    let g = dense_sum(&op.generators[0]);
    // |1100> is index 12 and |0011> is index 3 with qubit 0 most significant.
    for i in 0..16 {
        for j in 0..16 {
            let v = g.at(i, j);
            match (i, j) {
                (3, 12) | (12, 3) => assert!((v.norm() - 1.0).abs() < 1e-14, "({i},{j}) = {v}"),
                _ => assert!(v.norm() < 1e-14, "({i},{j}) = {v}"),
            }
        }
    }
    assert!(
        (g.at(3, 12) + g.at(12, 3)).norm() < 1e-14,
        "generator is skew-Hermitian"
    );
}

#[test]
fn measured_probabilities_reproduce_diagonal_terms() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let h = fixture("lih_reduced");
    let psi = random_state(4, &mut rng);
    for clique in group_qwc(&h.operator) {
        let probs = psi.basis_probabilities(&clique.basis).unwrap();
        for (term, _) in &clique.members {
            let d = dense_string(term);
            let want = dense_expectation(&d, psi.amplitudes()).re;
            // Eigenvalue of a diagonal term: parity of the measured bits in its support.
            let got: f64 = probs
                .iter()
                .enumerate()
                .map(|(b, p)| {
                    let ones = (0..4)
                        .filter(|&q| term.get(q) != Pauli::I && (b >> (3 - q)) & 1 == 1)
                        .count();
                    if ones % 2 == 0 {
                        *p
                    } else {
                        -p
                    }
                })
                .sum();
            assert!((got - want).abs() < 1e-12, "{term}: {got} vs {want}");
        }
    }
}

#[test]
fn gradient_matches_central_difference() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for name in ["h2", "lih_reduced", "h3"] {
        let h = fixture(name);
        for kind in PoolKind::ALL {
            let pool = build_pool(kind, h.n_electrons(), h.n_qubits()).unwrap();
            // A generic state: two pool operators at random angles on the reference.
            let mut base = AnsatzState::new(h.n_qubits(), h.hf_index());
            for k in [pool.len() / 3, pool.len() - 1] {
                base.push(pool[k].clone());
            }
            for t in base.theta.iter_mut() {
                *t = rng.random_range(-0.5..0.5);
            }
            let psi = base.state().unwrap();
            let step = (pool.len() / 10).max(1);
            for op in pool.iter().step_by(step) {
                for (j, g) in op.generators.iter().enumerate() {
                    let analytic = expectation_exact(&psi, &h.operator.commutator(g).unwrap()).unwrap();
                    let mut trial = base.clone();
                    trial.push(op.clone());
                    let slot = base.theta.len() + j;
                    let energy = |t: f64| {
                        let mut theta = trial.theta.clone();
                        theta[slot] = t;
                        expectation_exact(&trial.state_at(&theta).unwrap(), &h.operator).unwrap()
                    };
                    let fd = (energy(1e-5) - energy(-1e-5)) / 2e-5;
                    assert!(
                        (analytic - fd).abs() <= 1e-6,
                        "{name} {}: {analytic} vs {fd}",
                        op.label()
                    );
                }
            }
        }
    }
}
