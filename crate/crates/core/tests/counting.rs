use std::path::PathBuf;

use shotwise_core::measurement::{count_report, group_qwc};
use shotwise_core::{load_hamiltonian, Hamiltonian, PoolKind};

fn fixture(name: &str) -> Hamiltonian {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../data/hamiltonians")
        .join(name);
    load_hamiltonian(path).unwrap()
}

#[test]
fn h2_counts() {
    let h = fixture("h2.json");
    let got: Vec<(usize, usize)> = PoolKind::ALL
        .iter()
        .map(|k| {
            let r = count_report(&h, *k).unwrap();
            (r.full, r.reused)
        })
        .collect();
    assert_eq!(got[1], (88, 24));
    assert_eq!(got[2], (36, 8));
    assert_eq!(got[3], (60, 16));
    // Generalized spin-conserving fermionic pool.
    assert_eq!(got[0], (44, 12));
}

#[test]
fn hamiltonian_clique_counts() {
    assert_eq!(group_qwc(&fixture("h2.json").operator).len(), 5);
    assert_eq!(group_qwc(&fixture("lih_reduced.json").operator).len(), 9);
}

#[test]
fn reused_never_exceeds_full() {
    for name in ["h2.json", "h3.json", "lih_reduced.json"] {
        let h = fixture(name);
        for k in PoolKind::ALL {
            let r = count_report(&h, k).unwrap();
            assert!(r.reused < r.full, "{name} {k}: {} vs {}", r.reused, r.full);
            assert!(r.grouped <= r.grouped_per_operator);
        }
    }
}
