use qkalman_bench::{dense, example, planted};
use qkalman_core::decomposition::Dims;
use qkalman_core::pipeline::{decompose, DecomposeOptions};

#[test]
fn generators_are_deterministic() {
    assert_eq!(dense(3, 2, 11).hamiltonian(), dense(3, 2, 11).hamiltonian());
    assert_eq!(planted(5, 1, 11).coupling(), planted(5, 1, 11).coupling());
    assert_ne!(dense(3, 2, 11).hamiltonian(), dense(3, 2, 12).hamiltonian());
}

#[test]
fn largest_planted_workload_decomposes() {
    let dec = decompose(&planted(16, 2, 7), &DecomposeOptions::default()).unwrap();
    assert!(dec.passed(), "{:?}", dec.checks());
    assert_eq!(dec.dims(), Dims { n1: 1, n2: 14, n3: 1 });
}

#[test]
fn example_workload_has_unit_blocks() {
    let dec = decompose(&example(), &DecomposeOptions::default()).unwrap();
    assert_eq!(dec.dims(), Dims { n1: 1, n2: 1, n3: 1 });
}
