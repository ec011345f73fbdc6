use nalgebra::DMatrix;
use proptest::prelude::*;

use isingqpe::tim::{
    build_hamiltonian, ground_state, parse_golden, Spectrum, TimInstance, BUILTIN_GOLDEN_ENERGIES,
    DENSE_QUBIT_CAP,
};
use isingqpe::{Error, Instance};

/// Free-fermion ground energy of the open chain: minus the sum of the
/// singular values of the bidiagonal matrix `diag(g) + superdiag(1)`, times J.
fn free_fermion_ground(n: usize, g: f64, j: f64) -> f64 {
    let b = DMatrix::from_fn(n, n, |r, c| match c as isize - r as isize {
        0 => g,
        1 => 1.0,
        _ => 0.0,
    });
    -j * b.singular_values().sum()
}

/// Closed form at the critical point: `E = J (1 - 1 / sin(π / (2(2N+1))))`.
fn critical_ground(n: usize) -> f64 {
    1.0 - 1.0 / (std::f64::consts::PI / (2.0 * (2.0 * n as f64 + 1.0))).sin()
}

#[test]
fn ground_energies_match_free_fermions() {
    for n in 1..=10 {
        // Off-critical couplings on the smaller chains keep the run short.
        let fields: &[f64] = if n <= 8 { &[0.3, 1.0, 2.5] } else { &[] };
        for &g in fields {
            for &j in &[1.0, 0.7] {
                let inst = Instance::new(n, 1).unwrap().with_field(g).unwrap().with_coupling(j).unwrap();
                let e = ground_state(&build_hamiltonian(&inst).unwrap()).unwrap().energy;
                let want = free_fermion_ground(n, g, j);
                assert!((e - want).abs() < 1e-9, "N={n} g={g} J={j}: {e} vs {want}");
            }
        }
        let e = ground_state(&build_hamiltonian(&Instance::new(n, 1).unwrap()).unwrap()).unwrap().energy;
        assert!((e - critical_ground(n)).abs() < 1e-9);
    }
}

#[test]
fn two_spins_give_minus_root_five() {
    let e = ground_state(&build_hamiltonian(&Instance::new(2, 1).unwrap()).unwrap()).unwrap().energy;
    assert!((e + 5f64.sqrt()).abs() < 1e-12);
}

#[test]
fn shipped_golden_table_is_reproducible() {
    let records = parse_golden(BUILTIN_GOLDEN_ENERGIES).unwrap();
    assert!(records.len() >= 10);
    for r in records {
        let want = free_fermion_ground(r.n, r.g, r.j);
        assert!((r.energy - want).abs() < 1e-9 * (1.0 + want.abs()), "{r:?}");
    }
}

#[test]
fn single_precision_tracks_double() {
    for n in 2..=6 {
        let e64 = ground_state(&build_hamiltonian(&TimInstance::<f64>::new(n, 1).unwrap()).unwrap())
            .unwrap()
            .energy;
        let e32 = ground_state(&build_hamiltonian(&TimInstance::<f32>::new(n, 1).unwrap()).unwrap())
            .unwrap()
            .energy;
        assert!((f64::from(e32) - e64).abs() < 1e-4);
    }
}

#[test]
fn classical_limit_is_degenerate() {
    // g = 0 leaves the two ferromagnetic states.
    let inst = Instance::new(4, 1).unwrap().with_field(0.0).unwrap();
    let gs = ground_state(&build_hamiltonian(&inst).unwrap()).unwrap();
    assert!(gs.degenerate);
    assert!((gs.energy + 3.0).abs() < 1e-12);
    assert_eq!(gs.ground_space.ncols(), 2);
}

#[test]
fn invalid_and_oversized_inputs() {
    assert!(matches!(Instance::new(0, 1), Err(Error::Validation(_))));
    assert!(Instance::new(3, 1).unwrap().with_coupling(0.0).is_err());
    assert!(Instance::new(3, 1).unwrap().with_field(-1.0).is_err());
    let big = Instance::new(DENSE_QUBIT_CAP + 1, 1).unwrap();
    assert!(matches!(build_hamiltonian(&big), Err(Error::Capacity { .. })));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]
    #[test]
    fn spectrum_respects_the_bound(n in 1usize..7, g in 0.0f64..3.0, j in 0.1f64..2.0) {
        let inst = Instance::new(n, 1).unwrap().with_field(g).unwrap().with_coupling(j).unwrap();
        let h = build_hamiltonian(&inst).unwrap();
        prop_assert!(h.is_hermitian(1e-12));
        let s = Spectrum::of(&h).unwrap();
        let bound = inst.bound_energy() + 1e-9;
        prop_assert!(s.values.iter().all(|e| e.abs() <= bound));
        prop_assert!(s.values.windows(2).all(|w| w[0] <= w[1]));
    }
}
