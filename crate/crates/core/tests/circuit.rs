use nalgebra::DMatrix;
use num_complex::Complex;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use isingqpe::circuit::{build_cat_state, Circuit, ClassicalRegister, Gate, GateKind};
use isingqpe::state::StateVector;
use isingqpe::trotter::{build_controlled_u, ux_body, uzz_body, TrotterPlan};
use isingqpe::Instance;

type C = Complex<f64>;

fn c(re: f64) -> C {
    C::new(re, 0.0)
}

/// Explicit 4×4 CNOT with the first wire as the most significant bit.
fn cnot_01() -> DMatrix<C> {
    let mut m = DMatrix::zeros(4, 4);
    for (r, col) in [(0, 0), (1, 1), (3, 2), (2, 3)] {
        m[(r, col)] = c(1.0);
    }
    m
}

fn kron(a: &DMatrix<C>, b: &DMatrix<C>) -> DMatrix<C> {
    a.kronecker(b)
}

#[test]
fn wire_order_and_gate_matrices() {
    let u = Circuit::from_gates(2, vec![Gate::cnot(0, 1)]).unwrap().unitary::<f64>().unwrap();
    assert!((u - cnot_01()).norm() < 1e-14);
    let s2 = std::f64::consts::FRAC_1_SQRT_2;
    let h = DMatrix::from_row_slice(2, 2, &[c(s2), c(s2), c(s2), c(-s2)]);
    let id = DMatrix::<C>::identity(2, 2);
    let u = Circuit::from_gates(2, vec![Gate::single(GateKind::H, 1)]).unwrap().unitary::<f64>().unwrap();
    assert!((u - kron(&id, &h)).norm() < 1e-14);
    let a = 0.7;
    let rz = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
        C::from_polar(1.0, -a / 2.0),
        C::from_polar(1.0, a / 2.0),
    ]));
    let u = Circuit::from_gates(2, vec![Gate::rz(0, a)]).unwrap().unitary::<f64>().unwrap();
    assert!((u - kron(&rz, &id)).norm() < 1e-14);
}

#[test]
fn cat_state_is_ghz() {
    for n in 1..=6 {
        for root in [0, n - 1] {
            let mut s = StateVector::<f64>::zero(n);
            s.apply_single(root, &isingqpe::state::hadamard()).unwrap();
            build_cat_state(n, root).unwrap().apply_unitary(&mut s).unwrap();
            let a = s.amplitudes();
            let r = std::f64::consts::FRAC_1_SQRT_2;
            assert!((a[0].re - r).abs() < 1e-14);
            assert!((a[(1 << n) - 1].re - r).abs() < 1e-14);
            assert!((s.norm_sqr() - 1.0).abs() < 1e-14);
        }
    }
}

#[test]
fn inverse_composes_to_identity() {
    let inst = Instance::new(3, 3).unwrap();
    let plan = TrotterPlan::fixed(2, 3).unwrap();
    let c = build_controlled_u(1, &plan, &inst).unwrap();
    let mut both = c.clone();
    both.append(&c.inverse().unwrap()).unwrap();
    let u = both.unitary::<f64>().unwrap();
    let d = u.nrows();
    assert!((u - DMatrix::<C>::identity(d, d)).norm() < 1e-10);
}

#[test]
fn text_format_round_trips() {
    let inst = Instance::new(3, 2).unwrap();
    let c = build_controlled_u(1, &TrotterPlan::fixed(1, 2).unwrap(), &inst).unwrap();
    let back = Circuit::parse(&c.to_text()).unwrap();
    assert_eq!(back.len(), c.len());
    assert!((back.unitary::<f64>().unwrap() - c.unitary::<f64>().unwrap()).norm() < 1e-12);
    assert!(Circuit::parse("qubits 2\nfrobnicate 0").is_err());
}

#[test]
fn rotation_layers_have_fixed_depth() {
    // Field layer: H, Rz, CNOT, Rz, CNOT, H on every spin at once.
    // Bond layer: the same pattern twice, once per bond parity.
    for n in 3..=8 {
        for sr in [1u64, 7, 250] {
            assert_eq!(ux_body(0.3, n).unwrap().depth_with_rz_cycles(sr).unwrap(), 2 * sr + 4);
            assert_eq!(uzz_body(0.3, n).unwrap().depth_with_rz_cycles(sr).unwrap(), 4 * sr + 8);
        }
    }
}

#[test]
fn measurement_feeds_classical_control() {
    // Measure |1> into c0, then flip wire 1 only if c0 is set.
    let c = Circuit::from_gates(
        2,
        vec![
            Gate::single(GateKind::X, 0),
            Gate::measure(0, 0),
            Gate::single(GateKind::X, 1).when(0),
        ],
    )
    .unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut s = StateVector::<f64>::zero(2);
    let mut creg = ClassicalRegister::new();
    c.execute(&mut s, &mut creg, &mut rng).unwrap();
    assert_eq!(creg.get(0), Some(1));
    assert!((s.amplitudes()[3].norm() - 1.0).abs() < 1e-14);
}

#[test]
fn final_circuits_use_the_fault_tolerant_set() {
    let inst = Instance::new(2, 2).unwrap();
    let c = build_controlled_u(0, &TrotterPlan::fixed(1, 2).unwrap(), &inst).unwrap();
    assert!(!c.is_fault_tolerant_final());
    let compiled = c
        .substitute_rz(&mut |_| Ok(vec![GateKind::H, GateKind::T, GateKind::H]))
        .unwrap();
    assert!(compiled.is_fault_tolerant_final());
    assert_eq!(compiled.count_gates().rz, 0);
    assert_eq!(compiled.count_gates().t, c.count_gates().rz);
    assert_eq!(compiled.count_gates().h, c.count_gates().h + 2 * c.count_gates().rz);
}
