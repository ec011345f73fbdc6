use nalgebra::DMatrix;
use num_complex::Complex;

use isingqpe::tim::{hamiltonian_parts, DenseOperator, Spectrum, TimInstance, DENSE_QUBIT_CAP};
use isingqpe::trotter::{
    build_controlled_u, calibrate_k0, controlled_blocks, least_squares, min_steps,
    projective_operator_distance, trotter_error, K0Rule, TrotterPlan,
};
use isingqpe::Error;

type M = DMatrix<Complex<f64>>;

fn expm(h: &M, t: f64) -> M {
    Spectrum::of(&DenseOperator::new(h.clone()).unwrap()).unwrap().unitary(t)
}

fn chain(n: usize, g: f64, j: f64) -> TimInstance<f64> {
    TimInstance::new(n, 4).unwrap().with_field(g).unwrap().with_coupling(j).unwrap()
}

/// `k` Strang steps `e^{-iA dt/2} e^{-iB dt} e^{-iA dt/2}` built from dense exponentials.
fn dense_strang(inst: &TimInstance<f64>, t: f64, k: u64) -> (M, M) {
    let (hx, hzz) = hamiltonian_parts(inst, DENSE_QUBIT_CAP).unwrap();
    let dt = t / k as f64;
    let step = expm(&hx.matrix, dt / 2.0) * expm(&hzz.matrix, dt) * expm(&hx.matrix, dt / 2.0);
    let d = 1 << inst.n;
    let mut s = M::identity(d, d);
    for _ in 0..k {
        s = &step * s;
    }
    (s, expm(&(hx.matrix + hzz.matrix), t))
}

#[test]
fn controlled_evolution_matches_strang_product_off_the_default_point() {
    for (g, j) in [(0.6, 1.3), (2.0, 0.5)] {
        let inst = chain(3, g, j);
        let plan = TrotterPlan::fixed(3, 4).unwrap();
        for m in 0..2u32 {
            let (target, _) = dense_strang(&inst, inst.tau() * f64::from(1u32 << m), plan.steps(m));
            let u = build_controlled_u(m, &plan, &inst).unwrap().unitary::<f64>().unwrap();
            let (u0, u1, leak) = controlled_blocks(&u, 3);
            let d = 8;
            assert!(leak < 1e-12, "leak {leak}");
            assert!(projective_operator_distance(&u0, &M::identity(d, d)) < 1e-12);
            // The idle branch is exactly the identity, so the controlled
            // branch may not absorb a global phase.
            assert!((u1 - target).norm() < 1e-10, "g={g} J={j} m={m}");
        }
    }
}

#[test]
fn matrix_free_error_agrees_with_dense_oracle() {
    for (n, g, j) in [(3, 0.5, 2.0), (4, 1.0, 1.0), (5, 1.7, 0.4)] {
        let inst = chain(n, g, j);
        for k in [1u64, 2, 5] {
            let t = 0.2;
            let (s, u) = dense_strang(&inst, t, k);
            let want = projective_operator_distance(&s, &u);
            let got = trotter_error(&inst, t, k).unwrap();
            assert!((got - want).abs() < 1e-9 * want.max(1e-6), "n={n} k={k}: {got} vs {want}");
        }
    }
}

#[test]
fn error_vanishes_when_terms_commute() {
    assert_eq!(trotter_error(&chain(4, 0.0, 1.0), 1.0, 1).unwrap(), 0.0);
    assert_eq!(trotter_error(&chain(1, 1.0, 1.0), 1.0, 1).unwrap(), 0.0);
    assert_eq!(min_steps(&chain(4, 0.0, 1.0), 1.0, 1e-9).unwrap(), (1, 0.0));
}

#[test]
fn min_steps_sits_on_the_boundary() {
    let inst = chain(5, 1.0, 1.0);
    let t = inst.tau();
    for target in [1e-3, 1e-5] {
        let (k, e) = min_steps(&inst, t, target).unwrap();
        assert!(e < target);
        assert_eq!(e, trotter_error(&inst, t, k).unwrap());
        assert!(k == 1 || trotter_error(&inst, t, k - 1).unwrap() >= target);
    }
    assert!(matches!(min_steps(&inst, t, 0.0), Err(Error::Validation(_))));
}

#[test]
fn calibration_fits_a_decreasing_power_law() {
    let plan = calibrate_k0(16, &[4, 5, 6, 7, 8], 1.0, 1.0).unwrap();
    assert_eq!(plan.measured_k0.len(), 5);
    assert!(plan.measured_k0.windows(2).all(|w| w[0] >= w[1]));
    assert!(plan.fit_exponent < 0.0);
    assert!(plan.epsilon_t < (-16f64).exp2());
    assert_eq!(plan.k0, plan.measured_k0[0]);
    // Measured chains use the measurement, others the fit.
    assert_eq!(plan.k0_for(6), plan.measured_k0[2]);
    let K0Rule::Calibrated { prefactor } = plan.rule else { panic!("rule") };
    let fit = (prefactor * 100f64.powf(plan.fit_exponent)).ceil().max(1.0) as u64;
    assert_eq!(plan.k0_for(100), fit);
    assert_eq!(plan.for_chain(100).k0, fit);
}

#[test]
fn least_squares_recovers_a_line() {
    let xs = [0.0, 1.0, 2.0, 3.0];
    let ys: Vec<f64> = xs.iter().map(|x| 1.5 - 0.9 * x).collect();
    let (a, b) = least_squares(&xs, &ys);
    assert!((a - 1.5).abs() < 1e-12 && (b + 0.9).abs() < 1e-12);
}

#[test]
fn plans_and_oracles_reject_bad_input() {
    assert!(TrotterPlan::fixed(0, 3).is_err());
    assert!(TrotterPlan::fixed(1, 0).is_err());
    let p = TrotterPlan::fixed(5, 3).unwrap();
    assert_eq!(p.steps(3), 40);
    assert!((p.theta(1.0) - 0.2).abs() < 1e-15);
    assert!(matches!(trotter_error(&chain(11, 1.0, 1.0), 0.1, 1), Err(Error::Capacity { .. })));
    assert!(trotter_error(&chain(3, 1.0, 1.0), 0.1, 0).is_err());
    assert!(calibrate_k0(8, &[], 1.0, 1.0).is_err());
    assert!(calibrate_k0(0, &[4], 1.0, 1.0).is_err());
    assert!(calibrate_k0(8, &[11], 1.0, 1.0).is_err());
}
