use std::f64::consts::{PI, TAU};

use nalgebra::DMatrix;
use num_complex::Complex;

use isingqpe::pe::{
    bit_distribution, bits_to_phi, energy_resolution, success_probability, total_variation, PeConfig, PeMode,
    PhaseEstimate, PhaseEstimator,
};
use isingqpe::state::StateVector;
use isingqpe::tim::{build_hamiltonian, ground_state, DenseOperator, Spectrum, TimInstance};

/// Largest total-variation distance tolerated between two 300-shot samples
/// of the same distribution.
const SAMPLE_TV: f64 = 0.15;

fn ground_input(inst: &TimInstance<f64>) -> StateVector<f64> {
    let gs = ground_state(&build_hamiltonian(inst).unwrap()).unwrap();
    StateVector::from_dvector(&gs.state).unwrap()
}

fn shots(est: &PhaseEstimator<f64>, input: &StateVector<f64>, n: u64) -> Vec<PhaseEstimate> {
    est.run_shots(input, &(0..n).collect::<Vec<_>>()).unwrap()
}

#[test]
fn superposed_dyadic_eigenstates_split_by_their_weights() {
    // Two eigenphases 3/8 and 6/8 at τ = 1, each read out exactly at M = 3.
    let energies = [TAU * 3.0 / 8.0, TAU * 6.0 / 8.0];
    let h = DMatrix::from_fn(2, 2, |r, c| Complex::new(if r == c { energies[r] } else { 0.0 }, 0.0));
    let spec = Spectrum::of(&DenseOperator::new(h).unwrap()).unwrap();
    let est = PhaseEstimator::from_spectrum(&spec, 1.0, 3, true).unwrap();
    let (a, b) = (0.8f64.sqrt(), 0.2f64.sqrt());
    let input = StateVector::from_amplitudes(vec![Complex::new(a, 0.0), Complex::new(0.0, b)]).unwrap();
    let d = bit_distribution(&shots(&est, &input, 400));
    assert_eq!(d.len(), 2, "{d:?}");
    assert!((d["011"] - 0.8).abs() < 0.06, "{d:?}");
    assert!((d["110"] - 0.2).abs() < 0.06, "{d:?}");
    assert_eq!(bits_to_phi(&[1, 1, 0]), 0.75);
}

#[test]
fn trotterized_run_matches_exact_evolution() {
    let inst = TimInstance::<f64>::new(3, 5).unwrap();
    let input = ground_input(&inst);
    let exact = PhaseEstimator::new(&inst, &PeConfig::new(PeMode::ExactU)).unwrap();
    let trot = PhaseEstimator::new(&inst, &PeConfig::new(PeMode::TrotterExactRz)).unwrap();
    assert!(trot.plan().unwrap().k0 >= 1);
    assert_eq!(trot.width(), 1 + 3 + 2);
    let a = bit_distribution(&shots(&exact, &input, 300));
    let b = bit_distribution(&shots(&trot, &input, 300));
    assert!(total_variation(&a, &b) < SAMPLE_TV, "{a:?} vs {b:?}");
}

#[test]
fn compiled_run_stays_close_to_exact() {
    let inst = TimInstance::<f64>::new(2, 4).unwrap();
    let input = ground_input(&inst);
    let exact = PhaseEstimator::new(&inst, &PeConfig::new(PeMode::ExactU)).unwrap();
    let compiled = PhaseEstimator::new(&inst, &PeConfig::new(PeMode::FullyCompiled)).unwrap();
    let a = bit_distribution(&shots(&exact, &input, 300));
    let b = bit_distribution(&shots(&compiled, &input, 300));
    assert!(total_variation(&a, &b) < SAMPLE_TV, "{a:?} vs {b:?}");
}

#[test]
fn exact_mode_lands_in_the_ground_bin() {
    let inst = TimInstance::<f64>::new(4, 7).unwrap();
    let est = PhaseEstimator::new(&inst, &PeConfig::new(PeMode::ExactU)).unwrap();
    let e0 = est.ground_energy().unwrap();
    let bin = 2.0 * energy_resolution(inst.tau(), 7);
    let runs = shots(&est, &ground_input(&inst), 200);
    let hits = runs.iter().filter(|r| (r.energy - e0).abs() <= bin).count();
    assert!(hits as f64 >= 0.4 * 200.0, "{hits}/200");
    assert!(runs.iter().all(|r| (r.success_probability.unwrap() - 1.0).abs() < 1e-9));
}

#[test]
fn runs_are_reproducible_by_seed() {
    let inst = TimInstance::<f64>::new(3, 5).unwrap();
    let est = PhaseEstimator::new(&inst, &PeConfig::new(PeMode::TrotterExactRz)).unwrap();
    let input = StateVector::basis(3, 0);
    for seed in [0, 5, 99] {
        assert_eq!(est.run(&input, seed).unwrap(), est.run(&input, seed).unwrap());
    }
}

#[test]
fn single_precision_agrees_on_dyadic_readout() {
    let e = TAU * 0.25;
    let h32 = DMatrix::from_fn(2, 2, |r, c| Complex::new(if r == c { [e as f32, 1.0][r] } else { 0.0 }, 0.0));
    let spec = Spectrum::of(&DenseOperator::new(h32).unwrap()).unwrap();
    let est = PhaseEstimator::<f32>::from_spectrum(&spec, 1.0, 4, true).unwrap();
    let r = est.run(&StateVector::<f32>::basis(1, 0), 3).unwrap();
    assert_eq!(r.bit_string(), "0100");
    assert!((r.energy - PI / 2.0).abs() < 1e-6);
}

#[test]
fn success_probability_is_the_ground_overlap() {
    let inst = TimInstance::<f64>::new(3, 4).unwrap();
    let gs = ground_state(&build_hamiltonian(&inst).unwrap()).unwrap();
    let p = success_probability(&StateVector::basis(3, 0), &inst).unwrap();
    assert!((p.probability - gs.state[0].norm_sqr()).abs() < 1e-12);
    assert!(!p.degenerate);
    // Without a field the two ferromagnetic states share the ground energy.
    let classical = inst.clone().with_field(0.0).unwrap();
    let p = success_probability(&StateVector::basis(3, 0), &classical).unwrap();
    assert!(p.degenerate);
    assert!((p.probability - 1.0).abs() < 1e-12);
    assert!(success_probability(&StateVector::basis(2, 0), &inst).is_err());
}
