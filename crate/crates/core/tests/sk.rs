use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4, PI};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use isingqpe::sk::{feedback_angle, sk_epsilon, BaseNet, SkCompiler, SkGate, Word, CONVERGENCE_RADIUS};

type M2 = [[Complex64; 2]; 2];

fn mul(a: &M2, b: &M2) -> M2 {
    let mut r = [[Complex64::new(0.0, 0.0); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            r[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    r
}

/// Textbook matrices, written out independently of the quaternion code.
fn matrix(g: SkGate) -> M2 {
    let z = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    let diag = |phase: f64| [[one, z], [z, Complex64::from_polar(1.0, phase)]];
    match g {
        SkGate::H => {
            let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
            [[h, h], [h, -h]]
        }
        SkGate::T => diag(FRAC_PI_4),
        SkGate::S => diag(2.0 * FRAC_PI_4),
        SkGate::Z => diag(PI),
        SkGate::Tdg => diag(-FRAC_PI_4),
        SkGate::Sdg => diag(-2.0 * FRAC_PI_4),
    }
}

fn word_matrix(w: &Word) -> M2 {
    let one = Complex64::new(1.0, 0.0);
    let z = Complex64::new(0.0, 0.0);
    w.gates().iter().fold([[one, z], [z, one]], |acc, &g| mul(&matrix(g), &acc))
}

/// `min_α ‖U − e^{iα} Rz(a)‖`. Scaled to unit determinant, `Rz(a)† U` is
/// `[[p, q], [−q̄, p̄]]` with eigenphases `±δ/2`, and the best phase
/// leaves `2 sin(δ/4)`. `δ` comes from `atan2` so that tiny distances keep
/// their relative precision.
fn distance_to_rz(u: &M2, a: f64) -> f64 {
    let e = Complex64::from_polar(1.0, a / 2.0);
    let w = [[u[0][0] * e, u[0][1] * e], [u[1][0] / e, u[1][1] / e]];
    let r = (w[0][0] * w[1][1] - w[0][1] * w[1][0]).sqrt();
    let (p, q) = (w[0][0] / r, w[0][1] / r);
    let half_delta = (p.im * p.im + q.norm_sqr()).sqrt().atan2(p.re.abs());
    2.0 * (half_delta / 2.0).sin()
}

#[test]
fn compiled_words_meet_their_budget_under_explicit_matrices() {
    let compiler = SkCompiler::standard();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for eps in [1e-2, 1e-4, 1e-7] {
        for _ in 0..6 {
            let a: f64 = rng.random_range(-PI..PI);
            let s = compiler.compile_rz(a, eps).unwrap();
            let d = distance_to_rz(&word_matrix(&s.word), a);
            assert!(d <= eps * (1.0 + 1e-6) + 1e-12, "a={a} eps={eps} d={d}");
            assert!((d - s.achieved_error).abs() < 1e-9, "reported {} vs {d}", s.achieved_error);
        }
    }
}

#[test]
fn clifford_t_angles_compile_exactly() {
    let compiler = SkCompiler::standard();
    for k in -8..=8 {
        let a = f64::from(k) * FRAC_PI_4;
        let s = compiler.compile_rz(a, 1e-12).unwrap();
        assert_eq!(s.recursion_order, 0);
        assert!(s.len() <= 3);
        assert!(distance_to_rz(&word_matrix(&s.word), a) < 1e-12);
    }
}

#[test]
fn tighter_budgets_never_shorten_words() {
    let compiler = SkCompiler::standard();
    let a = 0.1234;
    let lens: Vec<(usize, usize)> = [1e-1, 1e-3, 1e-5, 1e-8]
        .iter()
        .map(|&e| {
            let s = compiler.compile_rz(a, e).unwrap();
            (s.recursion_order, s.len())
        })
        .collect();
    assert!(lens.windows(2).all(|w| w[0].0 <= w[1].0 && w[0].1 <= w[1].1), "{lens:?}");
}

#[test]
fn standard_net_is_consistent_and_fine_enough() {
    let net = SkCompiler::standard().net().clone();
    assert!(net.consistency_defect() < 1e-12);
    assert!(net.probe_radius(200) < CONVERGENCE_RADIUS);
}

#[test]
fn longer_bases_cover_more_tightly() {
    let radii: Vec<f64> = [4, 8, 12].iter().map(|&l| BaseNet::build(l).unwrap().probe_radius(100)).collect();
    assert!(radii.windows(2).all(|w| w[1] <= w[0]), "{radii:?}");
}

#[test]
fn net_text_round_trips() {
    let net = BaseNet::build(6).unwrap();
    let back = BaseNet::from_text(&net.to_text()).unwrap();
    assert_eq!(back.len(), net.len());
    assert_eq!(back.base_length(), 6);
    assert!(back.consistency_defect() < 1e-12);
    assert!(BaseNet::from_text("not a net").is_err());
}

#[test]
fn word_text_and_inverse() {
    let w = Word::parse("H T S TDG H Z SDG").unwrap();
    assert_eq!(Word::parse(&w.to_string()).unwrap(), w);
    let mut id = w.clone();
    id.extend(&w.inverse());
    assert!(distance_to_rz(&word_matrix(&id), 0.0) < 1e-14);
    assert_eq!(w.t_count(), 2);
    assert!(Word::parse("H X").is_err());
}

#[test]
fn feedback_angles() {
    assert_eq!(feedback_angle(1, &[]).unwrap(), 0.0);
    assert!((feedback_angle(2, &[1]).unwrap() - PI / 2.0).abs() < 1e-15);
    // Bits 1, 1 into step 3: 2π(1/8 + 1/4).
    assert!((feedback_angle(3, &[1, 1]).unwrap() - 0.75 * PI).abs() < 1e-15);
    assert!((feedback_angle(3, &[1, 0]).unwrap() - 0.25 * PI).abs() < 1e-15);
    assert!(feedback_angle(0, &[]).is_err());
    assert!(feedback_angle(3, &[1]).is_err());
    assert!(feedback_angle(2, &[2]).is_err());
    let s = SkCompiler::standard().compile_feedback_rotation(3, &[1, 1], 1e-6).unwrap();
    assert!(distance_to_rz(&word_matrix(&s.word), 0.75 * PI) < 1e-12);
}

#[test]
fn budget_split_and_bad_input() {
    assert_eq!(sk_epsilon(10, 4), 1.0 / 4096.0);
    let c = SkCompiler::standard();
    assert!(c.compile_rz(0.3, 0.0).is_err());
    assert!(c.compile_rz(f64::NAN, 1e-3).is_err());
}
