//! Property tests over randomized inputs.

use std::f64::consts::SQRT_2;

use bellspace::context::{covariance_check, make_context, translation_context, TranslationSystem, DEFAULT_TOLERANCE};
use bellspace::epr::{
    construct_processes_general, construct_processes_paper, process_correlation, rotated_correlation, sample_processes,
    verify_moments, CanonicalRotation, CrossMomentMatrix, NoiseDistribution,
};
use bellspace::hilbert::{commutator_norm, expectation, tensor, Operator, State};
use bellspace::lhv::{
    chsh_bound_check, mc_correlation, model_correlation, random_bounded_model, random_settings, random_unit_vector,
    sqrt3_model, ChshBoundReport,
};
use bellspace::spatial::{box_probability, localization_factor, DetectorRegion, Wavepacket};
use bellspace::spin::{chsh_value, spin_correlation, SingletCorrelation, UnitVector3};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn unit_vector() -> impl Strategy<Value = UnitVector3> {
    (-1.0f64..=1.0, 0.0f64..std::f64::consts::TAU).prop_map(|(z, phi)| {
        let r = (1.0 - z * z).max(0.0).sqrt();
        UnitVector3::normalize(r * phi.cos(), r * phi.sin(), z).unwrap()
    })
}

fn hermitian(dim: usize) -> impl Strategy<Value = Operator> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), dim * dim).prop_map(move |raw| {
        let entries: Vec<Complex64> = raw.iter().map(|&(re, im)| Complex64::new(re, im)).collect();
        let m = Operator::from_rows(dim, &entries).unwrap();
        (&m + &m.adjoint()).scale_real(0.5)
    })
}

fn state(dim: usize) -> impl Strategy<Value = State> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), dim)
        .prop_filter("nonzero", |v| v.iter().any(|&(a, b)| a != 0.0 || b != 0.0))
        .prop_map(|raw| State::normalized(raw.iter().map(|&(re, im)| Complex64::new(re, im)).collect()).unwrap())
}

/// Rotation matrix of a unit quaternion.
fn rotation(q: [f64; 4]) -> [[f64; 3]; 3] {
    let n = q.iter().map(|x| x * x).sum::<f64>().sqrt();
    let [w, x, y, z] = q.map(|c| c / n);
    [
        [1.0 - 2.0 * (y * y + z * z), 2.0 * (x * y - w * z), 2.0 * (x * z + w * y)],
        [2.0 * (x * y + w * z), 1.0 - 2.0 * (x * x + z * z), 2.0 * (y * z - w * x)],
        [2.0 * (x * z - w * y), 2.0 * (y * z + w * x), 1.0 - 2.0 * (x * x + y * y)],
    ]
}

fn rotate(r: &[[f64; 3]; 3], v: &UnitVector3) -> UnitVector3 {
    let c = v.components();
    let out: Vec<f64> = r.iter().map(|row| row[0] * c[0] + row[1] * c[1] + row[2] * c[2]).collect();
    UnitVector3::normalize(out[0], out[1], out[2]).unwrap()
}

fn moments() -> impl Strategy<Value = CrossMomentMatrix> {
    (-5.0f64..=5.0, -5.0f64..=5.0, -5.0f64..=5.0, -5.0f64..=5.0)
        .prop_map(|(a, b, c, d)| CrossMomentMatrix::new(a, b, c, d))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn tensor_dims_multiply(n in 1usize..5, m in 1usize..5) {
        prop_assert_eq!(tensor(&Operator::identity(n), &Operator::zeros(m)).dim(), n * m);
    }

    #[test]
    fn tensor_preserves_hermiticity(a in hermitian(2), b in hermitian(3)) {
        prop_assert!(tensor(&a, &b).hermiticity_defect() <= 1e-12);
    }

    #[test]
    fn hermitian_expectation_is_real(m in hermitian(4), s in state(4)) {
        prop_assert!(expectation(&s, &m).unwrap().im.abs() <= 1e-12);
    }

    #[test]
    fn commutator_norm_is_symmetric(a in hermitian(3), b in hermitian(3)) {
        prop_assert_eq!(commutator_norm(&a, &b).unwrap(), commutator_norm(&b, &a).unwrap());
    }

    #[test]
    fn singlet_correlation_is_minus_dot(a in unit_vector(), b in unit_vector()) {
        prop_assert!((spin_correlation(&a, &b) + a.dot(&b)).abs() <= 1e-12);
    }

    #[test]
    fn singlet_correlation_is_rotation_invariant(
        a in unit_vector(), b in unit_vector(), q in prop::array::uniform4(-1.0f64..1.0)
    ) {
        prop_assume!(q.iter().map(|x| x * x).sum::<f64>() > 1e-3);
        let r = rotation(q);
        let rotated = spin_correlation(&rotate(&r, &a), &rotate(&r, &b));
        prop_assert!((rotated - spin_correlation(&a, &b)).abs() <= 1e-12);
    }

    #[test]
    fn sqrt3_model_reproduces_inner_product(a in unit_vector(), b in unit_vector()) {
        prop_assert!((model_correlation(&sqrt3_model(), &a, &b) - a.dot(&b)).abs() <= 1e-14);
    }

    #[test]
    fn general_construction_represents_any_moments(m in moments()) {
        let p = construct_processes_general(&m);
        prop_assert_eq!(verify_moments(&p, &m), 0.0);
        for i in 0..20 {
            for j in 0..20 {
                let a1 = CanonicalRotation::new(i as f64 * std::f64::consts::TAU / 20.0);
                let a2 = CanonicalRotation::new(j as f64 * std::f64::consts::TAU / 20.0);
                prop_assert!((process_correlation(&p, a1, a2) - rotated_correlation(&m, a1, a2)).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn constructions_agree_when_a_nonzero(m in moments(), a1 in -7.0f64..7.0, a2 in -7.0f64..7.0) {
        prop_assume!(m.a.abs() > 1e-12);
        let paper = construct_processes_paper(&m).unwrap();
        let general = construct_processes_general(&m);
        let (a1, a2) = (CanonicalRotation::new(a1), CanonicalRotation::new(a2));
        prop_assert!(verify_moments(&paper, &m) <= 1e-12 * (1.0 + m.b.abs() * m.c.abs() / m.a.abs()));
        prop_assert!((process_correlation(&paper, a1, a2) - process_correlation(&general, a1, a2)).abs() <= 1e-12 * (1.0 + m.b.abs() * m.c.abs() / m.a.abs()));
    }

    #[test]
    fn canonical_rotation_is_symplectic(alpha in -100.0f64..100.0) {
        prop_assert!((CanonicalRotation::new(alpha).determinant() - 1.0).abs() <= 1e-14);
    }

    #[test]
    fn localization_factor_in_unit_interval(
        c1 in prop::array::uniform3(-5.0f64..5.0), s1 in 0.1f64..3.0,
        lo in prop::array::uniform3(-6.0f64..6.0), w in prop::array::uniform3(0.01f64..8.0),
    ) {
        let p = Wavepacket::new(c1, s1).unwrap();
        let o = DetectorRegion::new(lo, [lo[0] + w[0], lo[1] + w[1], lo[2] + w[2]]).unwrap();
        let g = localization_factor(&p, &p, &o, &DetectorRegion::whole_space());
        prop_assert!((0.0..=1.0).contains(&g));
    }

    #[test]
    fn enlarging_region_never_decreases_g(
        c in prop::array::uniform3(-3.0f64..3.0), s in 0.2f64..2.0,
        lo in prop::array::uniform3(-4.0f64..4.0), w in prop::array::uniform3(0.01f64..4.0),
        grow in prop::array::uniform3(0.0f64..3.0),
    ) {
        let p = Wavepacket::new(c, s).unwrap();
        let inner = DetectorRegion::new(lo, [0, 1, 2].map(|i| lo[i] + w[i])).unwrap();
        let outer = DetectorRegion::new([0, 1, 2].map(|i| lo[i] - grow[i]), [0, 1, 2].map(|i| lo[i] + w[i] + grow[i])).unwrap();
        prop_assert!(outer.contains(&inner));
        prop_assert!(box_probability(&p, &outer) >= box_probability(&p, &inner));
    }
}

#[test]
fn tsirelson_ceiling_over_random_settings() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for _ in 0..10_000 {
        let s = random_settings(&mut rng);
        assert!(chsh_value(&SingletCorrelation, &s) <= 2.0 * SQRT_2 + 1e-9);
    }
}

#[test]
fn bounded_models_obey_chsh() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..100 {
        let model = random_bounded_model(&mut rng);
        for _ in 0..100 {
            let s = random_settings(&mut rng);
            match chsh_bound_check(&model, &s) {
                ChshBoundReport::Checked { value, satisfied } => assert!(satisfied && value <= 2.0 + 1e-12),
                other => panic!("bounded model judged {other:?}"),
            }
        }
    }
}

#[test]
fn lhv_sampling_within_five_sigma() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut inside = 0;
    for trial in 0..1000u64 {
        let model = random_bounded_model(&mut rng);
        let (a, b) = (random_unit_vector(&mut rng), random_unit_vector(&mut rng));
        let exact = model_correlation(&model, &a, &b);
        let est = mc_correlation(&model, &a, &b, 4000, trial).unwrap();
        if est.z_score(exact) <= 5.0 {
            inside += 1;
        }
    }
    assert!(inside >= 990, "{inside}/1000");
}

#[test]
fn epr_sampling_within_five_sigma() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for dist in [NoiseDistribution::Rademacher, NoiseDistribution::Gaussian] {
        let mut inside = 0;
        for trial in 0..200u64 {
            use rand::Rng;
            let m = CrossMomentMatrix::new(
                rng.random_range(-5.0..5.0),
                rng.random_range(-5.0..5.0),
                rng.random_range(-5.0..5.0),
                rng.random_range(-5.0..5.0),
            );
            let (a1, a2) = (
                CanonicalRotation::new(rng.random_range(0.0..6.3)),
                CanonicalRotation::new(rng.random_range(0.0..6.3)),
            );
            let p = construct_processes_general(&m);
            let est = sample_processes(&p, a1, a2, dist, 5000, trial).unwrap();
            if est.z_score(process_correlation(&p, a1, a2)) <= 5.0 {
                inside += 1;
            }
        }
        assert!(inside >= 198, "{dist:?}: {inside}/200");
    }
}

#[test]
fn context_verdict_is_order_independent() {
    let system = TranslationSystem::new(5).unwrap();
    let mut families = vec![system.generators()];
    let mut perturbed = system.generators();
    perturbed.push(Operator::diagonal(&[1.0, 0.0, 0.0, 0.0, 0.0]));
    families.push(perturbed);
    families.push(vec![Operator::pauli_x(), Operator::pauli_y(), Operator::identity(2)]);
    for family in families {
        let verdict = make_context(family.clone(), DEFAULT_TOLERANCE).is_ok();
        let mut reversed = family.clone();
        reversed.reverse();
        assert_eq!(make_context(reversed, DEFAULT_TOLERANCE).is_ok(), verdict);
        let mut rotated = family;
        rotated.rotate_left(1);
        assert_eq!(make_context(rotated, DEFAULT_TOLERANCE).is_ok(), verdict);
    }
}

#[test]
fn covariance_holds_for_singletons_and_intervals() {
    for n in 2..=16 {
        let t = TranslationSystem::new(n).unwrap();
        for d in 0..n {
            for start in 0..n {
                assert!(covariance_check(&t, &[start], d).unwrap() <= 1e-12);
                for len in 1..=n {
                    let interval: Vec<usize> = (start..start + len).map(|s| s % n).collect();
                    assert!(covariance_check(&t, &interval, d).unwrap() <= 1e-12);
                }
            }
        }
    }
}

#[test]
fn translation_generators_are_diagonal_in_fourier_basis() {
    for n in [2, 3, 4, 7, 8] {
        let ctx = translation_context(n).unwrap();
        let mut entries = Vec::with_capacity(n * n);
        for j in 0..n {
            for k in 0..n {
                let phase = std::f64::consts::TAU * (j * k) as f64 / n as f64;
                entries.push(Complex64::from_polar(1.0 / (n as f64).sqrt(), phase));
            }
        }
        let fourier = Operator::from_rows(n, &entries).unwrap();
        for op in ctx.operators() {
            let conjugated = &(&fourier.adjoint() * op) * &fourier;
            for r in 0..n {
                for c in 0..n {
                    if r != c {
                        assert!(conjugated.entry(r, c).norm() <= 1e-10);
                    }
                }
            }
        }
    }
}
