mod common;

use concatqec::amplitude::{error_amplitude, primal_objective};
use concatqec::linalg::{self, c, CMat, CVec};
use concatqec::verify::random;
use concatqec::{ChannelSpec, GeneralizedOperator, SubspaceIsometry};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn unit_vector(rng: &mut ChaCha8Rng, d: usize) -> CVec {
    let v = random::gaussian_matrix(rng, d, 1).column(0).into_owned();
    let n = v.norm();
    v.unscale(n)
}

fn random_operator(rng: &mut ChaCha8Rng, d: usize) -> GeneralizedOperator {
    let k = rng.random_range(1..=3);
    GeneralizedOperator::from_kraus((0..k).map(|_| random::gaussian_matrix(rng, d, d)).collect()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn canonical_form_keeps_the_choi_matrix(seed in any::<u64>(), pairs in 1usize..5, env in 1usize..4) {
        let rng = &mut rng(seed);
        let raw: Vec<(CVec, CMat)> = (0..pairs)
            .map(|_| (random::gaussian_matrix(rng, env, 1).column(0).into_owned(), random::gaussian_matrix(rng, 2, 2)))
            .collect();
        let op = GeneralizedOperator::canonicalize(&raw).unwrap();
        let direct = common::choi_from_raw(&raw);
        prop_assert!(linalg::frobenius_norm(&(op.choi() - &direct)) <= 1e-10 * linalg::frobenius_norm(&direct).max(1.0));
        prop_assert!(op.terms().len() <= env.min(pairs));
    }

    #[test]
    fn strength_is_the_maximum_output_length(seed in any::<u64>()) {
        let rng = &mut rng(seed);
        let d = random::dimension(rng);
        let op = random_operator(rng, d);
        let s = op.strength();
        for _ in 0..1000 {
            prop_assert!(op.apply_norm(&unit_vector(rng, d)) <= s + 1e-10);
        }
        let (_, vecs) = linalg::hermitian_eigen(&op.strength_gram());
        let top = vecs.column(0).into_owned();
        prop_assert!((op.apply_norm(&top) - s).abs() <= 1e-6);
    }

    #[test]
    fn generalized_unitaries_preserve_length(seed in any::<u64>()) {
        let rng = &mut rng(seed);
        let d = random::dimension(rng);
        let op = random::generalized_unitary(rng, d);
        prop_assert!(op.is_generalized_unitary());
        for _ in 0..100 {
            prop_assert!((op.apply_norm(&unit_vector(rng, d)) - 1.0).abs() <= 1e-10);
        }
    }

    #[test]
    fn tensor_strength_is_multiplicative(seed in any::<u64>()) {
        let rng = &mut rng(seed);
        let (a, b) = (random_operator(rng, 2), random_operator(rng, 2));
        let prod = a.strength() * b.strength();
        prop_assert!((a.tensor(&b).strength() - prod).abs() <= 1e-10 * prod.max(1.0));
    }

    #[test]
    fn restriction_never_increases_strength(seed in any::<u64>()) {
        let rng = &mut rng(seed);
        let d = random::dimension(rng);
        let op = random_operator(rng, d);
        let k = rng.random_range(1..=d);
        let sub = random::isometry(rng, d, k);
        prop_assert!(op.restrict(&sub).unwrap().strength() <= op.strength() * (1.0 + 1e-12) + 1e-12);
    }

    #[test]
    fn composition_matches_sequential_application(seed in any::<u64>()) {
        let rng = &mut rng(seed);
        let d = random::dimension(rng);
        let (a1, a2) = (random::generalized_unitary(rng, d), random::generalized_unitary(rng, d));
        let both = a2.compose(&a1).unwrap();
        prop_assert!(both.is_generalized_unitary());
        let psi = unit_vector(rng, d);
        let rho = &psi * psi.adjoint();
        let seq = a2.apply_to_density(&a1.apply_to_density(&rho).unwrap()).unwrap();
        prop_assert!(linalg::frobenius_norm(&(both.apply_to_density(&rho).unwrap() - seq)) <= 1e-10);
    }

    #[test]
    fn minimizer_is_normalized_and_beats_longer_candidates(seed in any::<u64>()) {
        let rng = &mut rng(seed);
        let d = random::dimension(rng);
        let op = random::generalized_unitary(rng, d);
        let reference = random::unitary(rng, d);
        let sol = error_amplitude(&op, &reference, None).unwrap();
        let norm = sol.mu.iter().map(|m| m.norm_sqr()).sum::<f64>().sqrt();
        prop_assert!(norm <= 1.0 + 1e-9);
        for _ in 0..20 {
            let dir: Vec<_> = (0..sol.mu.len()).map(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
            let len = dir.iter().map(|m| m.norm_sqr()).sum::<f64>().sqrt();
            let target = rng.random_range(1.0..2.0) / len;
            let far: Vec<_> = dir.iter().map(|m| m * target).collect();
            prop_assert!(sol.value <= primal_objective(&op, &reference, None, &far).unwrap() + 1e-9);
        }
    }

    #[test]
    fn debug_text_round_trips(seed in any::<u64>()) {
        let rng = &mut rng(seed);
        let op = random_operator(rng, 2);
        let back = GeneralizedOperator::from_debug_text(&op.to_debug_text()).unwrap();
        prop_assert!(back.equivalent(&op, 1e-12));
    }
}

#[test]
fn canonicalize_examples() {
    let id = GeneralizedOperator::canonicalize(&[(CVec::from_element(1, c(1.0, 0.0)), linalg::identity(2))]).unwrap();
    assert_eq!(id.terms().len(), 1);
    assert!(linalg::frobenius_norm(&(id.terms()[0].clone() - linalg::identity(2))) < 1e-12);

    let e0 = CVec::from_vec(vec![c(1.0, 0.0), c(0.0, 0.0)]);
    let x = linalg::to_dyn(&linalg::pauli_x());
    let z = linalg::to_dyn(&linalg::pauli_z());
    let shared = GeneralizedOperator::canonicalize(&[(e0.clone(), x.clone()), (e0, z.clone())]).unwrap();
    assert_eq!(shared.terms().len(), 1);
    assert!(shared.equivalent(&GeneralizedOperator::from_matrix(&x + &z), 1e-12));
}

#[test]
fn apply_to_density_examples() {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let plus = CVec::from_vec(vec![c(h, 0.0), c(h, 0.0)]);
    let rho = &plus * plus.adjoint();
    assert_eq!(GeneralizedOperator::identity(2).apply_to_density(&rho).unwrap(), rho);
    let out = ChannelSpec::dephasing(0.5).unwrap().build().apply_to_density(&rho).unwrap();
    assert!(linalg::frobenius_norm(&(out - linalg::identity(2) * c(0.5, 0.0))) < 1e-12);
    let one = linalg::basis(2, 1);
    let damped = ChannelSpec::amplitude_damping(1.0).unwrap().build().apply_to_density(&(&one * one.adjoint())).unwrap();
    let zero = linalg::basis(2, 0);
    assert!(linalg::frobenius_norm(&(damped - &zero * zero.adjoint())) < 1e-12);
}

#[test]
fn strength_compose_tensor_examples() {
    let x = linalg::to_dyn(&linalg::pauli_x());
    let z = linalg::to_dyn(&linalg::pauli_z());
    assert!((GeneralizedOperator::identity(2).strength() - 1.0).abs() < 1e-12);
    assert!((GeneralizedOperator::from_matrix(&x * c(0.3, 0.0)).strength() - 0.3).abs() < 1e-12);
    let two = GeneralizedOperator::from_kraus(vec![&x * c(0.3, 0.0), &z * c(0.3, 0.0)]).unwrap();
    assert!((two.strength() - 0.3 * 2f64.sqrt()).abs() < 1e-12);

    let ex = GeneralizedOperator::from_matrix(&x * c(0.5, 0.0));
    let dz = GeneralizedOperator::from_matrix(&z * c(0.2, 0.0));
    let prod = ex.compose(&dz).unwrap();
    assert!(prod.equivalent(&GeneralizedOperator::from_matrix(&x * &z * c(0.1, 0.0)), 1e-12));
    assert!((prod.strength() - 0.1).abs() < 1e-12);
    let g = ChannelSpec::amplitude_damping(0.3).unwrap().build();
    assert!(GeneralizedOperator::identity(2).compose(&g).unwrap().equivalent(&g, 1e-12));

    assert!(GeneralizedOperator::identity(2).tensor(&GeneralizedOperator::identity(2)).equivalent(&GeneralizedOperator::identity(4), 1e-12));
    let t = GeneralizedOperator::from_matrix(&x * c(0.2, 0.0)).tensor(&GeneralizedOperator::from_matrix(&z * c(0.5, 0.0)));
    assert!((t.strength() - 0.1).abs() < 1e-12);
    let deph = ChannelSpec::dephasing(0.1).unwrap().build();
    let dd = deph.tensor(&deph);
    assert!(dd.is_generalized_unitary() && (dd.strength() - 1.0).abs() < 1e-12);
}

#[test]
fn restriction_examples() {
    let rng = &mut rng(5);
    let p = random::isometry(rng, 4, 2);
    let r = GeneralizedOperator::identity(4).restrict(&p).unwrap();
    assert!(r.equivalent(&GeneralizedOperator::from_matrix(p.columns().clone()), 1e-12));
    let z = GeneralizedOperator::from_matrix(linalg::to_dyn(&linalg::pauli_z()));
    let zero = SubspaceIsometry::span(&[linalg::basis(2, 0)]).unwrap();
    let rz = z.restrict(&zero).unwrap();
    assert!((rz.strength() - 1.0).abs() < 1e-12);
    assert!(linalg::frobenius_norm(&(rz.terms()[0].clone() - zero.columns())) < 1e-12);
}

#[test]
fn choi_examples() {
    let j = GeneralizedOperator::identity(2).choi();
    let (vals, _) = linalg::hermitian_eigen(&j);
    assert!((vals[0] - 2.0).abs() < 1e-12 && vals[1..].iter().all(|v| v.abs() < 1e-12));
    // depolarizing: direct eigendecomposition of the Choi matrix built from its action
    let p = 0.3;
    let op = ChannelSpec::depolarizing(p).unwrap().build();
    let mut direct = CMat::zeros(4, 4);
    for a in 0..2 {
        for b in 0..2 {
            let e = &linalg::basis(2, a) * linalg::basis(2, b).adjoint();
            let out = op.apply_to_density(&e).unwrap();
            for r1 in 0..2 {
                for r2 in 0..2 {
                    direct[(a * 2 + r1, b * 2 + r2)] = out[(r1, r2)];
                }
            }
        }
    }
    assert!(linalg::frobenius_norm(&(op.choi() - &direct)) < 1e-12);
    let mut vals = nalgebra::SymmetricEigen::new(direct).eigenvalues.as_slice().to_vec();
    vals.sort_by(|a, b| b.total_cmp(a));
    let expect = [2.0 * (1.0 - p), 2.0 * p / 3.0, 2.0 * p / 3.0, 2.0 * p / 3.0];
    for (v, e) in vals.iter().zip(expect) {
        assert!((v - e).abs() < 1e-12, "{vals:?}");
    }
    assert!((op.choi().trace().re - 2.0).abs() < 1e-12);
}

#[test]
fn equivalence_examples() {
    let rng = &mut rng(9);
    let u = random::unitary(rng, 2);
    let g = GeneralizedOperator::from_matrix(u.clone());
    assert!(g.equivalent(&g, 0.0));
    assert!(g.equivalent(&GeneralizedOperator::from_matrix(&u * c(0.6, 0.8)), 1e-12));
    let x = GeneralizedOperator::from_matrix(linalg::to_dyn(&linalg::pauli_x()));
    assert!(!GeneralizedOperator::identity(2).equivalent(&x, 1e-6));
}
