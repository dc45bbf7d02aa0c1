mod common;

use concatqec::linalg::{self, c, CMat};
use concatqec::verify::random;
use concatqec::{error_amplitude_value, ChannelSpec, GeneralizedOperator};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn rotation_matches_half_angle_sine() {
    for theta in [0.1, 0.7, 1.3, 2.5, 3.0] {
        let op = ChannelSpec::rotation([0.0, 0.0, 1.0], theta).unwrap().build();
        let got = error_amplitude_value(&op, &linalg::identity(2), None).unwrap();
        let grid = common::grid_amplitude(op.terms(), &linalg::identity(2));
        let exact = (theta / 2.0).sin().abs();
        let dual = common::dual_grid_amplitude(op.terms(), &linalg::identity(2));
        assert!((dual - exact).abs() < 2e-6, "{theta}: dual grid {dual}");
        assert!((got - exact).abs() < 2e-6 && (grid - exact).abs() < 2e-6, "{theta}: {got} {grid} {exact}");
    }
}

#[test]
fn dephasing_matches_root_p() {
    for p in [0.0025, 0.04, 0.3] {
        let op = ChannelSpec::dephasing(p).unwrap().build();
        let got = error_amplitude_value(&op, &linalg::identity(2), None).unwrap();
        let grid = common::grid_amplitude(op.terms(), &linalg::identity(2));
        assert!((got - p.sqrt()).abs() < 2e-6 && (grid - p.sqrt()).abs() < 2e-6, "{p}: {got} {grid}");
    }
}

#[test]
fn complete_damping_is_one() {
    let op = ChannelSpec::amplitude_damping(1.0).unwrap().build();
    let got = error_amplitude_value(&op, &linalg::identity(2), None).unwrap();
    assert!((got - 1.0).abs() < 1e-9);
}

#[test]
fn random_single_qubit_cases_match_grid_search() {
    let rng = &mut ChaCha8Rng::seed_from_u64(2024);
    for case in 0..8 {
        let terms = 1 + case % 2;
        let target = random::unitary(rng, 2);
        let op = random::near_unitary(rng, &target, terms, 0.05 + 0.05 * case as f64);
        let reference = random::unitary(rng, 2);
        let reference = if case % 3 == 0 { target.clone() } else { reference };
        let got = error_amplitude_value(&op, &reference, None).unwrap();
        let dual = common::dual_grid_amplitude(op.terms(), &reference);
        let grid = common::grid_amplitude(op.terms(), &reference);
        assert!((got - dual).abs() < 2e-6, "case {case}: solver {got}, dual grid {dual}");
        assert!(got <= grid + 2e-6 && dual <= grid + 2e-6, "case {case}: solver {got}, primal grid {grid}");
    }
}

#[test]
fn subspace_restriction_matches_grid_on_restricted_terms() {
    let rng = &mut ChaCha8Rng::seed_from_u64(77);
    let sub = random::isometry(rng, 4, 2);
    let u = random::unitary(rng, 4);
    let op = random::near_unitary(rng, &u, 2, 0.2);
    let got = error_amplitude_value(&op, &u, Some(&sub)).unwrap();
    let terms: Vec<CMat> = op.terms().iter().map(|a| a * sub.columns()).collect();
    let grid = common::grid_amplitude(&terms, &(&u * sub.columns()));
    assert!((got - grid).abs() < 2e-6, "{got} {grid}");
}

#[test]
fn identical_operator_has_zero_amplitude() {
    let rng = &mut ChaCha8Rng::seed_from_u64(3);
    let u = random::unitary(rng, 4);
    let got = error_amplitude_value(&GeneralizedOperator::from_matrix(u.clone() * c(0.0, 1.0)), &u, None).unwrap();
    assert!(got < 1e-7, "{got}");
}
