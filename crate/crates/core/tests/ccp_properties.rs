mod common;

use concatqec::analysis::{check_assumption4, overhead};
use concatqec::ccp::{block_channel, block_qubit_channel, ccp_channel_with_budget, Counters, WaitSchedule, DEFAULT_BUDGET};
use concatqec::superop::pauli_channel;
use concatqec::{
    bit_flip_code, ccp_channel, five_qubit_code, CCPConfig, ChannelSpec, Error, GeneralizedOperator, NoiseModel, Pauli,
    QubitChannel,
};
use num_bigint::BigUint;
use proptest::prelude::*;

fn pow(b: u64, e: u32) -> BigUint {
    BigUint::from(b).pow(e)
}

#[test]
fn counters_match_closed_forms_for_all_small_parameters() {
    for r in [2u64, 3] {
        for l in [3u64, 5] {
            let accumulated = Counters::levels(r as usize, l as usize, 4);
            for h in 1..=4u32 {
                let c = &accumulated[h as usize - 1];
                let o = overhead(r as usize, l as usize, h as usize).unwrap();
                assert_eq!(c.n, o.n);
                assert_eq!(c.qubits, o.qubits);
                assert_eq!(c.parallel_ops, o.parallel_ops);
                assert_eq!(c.total_ops, o.total_ops);
                // independent evaluation of the closed forms
                assert_eq!(o.n, pow(r, h));
                assert_eq!(o.qubits, pow(l, h));
                assert_eq!(o.parallel_ops, BigUint::from(r + 1) * (pow(r, h) - 1u32) / BigUint::from(r - 1));
                assert_eq!(o.total_ops, BigUint::from(r + 1) * (pow(r * l, h) - 1u32) / BigUint::from(r * l - 1));
            }
        }
    }
}

#[test]
fn level_two_counters_from_engine() {
    let cfg = CCPConfig::new(five_qubit_code(), 2, 2, ChannelSpec::identity());
    let reports = ccp_channel(&cfg).unwrap();
    let c = &reports[1].counters;
    assert_eq!(
        (c.n.clone(), c.qubits.clone(), c.parallel_ops.clone(), c.total_ops.clone()),
        (4u32.into(), 25u32.into(), 9u32.into(), 33u32.into())
    );
}

#[test]
fn ideal_block_matches_exact_frame_distribution() {
    let code = five_qubit_code();
    for (px, py, pz) in [(0.01, 0.01, 0.01), (0.05, 0.0, 0.02), (0.0, 0.0, 0.1)] {
        for r in [2, 3] {
            let ch = pauli_channel(px, py, pz);
            let block = block_qubit_channel(&code, &WaitSchedule::uniform(&ch, r, 5), &NoiseModel::ideal(), false)
                .unwrap();
            let w = block.pauli_weights();
            let oracle = common::exact_block_pauli(&code, [px, py, pz], r);
            for k in 0..4 {
                assert!((w[k] - oracle[k]).abs() < 1e-12, "r={r} {k}: {} vs {}", w[k], oracle[k]);
            }
        }
    }
}

#[test]
fn lumped_identity_noise_agrees_with_ideal_pipeline() {
    let code = five_qubit_code();
    let inner = ChannelSpec::amplitude_damping(0.07).unwrap().build();
    let ideal = block_channel(&code, &inner, &NoiseModel::ideal(), 2).unwrap();
    let lumped = block_channel(&code, &inner, &NoiseModel::lumped(ChannelSpec::identity()), 2).unwrap();
    assert!(ideal.equivalent(&lumped, 1e-10));
}

#[test]
fn injected_single_fault_per_period_is_corrected() {
    let code = five_qubit_code();
    for (r, pauli) in [(2, Pauli::X), (3, Pauli::Y), (2, Pauli::Z)] {
        let waits = WaitSchedule::from_fn(r, 5, |p, q| {
            if q == (p * 2 + 1) % 5 {
                QubitChannel::pauli(pauli)
            } else {
                QubitChannel::identity()
            }
        });
        let ch = block_qubit_channel(&code, &waits, &NoiseModel::ideal(), false).unwrap();
        assert!(ch.error_amplitude().unwrap() < 1e-9);
    }
}

#[test]
fn effective_channels_are_trace_preserving() {
    let code = five_qubit_code();
    let inner = ChannelSpec::rotation([0.6, 0.8, 0.0], 0.3).unwrap().build();
    for noise in [
        NoiseModel::ideal(),
        NoiseModel::lumped(ChannelSpec::depolarizing(0.01).unwrap()),
        NoiseModel::gate_level(ChannelSpec::depolarizing(0.002).unwrap()),
    ] {
        let g = block_channel(&code, &inner, &noise, 2).unwrap();
        let defect = (g.strength_gram() - concatqec::linalg::identity(2)).norm();
        assert!(defect < 1e-9, "{:?}: {defect}", noise.mode());
    }
    let mut cfg = CCPConfig::new(code, 2, 3, ChannelSpec::depolarizing(0.02).unwrap());
    cfg.noise = NoiseModel::lumped(ChannelSpec::dephasing(0.001).unwrap());
    for rep in ccp_channel(&cfg).unwrap() {
        assert!(rep.channel.trace_defect() < 1e-9);
    }
}

#[test]
fn dephasing_below_threshold_contracts_within_bound() {
    let cfg = CCPConfig::new(five_qubit_code(), 2, 5, ChannelSpec::dephasing(0.0025).unwrap());
    let reports = ccp_channel(&cfg).unwrap();
    assert_eq!(reports.len(), 5);
    let eps_d = cfg.channel.channel_error().unwrap();
    assert!((eps_d - 0.05).abs() < 1e-6);
    let bound = 3.0 * 20.0 * 0.05f64 * 0.05;
    for w in reports.windows(2) {
        assert!(w[1].error_amplitude < w[0].error_amplitude);
    }
    for rep in &reports {
        assert!(rep.error_amplitude <= bound + 1e-6, "level {}: {}", rep.level, rep.error_amplitude);
    }
}

#[test]
fn bound_holds_when_assumptions_hold() {
    // eps_c = 20 eps_d^2 with ideal gates; r + 1 <= eps_d / eps_c requires eps_d <= 1/60
    for spec in [
        ChannelSpec::dephasing(1e-4).unwrap(),
        ChannelSpec::rotation([0.0, 0.0, 1.0], 2.0 * 0.012f64.asin()).unwrap(),
        ChannelSpec::depolarizing(2e-4).unwrap(),
    ] {
        let eps_d = spec.channel_error().unwrap();
        let eps_c = 20.0 * eps_d * eps_d;
        assert!(check_assumption4(2, eps_c, eps_d), "{spec}");
        let reports = ccp_channel(&CCPConfig::new(five_qubit_code(), 2, 4, spec)).unwrap();
        for rep in reports {
            assert!(rep.error_amplitude <= 3.0 * eps_c + 1e-6, "{spec} level {}", rep.level);
        }
    }
}

#[test]
fn large_depolarizing_diverges() {
    let spec = ChannelSpec::depolarizing(0.6).unwrap();
    assert!(spec.channel_error().unwrap() >= 0.5);
    let reports = ccp_channel(&CCPConfig::new(five_qubit_code(), 2, 4, spec)).unwrap();
    for w in reports.windows(2) {
        assert!(w[1].error_amplitude >= w[0].error_amplitude - 1e-9);
    }
}

#[test]
fn level_one_report_is_the_block_channel() {
    let code = five_qubit_code();
    let spec = ChannelSpec::bit_flip(0.03).unwrap();
    let reports = ccp_channel(&CCPConfig::new(code.clone(), 3, 1, spec)).unwrap();
    let block = block_channel(&code, &spec.build(), &NoiseModel::ideal(), 3).unwrap();
    assert!(reports[0].effective_channel.equivalent(&block, 1e-10));
}

#[test]
fn extra_wait_feeds_the_next_level() {
    let code = five_qubit_code();
    let spec = ChannelSpec::dephasing(0.01).unwrap();
    let wait = ChannelSpec::bit_flip(0.01).unwrap();
    let mut cfg = CCPConfig::new(code.clone(), 2, 2, spec);
    cfg.extra_wait = Some(wait);
    let reports = ccp_channel(&cfg).unwrap();
    // level 2 sees W after L after W, per qubit
    let w = QubitChannel::from_operator(&wait.build()).unwrap();
    let inner = w.then(&reports[0].channel).then(&w);
    let expected = block_qubit_channel(&code, &WaitSchedule::uniform(&inner, 2, 5), &NoiseModel::ideal(), false)
        .unwrap();
    assert!((expected.deviation() - reports[1].channel.deviation()).norm() < 1e-12);
    let plain = ccp_channel(&CCPConfig::new(code, 2, 2, spec)).unwrap();
    assert!(reports[1].error_amplitude > plain[1].error_amplitude);
}

#[test]
fn classical_code_and_budget_errors() {
    let cfg = CCPConfig::new(bit_flip_code(), 2, 1, ChannelSpec::bit_flip(0.1).unwrap());
    assert!(matches!(ccp_channel(&cfg), Err(Error::NonQuantumCode(_))));
    let mut ok = cfg.clone();
    ok.allow_classical_code = true;
    assert_eq!(ccp_channel(&ok).unwrap().len(), 1);

    let cfg = CCPConfig::new(five_qubit_code(), 2, 6, ChannelSpec::identity());
    assert!(matches!(ccp_channel_with_budget(&cfg, 1000), Err(Error::BudgetExceeded { .. })));
    assert!(ccp_channel_with_budget(&cfg, DEFAULT_BUDGET).is_ok());

    let bad = CCPConfig::new(five_qubit_code(), 1, 1, ChannelSpec::identity());
    assert!(ccp_channel(&bad).is_err());
    let bad = CCPConfig::new(five_qubit_code(), 2, 0, ChannelSpec::identity());
    assert!(ccp_channel(&bad).is_err());
}

#[test]
fn ideal_identity_pipeline_is_exact() {
    let reports = ccp_channel(&CCPConfig::new(five_qubit_code(), 2, 3, ChannelSpec::identity())).unwrap();
    for rep in reports {
        assert!(rep.error_amplitude <= 1e-9);
        assert!(rep.effective_channel.equivalent(&GeneralizedOperator::identity(2), 1e-9));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn small_depolarizing_contracts(p in 1e-4f64..0.02) {
        let reports = ccp_channel(&CCPConfig::new(five_qubit_code(), 2, 4, ChannelSpec::depolarizing(p).unwrap())).unwrap();
        for w in reports.windows(2) {
            prop_assert!(w[1].error_amplitude <= w[0].error_amplitude + 1e-9);
        }
    }

    #[test]
    fn random_pauli_blocks_match_frame_oracle(px in 0.0f64..0.05, py in 0.0f64..0.05, pz in 0.0f64..0.05) {
        let code = five_qubit_code();
        let ch = pauli_channel(px, py, pz);
        let block = block_qubit_channel(&code, &WaitSchedule::uniform(&ch, 2, 5), &NoiseModel::ideal(), false).unwrap();
        let w = block.pauli_weights();
        let oracle = common::exact_block_pauli(&code, [px, py, pz], 2);
        for k in 0..4 {
            prop_assert!((w[k] - oracle[k]).abs() < 1e-12);
        }
    }
}
