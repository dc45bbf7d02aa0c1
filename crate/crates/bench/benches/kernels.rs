use std::hint::black_box;

use concatqec::ccp::block_channel;
use concatqec::{ccp_channel, five_qubit_code, mc_block_channel, CCPConfig, ChannelSpec, NoiseModel, PauliFamily};
use criterion::{criterion_group, criterion_main, Criterion};

fn amplitude(c: &mut Criterion) {
    let mut g = c.benchmark_group("channel_error");
    for spec in [
        ChannelSpec::depolarizing(0.05).unwrap(),
        ChannelSpec::amplitude_damping(0.1).unwrap(),
        ChannelSpec::rotation([0.6, 0.8, 0.0], 0.3).unwrap(),
    ] {
        g.bench_function(spec.kind().name(), |b| b.iter(|| black_box(spec).channel_error().unwrap()));
    }
    g.finish();
}

fn block(c: &mut Criterion) {
    let code = five_qubit_code();
    let inner = ChannelSpec::dephasing(0.01).unwrap().build();
    let ideal = NoiseModel::ideal();
    let gate = NoiseModel::gate_level(ChannelSpec::depolarizing(0.001).unwrap());
    c.bench_function("block_channel/ideal", |b| b.iter(|| block_channel(&code, black_box(&inner), &ideal, 2).unwrap()));
    c.bench_function("block_channel/gate_level", |b| b.iter(|| block_channel(&code, black_box(&inner), &gate, 2).unwrap()));
    let cfg = CCPConfig::new(code.clone(), 2, 3, ChannelSpec::dephasing(0.0025).unwrap());
    c.bench_function("ccp_channel/three_levels", |b| b.iter(|| ccp_channel(black_box(&cfg)).unwrap()));
}

fn monte_carlo(c: &mut Criterion) {
    let code = five_qubit_code();
    let probs = PauliFamily::Depolarizing.probs(0.03).unwrap();
    let mut g = c.benchmark_group("mc");
    g.sample_size(20);
    g.bench_function("block_10k", |b| b.iter(|| mc_block_channel(&code, black_box(probs), 0.0, 2, 10_000, 1).unwrap()));
    g.finish();
}

criterion_group!(benches, amplitude, block, monte_carlo);
criterion_main!(benches);
