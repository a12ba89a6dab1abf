use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use polygate_bench::{design, graded_stiffness, lattice};
use polygate_core::gate::{evaluate_gate, GateSettings, RelaxPolicy, DEFAULT_DRIVE_AMPLITUDE};
use polygate_core::{amplitude_at, normal_modes, relax_fire, simulate, DriveSpec, FireParams, InteractionLaw, SimParams};

fn relaxation(c: &mut Criterion) {
    let p = lattice();
    let k = graded_stiffness(p.len());
    let law = InteractionLaw::default();
    c.bench_function("relax_fire 5x6", |b| {
        b.iter(|| relax_fire(black_box(&p), &k, &law, &FireParams::default()).unwrap())
    });
}

fn modes(c: &mut Criterion) {
    let d = design();
    c.bench_function("normal_modes 5x6", |b| {
        b.iter(|| normal_modes(black_box(&d.packing), &d.stiffness, &InteractionLaw::default()).unwrap())
    });
}

fn dynamics(c: &mut Criterion) {
    let d = design();
    let drive = DriveSpec {
        input_ports: d.ports.inputs,
        source_port: d.ports.source,
        output_port: d.ports.output,
        a1: DEFAULT_DRIVE_AMPLITUDE,
        a2: DEFAULT_DRIVE_AMPLITUDE,
        a_s: DEFAULT_DRIVE_AMPLITUDE,
        frequency: 10.0,
        phase1: 0.0,
        phase2: 0.0,
        bits: [1, 1],
    };
    let mut g = c.benchmark_group("dynamics");
    g.sample_size(10);
    g.bench_function("simulate one case", |b| {
        b.iter(|| simulate(black_box(&d.packing), &d.stiffness, &drive, &SimParams::default()).unwrap())
    });
    let reuse = GateSettings {
        relax: RelaxPolicy::Reuse,
        ..Default::default()
    };
    g.bench_function("evaluate_gate four cases", |b| {
        b.iter(|| evaluate_gate(black_box(&d), &reuse, 10.0).unwrap())
    });
    g.finish();
}

fn spectral(c: &mut Criterion) {
    let dt = 1e-4;
    let series: Vec<f64> = (0..10_000).map(|i| (2.0 * std::f64::consts::PI * 10.0 * i as f64 * dt).sin()).collect();
    c.bench_function("amplitude_at 1e4 samples", |b| {
        b.iter(|| amplitude_at(black_box(&series), dt, 10.0).unwrap())
    });
}

criterion_group!(benches, relaxation, modes, dynamics, spectral);
criterion_main!(benches);
