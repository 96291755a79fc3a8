use std::f64::consts::SQRT_2;
use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use tridot_core::dynamics::{evolve_piecewise, StateVector, StaticPropagator};
use tridot_core::gatelab::Qubits;
use tridot_core::hubbard::{build_hubbard, HubbardTerms};
use tridot_core::linalg::Eigensystem;
use tridot_core::noise::{gen_one_over_f, OneOverFConfig};
use tridot_core::{fidelity_trace, Basis, ChargeNoise, ExperimentConfig, HubbardParams, Initial, Sz, Target};

fn processing() -> HubbardParams {
    HubbardParams::processing(SQRT_2, 20.0)
}

fn hamiltonian(c: &mut Criterion) {
    let full = Basis::full();
    c.bench_function("build_hubbard_full", |b| b.iter(|| build_hubbard(black_box(&processing()), &full).unwrap()));
    let h = build_hubbard(&processing(), &full).unwrap();
    c.bench_function("eigensystem_15x15", |b| b.iter(|| Eigensystem::new(black_box(h.matrix()))));
}

fn propagation(c: &mut Criterion) {
    let basis = Basis::sector(Sz::Zero);
    let terms = HubbardTerms::new(&basis).unwrap();
    let psi0 = StateVector::basis_state(&basis, Qubits::UpDown.ket()).unwrap();
    let h = build_hubbard(&processing(), &basis).unwrap();
    let prop = StaticPropagator::new(&h).unwrap();
    c.bench_function("static_evolve_sector", |b| b.iter(|| prop.evolve(&psi0, black_box(6.3)).unwrap()));
    c.bench_function("piecewise_1000_steps", |b| {
        b.iter(|| {
            let provider = |k: usize| {
                let mut q = processing();
                q.t_ac = SQRT_2 * (1.0 + 0.01 * (k as f64 * 0.01).sin());
                Ok(terms.assemble_matrix(&q))
            };
            evolve_piecewise(provider, &psi0, 0.01, 1000, &[]).unwrap()
        })
    });
}

fn noise(c: &mut Criterion) {
    let cfg = OneOverFConfig::full_band(0.01, 1 << 12, 0.01, 7, 0);
    c.bench_function("one_over_f_4096", |b| b.iter(|| gen_one_over_f(black_box(&cfg)).unwrap()));
    let exp = ExperimentConfig {
        charge: Some(ChargeNoise::with_amplitude(0.01)),
        n_mc: 8,
        seed: 3,
        workers: 1,
        ..ExperimentConfig::noiseless(processing(), Initial::UpUp, vec![Target::SelfOverlap], 5.0)
    };
    c.bench_function("noisy_trace_8_samples", |b| b.iter(|| fidelity_trace(black_box(&exp)).unwrap()));
}

criterion_group! {
    name = kernels;
    config = Criterion::default().sample_size(20);
    targets = hamiltonian, propagation, noise
}
criterion_main!(kernels);
