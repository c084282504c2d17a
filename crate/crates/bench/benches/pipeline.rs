use criterion::{criterion_group, criterion_main, BatchSize, Criterion};

use cogbeam_core::channel::realize_network;
use cogbeam_core::config::preset;
use cogbeam_core::extract::{qcqp_to_sdp, randomized_round, rank_one_decompose, solve_beamformer};
use cogbeam_core::linalg::hermitize;
use cogbeam_core::problem::{build_qcqp, Scenario};
use cogbeam_core::sdp::solve_sdp;
use cogbeam_core::{SdpTolerances, SeededStream};

fn bench_realize(c: &mut Criterion) {
    let setup = preset("k4_paper").unwrap().setup_for_tests();
    let stream = SeededStream::new(1, 0);
    c.bench_function("realize_network_k4", |b| {
        b.iter(|| realize_network(&setup, &stream).unwrap())
    });
}

fn bench_solve_sdp(c: &mut Criterion) {
    let tol = SdpTolerances::default();
    for (name, preset_name, scenario) in [
        ("solve_sdp_k2_s1", "k2_paper", Scenario::S1),
        ("solve_sdp_k4_s2", "k4_paper", Scenario::S2),
    ] {
        let cfg = preset(preset_name).unwrap().resolve().unwrap();
        let setup = cfg.template.fixed().unwrap().clone();
        let rz = realize_network(&setup, &SeededStream::new(2, 0)).unwrap();
        let problem = build_qcqp(&rz, &cfg.scenario_spec(scenario, Some(5.0), None)).unwrap();
        let instance = qcqp_to_sdp(&problem);
        c.bench_function(name, |b| b.iter(|| solve_sdp(&instance, &tol).unwrap()));
    }
}

fn bench_end_to_end(c: &mut Criterion) {
    let cfg = preset("k4_paper").unwrap().resolve().unwrap();
    let setup = cfg.template.fixed().unwrap().clone();
    let rz = realize_network(&setup, &SeededStream::new(3, 0)).unwrap();
    let problem = build_qcqp(&rz, &cfg.scenario_spec(Scenario::S1, Some(5.0), None)).unwrap();
    let tol = SdpTolerances::default();
    c.bench_function("solve_beamformer_k4_100draws", |b| {
        b.iter_batched(
            || SeededStream::new(3, 1).rng(),
            |mut rng| solve_beamformer(&problem, &tol, 100, &mut rng).unwrap(),
            BatchSize::SmallInput,
        )
    });
}

fn bench_decompose_and_round(c: &mut Criterion) {
    let mut rng = SeededStream::new(4, 0).rng();
    let g = cogbeam_core::channel::sample_gaussian_matrix(&mut rng, 4, 3);
    let z = hermitize(&(&g * g.adjoint()));
    let a = hermitize(&cogbeam_core::channel::sample_gaussian_matrix(&mut rng, 4, 4));
    let b = hermitize(&cogbeam_core::channel::sample_gaussian_matrix(&mut rng, 4, 4));
    c.bench_function("rank_one_decompose_4x4_rank3", |bch| {
        bch.iter(|| rank_one_decompose(&z, &a, &b).unwrap())
    });

    let a_psd = {
        let g = cogbeam_core::channel::sample_gaussian_matrix(&mut rng, 4, 4);
        hermitize(&(&g * g.adjoint()))
    };
    let qs: Vec<_> = (0..4)
        .map(|_| {
            let u = cogbeam_core::channel::sample_gaussian_matrix(&mut rng, 4, 1).column(0).into_owned();
            hermitize(&(&u * u.adjoint()))
        })
        .collect();
    c.bench_function("randomized_round_100draws", |bch| {
        bch.iter_batched(
            || SeededStream::new(4, 1).rng(),
            |mut r| randomized_round(&z, &a_psd, &qs, 10.0, 100, &mut r).unwrap(),
            BatchSize::SmallInput,
        )
    });
}

criterion_group!(benches, bench_realize, bench_solve_sdp, bench_end_to_end, bench_decompose_and_round);
criterion_main!(benches);
