//! Distributional checks tying the sampler to its closed-form laws.
//!
//! Desk-scale versions run here; the full-scale versions live in the
//! acceptance suite.

use cogbeam_core::channel::{
    normalized_gaussian_vector, realize_network, sample_gaussian_matrix, ReceiverKind,
};
use cogbeam_core::config::preset;
use cogbeam_core::problem::{chance_factor, f_distribution_cdf, q_scenario2, InterferenceSpec, Scenario};
use cogbeam_core::validate::{isotropy_gof, ks_pvalue, mc_outage, standard_normal_cdf};
use cogbeam_core::SeededStream;
use nalgebra::Complex;

#[test]
fn scalar_gaussian_components_pass_normality() {
    let mut rng = SeededStream::new(2024, 0).rng();
    let n = 100_000;
    let mut re = Vec::with_capacity(n);
    let mut im = Vec::with_capacity(n);
    for _ in 0..n {
        let z = sample_gaussian_matrix(&mut rng, 1, 1)[(0, 0)];
        re.push(z.re);
        im.push(z.im);
    }
    // Each component is N(0, 1/2).
    let sigma = 0.5f64.sqrt();
    let p_re = ks_pvalue(&mut re, |x| standard_normal_cdf(x / sigma));
    let p_im = ks_pvalue(&mut im, |x| standard_normal_cdf(x / sigma));
    assert!(p_re > 0.01, "real part fails normality: p = {p_re}");
    assert!(p_im > 0.01, "imaginary part fails normality: p = {p_im}");
}

#[test]
fn chance_factor_boundary_hits_target_nonoutage() {
    // Reduced-scale sweep of the norm-inflation equivalence; the acceptance
    // suite runs the pinned 10^5-sample version.
    let draws = 20_000;
    for (i, &n) in [2usize, 4, 8].iter().enumerate() {
        for (j, &delta) in [0.1, 0.01].iter().enumerate() {
            let bound = chance_factor(n, delta).unwrap();
            let mut u = nalgebra::DVector::<Complex<f64>>::zeros(n);
            u[0] = Complex::new(bound.sqrt(), 0.0);
            let mut rng = SeededStream::new(99, (i * 2 + j) as u64).rng();
            let mut ok = 0u32;
            for _ in 0..draws {
                let r = normalized_gaussian_vector(&mut rng, n);
                if (r.adjoint() * &u)[(0, 0)].norm_sqr() <= 1.0 {
                    ok += 1;
                }
            }
            let p = ok as f64 / draws as f64;
            let se = ((1.0 - delta) * delta / draws as f64).sqrt();
            assert!(
                (p - (1.0 - delta)).abs() <= 4.0 * se,
                "n={n} delta={delta}: non-outage {p} vs {}",
                1.0 - delta
            );
        }
    }
}

#[test]
fn f_cdf_matches_projection_distribution() {
    // |r^H e_1|^2 = x/(1+...) relation: Pr{|r^H u|^2 <= zeta} for ||u||^2 > zeta
    // equals the closed-form F CDF. Monte Carlo cross-check at one point.
    let n = 4;
    let norm2: f64 = 2.5;
    let zeta = 1.0;
    let x = (norm2 - zeta) / (zeta * (n as f64 - 1.0));
    let expect = 1.0 - f_distribution_cdf(x, n);
    let mut rng = SeededStream::new(7, 0).rng();
    let mut u = nalgebra::DVector::<Complex<f64>>::zeros(n);
    u[0] = Complex::new(norm2.sqrt(), 0.0);
    let draws = 50_000;
    let mut ok = 0u32;
    for _ in 0..draws {
        let r = normalized_gaussian_vector(&mut rng, n);
        if (r.adjoint() * &u)[(0, 0)].norm_sqr() <= zeta {
            ok += 1;
        }
    }
    let p = ok as f64 / draws as f64;
    let se = (expect * (1.0 - expect) / draws as f64).sqrt();
    assert!((p - expect).abs() < 4.0 * se, "p = {p}, closed form = {expect}");
}

#[test]
fn receiver_isotropy_all_kinds_reduced_scale() {
    for (i, kind) in [ReceiverKind::Mf, ReceiverKind::Zf, ReceiverKind::Mmse].into_iter().enumerate() {
        let p = isotropy_gof(kind, 4, 3, 15_000, &SeededStream::new(500 + i as u64, 0)).unwrap();
        assert!(p > 0.01, "{kind:?} fails isotropy: p = {p}");
    }
    // Negative control: a pinned direction is wildly non-isotropic.
    let mut fixed: Vec<f64> = vec![0.97; 15_000];
    let p = ks_pvalue(&mut fixed, |x| 1.0 - (1.0 - x.clamp(0.0, 1.0)).powi(3));
    assert!(p < 1e-6, "fixed direction accepted: p = {p}");
}

#[test]
fn receiver_coordinate_means_agree() {
    // Isotropy implies every coordinate of r_k carries 1/N_k of the energy.
    let setup = preset("k2_paper").unwrap().setup_for_tests();
    let rz = realize_network(&setup, &SeededStream::new(31, 0)).unwrap();
    let mut rng = SeededStream::new(31, 1).rng();
    let draws = 20_000;
    let n_k = 4;
    let mut acc = vec![0.0f64; n_k];
    for _ in 0..draws {
        let r = rz.resample_receiver(0, &mut rng).unwrap();
        for (i, a) in acc.iter_mut().enumerate() {
            *a += r[i].norm_sqr();
        }
    }
    // Var of Beta(1,3) is 3/80; 3-sigma band on each mean, pairwise within 3
    // sigma of each other (sqrt(2) wider).
    let se = (0.0375f64 / draws as f64).sqrt();
    for (i, a) in acc.iter().enumerate() {
        let mean = a / draws as f64;
        assert!((mean - 0.25).abs() < 3.0 * se, "coordinate {i}: mean {mean}");
    }
    for i in 0..n_k {
        for j in i + 1..n_k {
            let (mi, mj) = (acc[i] / draws as f64, acc[j] / draws as f64);
            assert!((mi - mj).abs() < 3.0 * std::f64::consts::SQRT_2 * se);
        }
    }
}

#[test]
fn scenario2_boundary_outage_reduced_scale() {
    let setup = preset("k2_paper").unwrap().setup_for_tests();
    let rz = realize_network(&setup, &SeededStream::new(40, 0)).unwrap();
    let delta = 0.05;
    let spec = InterferenceSpec {
        scenario: Scenario::S2,
        epsilon: vec![1.0, 1.0],
        delta: vec![delta, delta],
    };
    let qs = q_scenario2(&rz, &spec).unwrap();
    // Any direction scaled onto the constraint boundary t^H Q t = 1.
    let mut rng = SeededStream::new(40, 1).rng();
    let dir = sample_gaussian_matrix(&mut rng, 4, 1).column(0).into_owned();
    let t = dir.clone().unscale(cogbeam_core::linalg::quad_form(&qs[0], &dir).sqrt());
    let est = mc_outage(&t, Scenario::S2, &rz, 0, spec.epsilon[0], delta, 20_000, &SeededStream::new(40, 2)).unwrap();
    assert!(
        est.sigmas_from_target() < 4.0,
        "boundary outage {} vs {delta} ({} sigma)",
        est.p_hat,
        est.sigmas_from_target()
    );
}

#[test]
fn scenario3_boundary_outage_reduced_scale() {
    let setup = preset("k2_paper").unwrap().setup_for_tests();
    let rz = realize_network(&setup, &SeededStream::new(41, 0)).unwrap();
    let delta: f64 = 0.1;
    let epsilon = 2.0;
    let alpha = rz.gains.alpha_ks[0];
    let norm2 = epsilon / (alpha * (1.0 / delta).ln());
    let mut rng = SeededStream::new(41, 1).rng();
    let dir = sample_gaussian_matrix(&mut rng, 4, 1).column(0).into_owned();
    let t = dir.clone().unscale(dir.norm()).scale(norm2.sqrt());
    let est = mc_outage(&t, Scenario::S3, &rz, 0, epsilon, delta, 20_000, &SeededStream::new(41, 2)).unwrap();
    assert!(
        est.sigmas_from_target() < 4.0,
        "boundary outage {} vs {delta} ({} sigma)",
        est.p_hat,
        est.sigmas_from_target()
    );
}

#[test]
fn scenario3_interference_is_exponential_for_any_unit_receiver() {
    // |r^H H t|^2 with fresh H is Exponential(1/||t||^2) regardless of how the
    // unit-norm r is produced; test with the MMSE receiver pipeline.
    let setup = preset("k2_paper").unwrap().setup_for_tests();
    let rz = realize_network(&setup, &SeededStream::new(42, 0)).unwrap();
    let mut rng = SeededStream::new(42, 1).rng();
    let t = sample_gaussian_matrix(&mut rng, 4, 1).column(0).into_owned().scale(1.7);
    let mean = t.norm_squared();
    let draws = 20_000;
    let mut samples = Vec::with_capacity(draws);
    for _ in 0..draws {
        let r = rz.resample_receiver(0, &mut rng).unwrap();
        let h = sample_gaussian_matrix(&mut rng, 4, 4);
        samples.push((r.adjoint() * h * &t)[(0, 0)].norm_sqr());
    }
    let p = ks_pvalue(&mut samples, |x| 1.0 - (-x / mean).exp());
    assert!(p > 0.01, "exponential fit rejected: p = {p}");
}
