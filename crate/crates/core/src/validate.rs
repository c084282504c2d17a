//! Independent oracles: Monte Carlo outage estimation, brute-force QCQP
//! search, and distributional goodness-of-fit tests.
//!
//! These deliberately avoid the analytic shortcuts used by the optimizer so
//! they can serve as cross-checks: outage is counted by resampling the actual
//! receiver pipeline, and the brute-force search walks an explicit grid over
//! the beamformer sphere.

use serde::{Deserialize, Serialize};

use crate::channel::NetworkRealization;
use crate::error::{Error, Result};
use crate::linalg::{quad_form, CVec};
use crate::problem::{QcqpProblem, Scenario};
use crate::rng::SeededStream;

/// Empirical outage probability with its binomial standard error.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OutageEstimate {
    pub p_hat: f64,
    pub n_samples: usize,
    pub std_err: f64,
    pub target_delta: f64,
}

impl OutageEstimate {
    /// |p_hat - target| in standard errors (capped below by a tiny floor so
    /// a zero-variance estimate still compares).
    pub fn sigmas_from_target(&self) -> f64 {
        (self.p_hat - self.target_delta).abs() / self.std_err.max(1e-12)
    }
}

/// Estimates the interference outage probability of a fixed beamformer at
/// primary link `k` by resampling what the scenario treats as unknown: the
/// receive beamformer alone ([`Scenario::S2`]) or the receive beamformer and
/// the cross channel ([`Scenario::S3`]).
pub fn mc_outage(
    t: &CVec,
    scenario: Scenario,
    rz: &NetworkRealization,
    k: usize,
    epsilon: f64,
    target_delta: f64,
    n_samples: usize,
    stream: &SeededStream,
) -> Result<OutageEstimate> {
    if n_samples < 1_000 {
        return Err(Error::InvalidConfig(
            "outage estimation below 1000 samples has a meaningless confidence interval".into(),
        ));
    }
    if matches!(scenario, Scenario::S1) {
        return Err(Error::InvalidConfig(
            "the full-knowledge scenario has deterministic interference; nothing to sample".into(),
        ));
    }
    let alpha = rz.gains.alpha_ks[k];
    let n_k = rz.primaries[k].n_k;
    let mut rng = stream.rng();
    let mut outages = 0usize;
    for _ in 0..n_samples {
        let r = rz.resample_receiver(k, &mut rng)?;
        let u = match scenario {
            Scenario::S2 => rz.cross.h_ks[k].adjoint() * &r,
            Scenario::S3 => {
                let h = crate::channel::sample_gaussian_matrix(&mut rng, n_k, rz.secondary.m_s);
                h.adjoint() * &r
            }
            Scenario::S1 => unreachable!(),
        };
        let interference = alpha * (u.adjoint() * t)[(0, 0)].norm_sqr();
        if interference > epsilon {
            outages += 1;
        }
    }
    let p_hat = outages as f64 / n_samples as f64;
    Ok(OutageEstimate {
        p_hat,
        n_samples,
        std_err: (p_hat * (1.0 - p_hat) / n_samples as f64).sqrt(),
        target_delta,
    })
}

/// Grid density for the brute-force search.
#[derive(Debug, Clone, Copy)]
pub struct GridResolution {
    pub theta: usize,
    pub phi: usize,
    pub amplitude: usize,
}

impl Default for GridResolution {
    fn default() -> Self {
        Self { theta: 100, phi: 100, amplitude: 50 }
    }
}

/// Exhaustive search over a parametrized beamformer sphere times an
/// amplitude grid, followed by a compass-style local polish. Supports up to
/// three transmit antennas; beyond that the grid cost explodes.
///
/// The reported objective is a lower bound on the true optimum within grid
/// error; the sandwich `brute_force <= relaxation value` must always hold.
pub fn brute_force_qcqp(problem: &QcqpProblem, grid: &GridResolution) -> Result<(CVec, f64)> {
    let m = problem.dim();
    if m > 3 {
        return Err(Error::UnsupportedDimension(format!(
            "brute force supports at most 3 transmit antennas, got {m}"
        )));
    }
    let amp_max = problem.p_max.sqrt();

    // Parameter vector: [angles.., amplitude]. Angles parametrize a unit
    // direction with the first coordinate real.
    let n_params = match m {
        1 => 1,
        2 => 3,
        _ => 5,
    };
    let to_vector = |p: &[f64]| -> CVec {
        let amp = p[n_params - 1];
        match m {
            1 => CVec::from_vec(vec![nalgebra::Complex::new(amp, 0.0)]),
            2 => {
                let (th, ph) = (p[0], p[1]);
                CVec::from_vec(vec![
                    nalgebra::Complex::new(amp * th.cos(), 0.0),
                    nalgebra::Complex::from_polar(amp * th.sin(), ph),
                ])
            }
            _ => {
                let (t1, p1, t2, p2) = (p[0], p[1], p[2], p[3]);
                CVec::from_vec(vec![
                    nalgebra::Complex::new(amp * t1.cos(), 0.0),
                    nalgebra::Complex::from_polar(amp * t1.sin() * t2.cos(), p1),
                    nalgebra::Complex::from_polar(amp * t1.sin() * t2.sin(), p2),
                ])
            }
        }
    };
    let evaluate = |p: &[f64]| -> f64 {
        let t = to_vector(p);
        if t.norm_squared() > problem.p_max * (1.0 + 1e-12) {
            return f64::NEG_INFINITY;
        }
        for q in &problem.q {
            if quad_form(q, &t) > 1.0 + 1e-12 {
                return f64::NEG_INFINITY;
            }
        }
        quad_form(&problem.a, &t)
    };

    // For a fixed direction both the objective and every constraint are
    // quadratic in the amplitude, so the best feasible amplitude is the
    // tightest cap in closed form. The polish uses this to walk the angle
    // space with the amplitude always optimal.
    let direction_score = |angles: &[f64]| -> (f64, f64) {
        let mut p = angles.to_vec();
        p.push(1.0);
        let u = to_vector(&p);
        let mut cap_sq = problem.p_max;
        for q in &problem.q {
            let qv = quad_form(q, &u);
            if qv > 1e-300 {
                cap_sq = cap_sq.min(1.0 / qv);
            }
        }
        (cap_sq * quad_form(&problem.a, &u), cap_sq.sqrt())
    };

    let half_pi = std::f64::consts::FRAC_PI_2;
    let tau = std::f64::consts::TAU;
    let mut best_p = vec![0.0; n_params];
    let mut best_val = 0.0f64; // the zero beamformer is always feasible

    // Coarse grid pass.
    let lin = |steps: usize, max: f64| (0..steps).map(move |i| max * i as f64 / (steps - 1) as f64);
    match m {
        1 => {
            for amp in lin(grid.amplitude.max(2), amp_max) {
                let p = vec![amp];
                let v = evaluate(&p);
                if v > best_val {
                    best_val = v;
                    best_p = p;
                }
            }
        }
        2 => {
            for th in lin(grid.theta.max(2), half_pi) {
                for ph in lin(grid.phi.max(2), tau * (1.0 - 1e-9)) {
                    for amp in lin(grid.amplitude.max(2), amp_max) {
                        let p = vec![th, ph, amp];
                        let v = evaluate(&p);
                        if v > best_val {
                            best_val = v;
                            best_p = p;
                        }
                    }
                }
            }
        }
        _ => {
            let angles = (grid.theta / 4).max(8);
            let phases = (grid.phi / 4).max(8);
            let amps = (grid.amplitude / 2).max(8);
            for t1 in lin(angles, half_pi) {
                for p1 in lin(phases, tau * (1.0 - 1e-9)) {
                    for t2 in lin(angles, half_pi) {
                        for p2 in lin(phases, tau * (1.0 - 1e-9)) {
                            for amp in lin(amps, amp_max) {
                                let p = vec![t1, p1, t2, p2, amp];
                                let v = evaluate(&p);
                                if v > best_val {
                                    best_val = v;
                                    best_p = p;
                                }
                            }
                        }
                    }
                }
            }
        }
    }

    // Nelder-Mead polish over the angle coordinates, amplitude exact. The
    // active-constraint boundary forms ridges in angle space that defeat
    // axis-aligned steps; a reflecting simplex follows them.
    let angles0 = best_p[..n_params - 1].to_vec();
    let init_step = half_pi / grid.theta.max(2) as f64;
    let (angles, nm_val) = nelder_mead_max(|p| direction_score(p).0, &angles0, init_step, 500);
    let (mut polished, mut best_amp) = direction_score(&angles);
    let mut final_angles = angles;
    debug_assert!((polished - nm_val).abs() <= 1e-12 * (1.0 + nm_val.abs()));
    if polished < best_val {
        // The grid value is a floor; never return less.
        polished = best_val;
        final_angles = angles0;
        best_amp = best_p[n_params - 1];
    }

    let mut final_p = final_angles;
    final_p.push(best_amp);
    let t = to_vector(&final_p);
    Ok((crate::linalg::phase_normalize(&t), polished))
}

/// Simplex maximization of `f` from `x0` with initial edge length `step`.
fn nelder_mead_max(f: impl Fn(&[f64]) -> f64, x0: &[f64], step: f64, iters: usize) -> (Vec<f64>, f64) {
    let n = x0.len();
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    simplex.push((x0.to_vec(), f(x0)));
    for i in 0..n {
        let mut p = x0.to_vec();
        p[i] += step;
        let v = f(&p);
        simplex.push((p, v));
    }
    let (alpha, gamma, rho, sigma) = (1.0, 2.0, 0.5, 0.5);
    for _ in 0..iters {
        simplex.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap());
        let spread: f64 = (0..n)
            .map(|i| (simplex[0].0[i] - simplex[n].0[i]).abs())
            .fold(0.0, f64::max);
        if spread < 1e-12 {
            break;
        }
        let centroid: Vec<f64> =
            (0..n).map(|i| simplex[..n].iter().map(|(p, _)| p[i]).sum::<f64>() / n as f64).collect();
        let worst = simplex[n].clone();
        let reflect: Vec<f64> =
            (0..n).map(|i| centroid[i] + alpha * (centroid[i] - worst.0[i])).collect();
        let fr = f(&reflect);
        if fr > simplex[0].1 {
            let expand: Vec<f64> =
                (0..n).map(|i| centroid[i] + gamma * (reflect[i] - centroid[i])).collect();
            let fe = f(&expand);
            simplex[n] = if fe > fr { (expand, fe) } else { (reflect, fr) };
        } else if fr > simplex[n - 1].1 {
            simplex[n] = (reflect, fr);
        } else {
            let contract: Vec<f64> =
                (0..n).map(|i| centroid[i] + rho * (worst.0[i] - centroid[i])).collect();
            let fc = f(&contract);
            if fc > worst.1 {
                simplex[n] = (contract, fc);
            } else {
                let best = simplex[0].0.clone();
                for entry in simplex.iter_mut().skip(1) {
                    let shrunk: Vec<f64> =
                        (0..n).map(|i| best[i] + sigma * (entry.0[i] - best[i])).collect();
                    entry.1 = f(&shrunk);
                    entry.0 = shrunk;
                }
            }
        }
    }
    simplex.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap());
    simplex.swap_remove(0).into()
}

/// Kolmogorov-Smirnov goodness-of-fit p-value of the squared magnitude of a
/// receive-beamformer coordinate against its isotropic law `Beta(1, n-1)`.
/// Samples come from the actual receiver pipeline (fresh channels, transmit
/// beamformers, and weight matrices per draw).
pub fn isotropy_gof(
    kind: crate::channel::ReceiverKind,
    n_k: usize,
    k_links: usize,
    n_samples: usize,
    stream: &SeededStream,
) -> Result<f64> {
    if n_samples < 10_000 {
        return Err(Error::InvalidConfig("goodness-of-fit needs at least 10^4 samples".into()));
    }
    if n_k < 2 || k_links < 1 {
        return Err(Error::UnsupportedDimension(
            "isotropy test needs N_k >= 2 and at least one primary link".into(),
        ));
    }
    let setup = crate::channel::NetworkSetup {
        m_s: 2,
        n_s: 2,
        p_s_max: 1.0,
        n0: 1.0,
        primaries: (0..k_links)
            .map(|_| crate::channel::PrimaryConfig { m_k: n_k, n_k, p_k: 1.0, receiver: kind })
            .collect(),
        geometry: crate::channel::LinkGeometry {
            d_ss: 10.0,
            d_ks: vec![15.0; k_links],
            d_sk: vec![15.0; k_links],
            d_kj: (0..k_links)
                .map(|i| (0..k_links).map(|j| if i == j { 10.0 } else { 15.0 }).collect())
                .collect(),
            path_loss_exponent: 4.0,
        },
    };
    let rz = crate::channel::realize_network(&setup, &stream.substream(0))?;
    let mut rng = stream.substream(1).rng();
    let mut samples: Vec<f64> = Vec::with_capacity(n_samples);
    for _ in 0..n_samples {
        let r = rz.resample_receiver(0, &mut rng)?;
        samples.push(r[0].norm_sqr());
    }
    let shape = n_k as f64 - 1.0;
    Ok(ks_pvalue(&mut samples, |x| {
        if x <= 0.0 {
            0.0
        } else if x >= 1.0 {
            1.0
        } else {
            1.0 - (1.0 - x).powf(shape)
        }
    }))
}

/// Two-sided Kolmogorov-Smirnov p-value of `samples` against `cdf`.
/// Sorts the slice in place.
pub fn ks_pvalue(samples: &mut [f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let n = samples.len();
    assert!(n > 0, "empty sample");
    samples.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let nf = n as f64;
    let mut d = 0.0f64;
    for (i, &x) in samples.iter().enumerate() {
        let f = cdf(x);
        d = d.max(f - i as f64 / nf).max((i + 1) as f64 / nf - f);
    }
    kolmogorov_sf((nf.sqrt() + 0.12 + 0.11 / nf.sqrt()) * d)
}

/// Survival function of the Kolmogorov distribution.
fn kolmogorov_sf(lambda: f64) -> f64 {
    if lambda < 1e-8 {
        return 1.0;
    }
    if lambda < 1.18 {
        // Complementary series converges fast for small arguments.
        let f = (2.0 * std::f64::consts::PI).sqrt() / lambda;
        let mut cdf = 0.0;
        for k in 0..20 {
            let j = 2  * k + 1;
            cdf += (-(j as f64 * std::f64::consts::PI).powi(2) / (8.0 * lambda * lambda)).exp();
        }
        (1.0 - f * cdf).clamp(0.0, 1.0)
    } else {
        let mut sf = 0.0;
        for j in 1..=100 {
            let term = (-2.0 * (j as f64 * lambda).powi(2)).exp();
            sf += if j % 2 == 1 { 2.0 * term } else { -2.0 * term };
            if term < 1e-300 {
                break;
            }
        }
        sf.clamp(0.0, 1.0)
    }
}

/// Standard normal CDF via a rational erf approximation (absolute error
/// below 2e-7, ample for goodness-of-fit use).
pub fn standard_normal_cdf(x: f64) -> f64 {
    0.5 * (1.0 + erf(x / std::f64::consts::SQRT_2))
}

fn erf(x: f64) -> f64 {
    let sign = x.signum();
    let x = x.abs();
    let t = 1.0 / (1.0 + 0.327_591_1 * x);
    let poly = t
        * (0.254_829_592
            + t * (-0.284_496_736 + t * (1.421_413_741 + t * (-1.453_152_027 + t * 1.061_405_429))));
    sign * (1.0 - poly * (-x * x).exp())
}
