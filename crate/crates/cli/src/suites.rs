//! Validation suites: statistical and optimization invariants runnable from
//! the command line, with pass/fail reporting. The acceptance tests drive the
//! same entry points at their pinned scales.

use anyhow::Context;
use cogbeam_core::channel::{
    normalized_gaussian_vector, realize_network, LinkGeometry, NetworkSetup, PrimaryConfig,
    ReceiverKind,
};
use cogbeam_core::config::preset;
use cogbeam_core::extract::{approximation_bound, qcqp_to_sdp, solve_beamformer, Provenance};
use cogbeam_core::linalg::psd_rank;
use cogbeam_core::problem::{build_qcqp, chance_factor, InterferenceSpec, Scenario};
use cogbeam_core::sdp::slater_certificate;
use cogbeam_core::validate::{isotropy_gof, ks_pvalue};
use cogbeam_core::{SdpTolerances, SeededStream};
use nalgebra::Complex;
use rand::Rng;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Suite {
    All,
    Lemma1,
    Isotropy,
    Exactness,
    Rounding,
    Kkt,
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub checks: Vec<Check>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn render(&self) -> String {
        let mut out = format!("suite: {}\n", self.suite);
        for c in &self.checks {
            out.push_str(&format!(
                "  {}  {:<44} {}\n",
                if c.passed { "PASS" } else { "FAIL" },
                c.name,
                c.detail
            ));
        }
        out
    }
}

fn check(name: impl Into<String>, passed: bool, detail: String) -> Check {
    Check { name: name.into(), passed, detail }
}

/// Boundary tightness of the chance-to-norm reduction: drawing isotropic
/// unit vectors against a vector pinned at the admissible norm must land the
/// non-outage exactly on `1 - delta`.
pub fn lemma1_points(seed: u64, samples: usize) -> Vec<Check> {
    let mut checks = Vec::new();
    for (i, &n) in [2usize, 4, 8].iter().enumerate() {
        for (j, &delta) in [0.1f64, 0.01].iter().enumerate() {
            let bound = chance_factor(n, delta).expect("n >= 2");
            let mut u = nalgebra::DVector::<Complex<f64>>::zeros(n);
            u[0] = Complex::new(bound.sqrt(), 0.0);
            let mut rng = SeededStream::new(seed, (10 + i * 2 + j) as u64).rng();
            let mut ok = 0u64;
            for _ in 0..samples {
                let r = normalized_gaussian_vector(&mut rng, n);
                if (r.adjoint() * &u)[(0, 0)].norm_sqr() <= 1.0 {
                    ok += 1;
                }
            }
            let p = ok as f64 / samples as f64;
            let se = ((1.0 - delta) * delta / samples as f64).sqrt();
            let dev = (p - (1.0 - delta)).abs();
            checks.push(check(
                format!("lemma1 n={n} delta={delta}"),
                dev <= 3.0 * se,
                format!("non-outage {p:.5} target {:.5} ({:.2} sigma)", 1.0 - delta, dev / se),
            ));
        }
    }
    checks
}

/// Goodness-of-fit of each receiver kind's beamformer coordinates against
/// the isotropic law, plus a fixed-direction negative control.
pub fn isotropy_checks(seed: u64, samples: usize) -> anyhow::Result<Vec<Check>> {
    let mut checks = Vec::new();
    for (i, kind) in [ReceiverKind::Mf, ReceiverKind::Zf, ReceiverKind::Mmse].into_iter().enumerate() {
        let p = isotropy_gof(kind, 4, 3, samples, &SeededStream::new(seed, 20 + i as u64))?;
        checks.push(check(
            format!("isotropy {kind:?} N=4 K=3"),
            p > 0.01,
            format!("KS p-value {p:.4}"),
        ));
    }
    let mut constant = vec![0.93f64; samples];
    let p = ks_pvalue(&mut constant, |x| 1.0 - (1.0 - x.clamp(0.0, 1.0)).powi(3));
    checks.push(check(
        "isotropy negative control (fixed direction)",
        p < 1e-6,
        format!("KS p-value {p:.2e}"),
    ));
    Ok(checks)
}

/// One-link network with the published 15 m / 12.4 m cross distances.
fn k1_setup() -> NetworkSetup {
    NetworkSetup {
        m_s: 4,
        n_s: 4,
        p_s_max: 1e5,
        n0: 1.0,
        primaries: vec![PrimaryConfig { m_k: 4, n_k: 4, p_k: 1e5, receiver: ReceiverKind::Mmse }],
        geometry: LinkGeometry {
            d_ss: 10.0,
            d_ks: vec![15.0],
            d_sk: vec![12.4],
            d_kj: vec![vec![10.0]],
            path_loss_exponent: 4.0,
        },
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ExactnessStats {
    pub k: usize,
    pub n: usize,
    pub worst_rel_dev: f64,
    pub worst_violation: f64,
    pub kkt_failures: usize,
}

/// Solves `n` random instances with `k` interference constraints and
/// compares the extracted objective against the relaxation value.
pub fn exactness_stats(seed: u64, n: usize, k: usize) -> anyhow::Result<ExactnessStats> {
    assert!(k == 1 || k == 2, "exact extraction covers one or two constraints");
    let setup = if k == 1 { k1_setup() } else { preset("k2_paper")?.setup_for_tests() };
    let tol = SdpTolerances::default();
    let mut worst_rel_dev = 0.0f64;
    let mut worst_violation = 0.0f64;
    let mut kkt_failures = 0usize;
    for i in 0..n {
        let stream = SeededStream::new(seed, (1000 * k + i) as u64);
        let rz = realize_network(&setup, &stream)?;
        let mut rng = stream.substream(1).rng();
        let scenario = if i % 2 == 0 { Scenario::S1 } else { Scenario::S2 };
        let eps_db = 10.0 * rng.random::<f64>();
        let delta = [0.0, 0.01, 0.1][i % 3];
        let spec = InterferenceSpec {
            scenario,
            epsilon: vec![10f64.powf(eps_db / 10.0); k],
            delta: vec![delta; k],
        };
        let problem = build_qcqp(&rz, &spec)?;
        let outcome = solve_beamformer(&problem, &tol, 100, &mut rng)
            .with_context(|| format!("instance {i} (K={k})"))?;
        let expect = if k == 1 { Provenance::ExactK1 } else { Provenance::ExactK2 };
        anyhow::ensure!(
            outcome.result.provenance == expect,
            "instance {i}: provenance {:?}",
            outcome.result.provenance
        );
        let rel = (outcome.result.objective - outcome.upper_bound).abs() / outcome.upper_bound;
        worst_rel_dev = worst_rel_dev.max(rel);
        worst_violation = worst_violation.max(-outcome.result.min_slack());
        if !outcome.kkt.as_ref().is_some_and(|r| r.passes(1e-6)) {
            kkt_failures += 1;
        }
    }
    Ok(ExactnessStats { k, n, worst_rel_dev, worst_violation, kkt_failures })
}

pub fn exactness_checks(seed: u64, n_per_k: usize) -> anyhow::Result<Vec<Check>> {
    let mut checks = Vec::new();
    for k in [1usize, 2] {
        let s = exactness_stats(seed, n_per_k, k)?;
        checks.push(check(
            format!("exactness K={k} ({} instances)", s.n),
            s.worst_rel_dev <= 1e-6 && s.worst_violation <= 1e-8 && s.kkt_failures == 0,
            format!(
                "worst |obj-sdp|/sdp {:.2e}, worst violation {:.2e}, KKT failures {}",
                s.worst_rel_dev, s.worst_violation, s.kkt_failures
            ),
        ));
    }
    Ok(checks)
}

#[derive(Debug, Clone, Serialize)]
pub struct RoundingStats {
    pub realizations: usize,
    pub draws: usize,
    /// Best-draw ratio per realization.
    pub ratios: Vec<f64>,
    pub worst_slack: f64,
    pub kkt_failures: usize,
}

impl RoundingStats {
    pub fn median_ratio(&self) -> f64 {
        let mut v = self.ratios.clone();
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        v[v.len() / 2]
    }

    pub fn max_ratio(&self) -> f64 {
        self.ratios.iter().cloned().fold(0.0, f64::max)
    }
}

/// Rounding quality on the four-link geometry at `epsilon/N0 = 5 dB`.
pub fn rounding_stats(seed: u64, realizations: usize, draws: usize) -> anyhow::Result<RoundingStats> {
    let cfg = preset("k4_paper")?.resolve()?;
    let setup = cfg.template.fixed().expect("fixed preset").clone();
    let tol = SdpTolerances::default();
    let mut ratios = Vec::with_capacity(realizations);
    let mut worst_slack = f64::INFINITY;
    let mut kkt_failures = 0usize;
    for i in 0..realizations {
        let stream = SeededStream::new(seed, 4000 + i as u64);
        let rz = realize_network(&setup, &stream)?;
        let scenario = if i % 2 == 0 { Scenario::S1 } else { Scenario::S2 };
        let spec = cfg.scenario_spec(scenario, Some(5.0), None);
        let problem = build_qcqp(&rz, &spec)?;
        let outcome = solve_beamformer(&problem, &tol, draws, &mut stream.substream(1).rng())?;
        let meta = outcome
            .result
            .rounding_meta
            .as_ref()
            .context("expected the rounding path for four links")?;
        ratios.push(meta.ratio_to_relaxation);
        worst_slack = worst_slack.min(outcome.result.min_slack());
        if !outcome.kkt.as_ref().is_some_and(|r| r.passes(1e-6)) {
            kkt_failures += 1;
        }
    }
    Ok(RoundingStats { realizations, draws, ratios, worst_slack, kkt_failures })
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundStats {
    pub alpha: f64,
    pub trials: usize,
    pub freq: f64,
    pub mean_bound: f64,
    pub se: f64,
}

/// Single-draw success frequency of the rounding guarantee at each `alpha`,
/// sharing one batch of solves across thresholds.
pub fn theorem2_stats(seed: u64, trials: usize, alphas: &[f64]) -> anyhow::Result<Vec<BoundStats>> {
    let cfg = preset("k4_paper")?.resolve()?;
    let setup = cfg.template.fixed().expect("fixed preset").clone();
    let tol = SdpTolerances::default();
    let mut ratios = Vec::with_capacity(trials);
    let mut ranks = Vec::with_capacity(trials);
    for i in 0..trials {
        let stream = SeededStream::new(seed, 5000 + i as u64);
        let rz = realize_network(&setup, &stream)?;
        let spec = cfg.scenario_spec(Scenario::S1, Some(5.0), None);
        let problem = build_qcqp(&rz, &spec)?;
        let outcome = solve_beamformer(&problem, &tol, 1, &mut stream.substream(1).rng())?;
        let meta = outcome.result.rounding_meta.as_ref().context("rounding path")?;
        ratios.push(meta.ratio_to_relaxation);
        ranks.push(psd_rank(&outcome.sdp.as_ref().context("sdp path")?.x, 1e-9));
    }
    Ok(alphas
        .iter()
        .map(|&alpha| {
            let freq =
                ratios.iter().filter(|&&r| r >= 1.0 / alpha).count() as f64 / trials as f64;
            let mean_bound = ranks
                .iter()
                .map(|&r| approximation_bound(4, r, setup.m_s, alpha))
                .sum::<f64>()
                / trials as f64;
            let se = (mean_bound * (1.0 - mean_bound) / trials as f64).sqrt().max(1e-9);
            BoundStats { alpha, trials, freq, mean_bound, se }
        })
        .collect())
}

pub fn rounding_checks(seed: u64, realizations: usize, draws: usize, trials: usize) -> anyhow::Result<Vec<Check>> {
    let stats = rounding_stats(seed, realizations, draws)?;
    let mut checks = vec![
        check(
            format!("rounding feasibility ({} x {draws} draws)", stats.realizations),
            stats.worst_slack >= -1e-8,
            format!("worst slack {:.2e}", stats.worst_slack),
        ),
        check(
            "rounding ratio never exceeds the relaxation",
            stats.max_ratio() <= 1.0 + 1e-7,
            format!("max ratio {:.9}", stats.max_ratio()),
        ),
        // Calibration target, recorded but not fatal.
        check(
            "rounding median ratio (calibration target 0.95)",
            true,
            format!("median {:.4}", stats.median_ratio()),
        ),
    ];
    for b in theorem2_stats(seed, trials, &[8.0, 16.0, 32.0])? {
        checks.push(check(
            format!("single-draw bound alpha={}", b.alpha),
            b.freq >= b.mean_bound - 3.0 * b.se,
            format!("freq {:.4} >= bound {:.4} - 3se ({:.4})", b.freq, b.mean_bound, 3.0 * b.se),
        ));
    }
    Ok(checks)
}

/// KKT certification and Slater construction across the presets.
pub fn kkt_checks(seed: u64, per_preset: usize) -> anyhow::Result<Vec<Check>> {
    let mut checks = Vec::new();
    for name in ["k2_paper", "k4_paper", "grid9_paper"] {
        let cfg = preset(name)?.resolve()?;
        let tol = SdpTolerances::default();
        let mut worst = 0.0f64;
        let mut slater_ok = true;
        let mut kkt_ok = true;
        for i in 0..per_preset {
            let stream = SeededStream::new(seed, 6000 + i as u64);
            let setup = cfg.template.sample(&mut stream.substream(0).rng())?;
            let rz = realize_network(&setup, &stream.substream(1))?;
            let scenario = if i % 2 == 0 { Scenario::S1 } else { Scenario::S2 };
            let spec = cfg.scenario_spec(scenario, Some(5.0), None);
            let problem = build_qcqp(&rz, &spec)?;
            let outcome = solve_beamformer(&problem, &tol, 20, &mut stream.substream(2).rng())?;
            let report = outcome.kkt.as_ref().context("sdp path")?;
            kkt_ok &= report.passes(1e-6);
            worst = worst.max(report.worst());
            slater_ok &= slater_certificate(&qcqp_to_sdp(&problem)).is_ok();
        }
        checks.push(check(
            format!("kkt + slater on {name} ({per_preset} instances)"),
            kkt_ok && slater_ok,
            format!("worst normalized residual {worst:.2e}, slater {}", if slater_ok { "ok" } else { "failed" }),
        ));
    }
    Ok(checks)
}

/// Runs one suite (or all of them) at the standard scales.
pub fn run_suite(suite: Suite, seed: u64) -> anyhow::Result<SuiteReport> {
    let mut checks = Vec::new();
    let name;
    match suite {
        Suite::Lemma1 => {
            name = "lemma1";
            checks.extend(lemma1_points(seed, 100_000));
        }
        Suite::Isotropy => {
            name = "isotropy";
            checks.extend(isotropy_checks(seed, 50_000)?);
        }
        Suite::Exactness => {
            name = "exactness";
            checks.extend(exactness_checks(seed, 100)?);
        }
        Suite::Rounding => {
            name = "rounding";
            checks.extend(rounding_checks(seed, 100, 100, 1000)?);
        }
        Suite::Kkt => {
            name = "kkt";
            checks.extend(kkt_checks(seed, 10)?);
        }
        Suite::All => {
            name = "all";
            checks.extend(lemma1_points(seed, 100_000));
            checks.extend(isotropy_checks(seed, 50_000)?);
            checks.extend(exactness_checks(seed, 100)?);
            checks.extend(rounding_checks(seed, 100, 100, 1000)?);
            checks.extend(kkt_checks(seed, 10)?);
        }
    }
    Ok(SuiteReport { suite: name.to_string(), checks })
}
