//! Figure-reproduction sweeps.
//!
//! A sweep runs all three knowledge scenarios over a grid of interference
//! thresholds (or outage budgets) and averages the achieved SINR, the
//! relaxation upper bound, and the analytic outage over realizations.
//!
//! Realizations are shared across the axis (common random numbers): cell
//! `(scenario, axis j, realization r)` reuses the channel draw of
//! `(scenario, r)`, so per-realization monotonicity in the budget transfers
//! to the averaged curves instead of being drowned in resampling noise, and
//! any cell can be recomputed in isolation from `(seed, scenario, r)` alone.

use anyhow::{bail, Context};
use cogbeam_core::channel::NetworkRealization;
use cogbeam_core::config::ResolvedConfig;
use cogbeam_core::extract::solve_beamformer;
use cogbeam_core::linalg::CVec;
use cogbeam_core::problem::{build_qcqp, f_distribution_cdf, InterferenceSpec, Scenario};
use cogbeam_core::SeededStream;
use rayon::prelude::*;
use serde::Serialize;

use crate::tags;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum SweepAxis {
    Epsilon,
    Delta,
}

/// One CSV row: a `(scenario, axis value)` cell aggregated over realizations.
#[derive(Debug, Clone, Serialize)]
pub struct SweepRecord {
    pub scenario: String,
    pub epsilon_over_n0_db: f64,
    pub delta: f64,
    pub mean_sinr_db: f64,
    pub std_sinr_db: f64,
    pub upper_bound_db: f64,
    pub mean_outage: f64,
    pub n_realizations: usize,
    pub failures: usize,
}

/// Linear-domain statistics kept alongside the dB records for tests that
/// need standard errors.
#[derive(Debug, Clone)]
pub struct CellStats {
    pub scenario: Scenario,
    pub axis_index: usize,
    pub axis_value: f64,
    pub mean_lin: f64,
    pub se_lin: f64,
    pub ub_mean_lin: f64,
    pub mean_outage: f64,
    pub n_ok: usize,
}

struct CellSample {
    sinr: f64,
    upper_bound: f64,
    outage: f64,
}

fn db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// Closed-form outage probability of a fixed beamformer under the
/// scenario's uncertainty: zero for full knowledge, the receive-beamformer
/// projection tail for the partial case, the exponential tail when nothing
/// is known. Reported as the worst link.
fn analytic_outage(rz: &NetworkRealization, spec: &InterferenceSpec, t: &CVec) -> f64 {
    let mut worst = 0.0f64;
    for k in 0..rz.k() {
        let alpha = rz.gains.alpha_ks[k];
        let zeta = spec.epsilon[k] / alpha;
        let outage = match spec.scenario {
            Scenario::S1 => 0.0,
            Scenario::S2 => {
                let u = &rz.cross.h_ks[k] * t;
                let norm2 = u.norm_squared();
                if norm2 <= zeta {
                    0.0
                } else {
                    let n = rz.primaries[k].n_k;
                    let x = (norm2 - zeta) / (zeta * (n as f64 - 1.0));
                    f_distribution_cdf(x, n)
                }
            }
            Scenario::S3 => {
                let norm2 = t.norm_squared();
                if norm2 > 0.0 {
                    (-zeta / norm2).exp()
                } else {
                    0.0
                }
            }
        };
        worst = worst.max(outage);
    }
    worst
}

fn axis_values(from: f64, to: f64, steps: usize) -> Vec<f64> {
    if steps <= 1 {
        return vec![from];
    }
    (0..steps).map(|i| from + (to - from) * i as f64 / (steps - 1) as f64).collect()
}

/// Runs the sweep and returns both the CSV rows and linear-domain stats.
pub fn run_sweep_detailed(
    cfg: &ResolvedConfig,
    axis: SweepAxis,
    from: f64,
    to: f64,
    steps: usize,
    realizations: usize,
    full: bool,
) -> anyhow::Result<(Vec<SweepRecord>, Vec<CellStats>)> {
    if steps < 1 {
        bail!("steps must be >= 1");
    }
    let n_real = if full { 50_000 } else { realizations };
    if n_real < 10 {
        bail!("at least 10 realizations are required");
    }
    let values = axis_values(from, to, steps);
    if axis == SweepAxis::Delta {
        if let Some(bad) = values.iter().find(|v| !(0.0..1.0).contains(*v)) {
            bail!("delta axis value {bad} outside [0, 1)");
        }
    }

    let root = SeededStream::new(cfg.seed, 0);
    let mut records = Vec::new();
    let mut stats = Vec::new();
    for (s_idx, scenario) in [Scenario::S1, Scenario::S2, Scenario::S3].into_iter().enumerate() {
        // One realization row at a time, shared across the whole axis.
        let rows: Vec<Vec<Result<CellSample, String>>> = (0..n_real)
            .into_par_iter()
            .map(|r| {
                realization_row(cfg, scenario, s_idx, r as u64, axis, &values, &root)
            })
            .collect();

        for (j, &value) in values.iter().enumerate() {
            let mut sinrs = Vec::with_capacity(n_real);
            let mut ubs = Vec::with_capacity(n_real);
            let mut outages = Vec::with_capacity(n_real);
            let mut failures = 0usize;
            for row in &rows {
                match &row[j] {
                    Ok(c) => {
                        sinrs.push(c.sinr);
                        ubs.push(c.upper_bound);
                        outages.push(c.outage);
                    }
                    Err(_) => failures += 1,
                }
            }
            let n_ok = sinrs.len();
            let mean_lin = mean(&sinrs);
            let ub_mean = mean(&ubs);
            let se_lin = if n_ok > 1 { std_dev(&sinrs) / (n_ok as f64).sqrt() } else { f64::NAN };
            let db_values: Vec<f64> = sinrs.iter().filter(|&&g| g > 0.0).map(|&g| db(g)).collect();
            let std_sinr_db = if db_values.len() > 1 { std_dev(&db_values) } else { f64::NAN };
            let (eps_db, delta) = match axis {
                SweepAxis::Epsilon => (value, cfg.spec.delta.first().copied().unwrap_or(f64::NAN)),
                SweepAxis::Delta => {
                    (cfg.epsilon_over_n0_db.first().copied().unwrap_or(f64::NAN), value)
                }
            };
            records.push(SweepRecord {
                scenario: scenario.as_str().to_string(),
                epsilon_over_n0_db: eps_db,
                delta,
                mean_sinr_db: db(mean_lin),
                std_sinr_db,
                upper_bound_db: db(ub_mean),
                mean_outage: mean(&outages),
                n_realizations: n_ok,
                failures,
            });
            stats.push(CellStats {
                scenario,
                axis_index: j,
                axis_value: value,
                mean_lin,
                se_lin,
                ub_mean_lin: ub_mean,
                mean_outage: mean(&outages),
                n_ok,
            });
        }
    }
    Ok((records, stats))
}

pub fn run_sweep(
    cfg: &ResolvedConfig,
    axis: SweepAxis,
    from: f64,
    to: f64,
    steps: usize,
    realizations: usize,
    full: bool,
) -> anyhow::Result<Vec<SweepRecord>> {
    run_sweep_detailed(cfg, axis, from, to, steps, realizations, full).map(|(r, _)| r)
}

fn realization_row(
    cfg: &ResolvedConfig,
    scenario: Scenario,
    s_idx: usize,
    r: u64,
    axis: SweepAxis,
    values: &[f64],
    root: &SeededStream,
) -> Vec<Result<CellSample, String>> {
    let cell = root.substream(s_idx as u64).substream(r);
    let run = || -> anyhow::Result<Vec<Result<CellSample, String>>> {
        let setup = cfg
            .template
            .sample(&mut cell.substream(tags::PLACEMENT).rng())
            .context("placement")?;
        let rz = cogbeam_core::channel::realize_network(&setup, &cell.substream(tags::CHANNEL))?;
        Ok(values
            .iter()
            .map(|&v| {
                let spec = match axis {
                    SweepAxis::Epsilon => cfg.scenario_spec(scenario, Some(v), None),
                    SweepAxis::Delta => cfg.scenario_spec(scenario, None, Some(v)),
                };
                solve_cell(cfg, &rz, &spec, &cell).map_err(|e| e.to_string())
            })
            .collect())
    };
    match run() {
        Ok(row) => row,
        // Realization-level failure poisons every cell of the row.
        Err(e) => values.iter().map(|_| Err(e.to_string())).collect(),
    }
}

fn solve_cell(
    cfg: &ResolvedConfig,
    rz: &NetworkRealization,
    spec: &InterferenceSpec,
    cell: &SeededStream,
) -> anyhow::Result<CellSample> {
    let problem = build_qcqp(rz, spec)?;
    let outcome = solve_beamformer(
        &problem,
        &cfg.sdp,
        cfg.rounding_draws,
        &mut cell.substream(tags::ROUNDING).rng(),
    )?;
    Ok(CellSample {
        sinr: outcome.result.objective,
        upper_bound: outcome.upper_bound,
        outage: analytic_outage(rz, spec, &outcome.result.t),
    })
}

fn mean(v: &[f64]) -> f64 {
    if v.is_empty() {
        f64::NAN
    } else {
        v.iter().sum::<f64>() / v.len() as f64
    }
}

fn std_dev(v: &[f64]) -> f64 {
    let m = mean(v);
    (v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (v.len() as f64 - 1.0)).sqrt()
}

/// Fixed-order CSV encoding: header plus one row per record, comma
/// delimiter, `.` decimal point, shortest round-trip float formatting.
pub fn records_to_csv(records: &[SweepRecord]) -> String {
    let mut out = String::from(
        "scenario,epsilon_over_n0_db,delta,mean_sinr_db,std_sinr_db,upper_bound_db,mean_outage,n_realizations,failures\n",
    );
    for r in records {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            r.scenario,
            r.epsilon_over_n0_db,
            r.delta,
            r.mean_sinr_db,
            r.std_sinr_db,
            r.upper_bound_db,
            r.mean_outage,
            r.n_realizations,
            r.failures
        ));
    }
    out
}
