//! JSON configuration documents and named presets.
//!
//! A config document describes the network (antennas, distances, powers,
//! receiver kinds), the interference specification, and solver knobs. A
//! `preset` name fills in a complete desk-scale geometry; explicitly given
//! fields override the preset. Interference thresholds are stated as
//! `epsilon / N0` in dB and resolved to linear powers here.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::channel::{LinkGeometry, NetworkSetup, PrimaryConfig, ReceiverKind};
use crate::error::{Error, Result};
use crate::problem::{InterferenceSpec, Scenario};
use crate::sdp::SdpTolerances;

/// Scalar values broadcast across links; arrays are taken per link.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ScalarOrVec {
    Scalar(f64),
    Vec(Vec<f64>),
}

impl ScalarOrVec {
    pub fn resolve(&self, k: usize, what: &str) -> Result<Vec<f64>> {
        match self {
            ScalarOrVec::Scalar(v) => Ok(vec![*v; k]),
            ScalarOrVec::Vec(v) if v.len() == k => Ok(v.clone()),
            ScalarOrVec::Vec(v) => Err(Error::InvalidConfig(format!(
                "{what}: expected {k} entries, got {}",
                v.len()
            ))),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AntennasCfg {
    pub m_s: Option<usize>,
    pub n_s: Option<usize>,
    pub m_k: Option<Vec<usize>>,
    pub n_k: Option<Vec<usize>>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistancesCfg {
    pub d_ss: Option<f64>,
    pub d_ks: Option<Vec<f64>>,
    pub d_sk: Option<Vec<f64>>,
    /// Distance from primary transmitter j to primary receiver k; the
    /// diagonal is each primary link's own length.
    pub d_kj: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PowersCfg {
    pub p_k: Option<ScalarOrVec>,
    pub p_s_max: Option<f64>,
    /// Average per-antenna SNR (dB) at the secondary receiver in the absence
    /// of interference; sets `p_s_max = 10^(snr/10) * n0 / alpha_ss`.
    pub target_snr_db: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InterferenceCfg {
    pub scenario: Scenario,
    pub epsilon_over_n0_db: Option<ScalarOrVec>,
    pub delta: Option<ScalarOrVec>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SdpCfg {
    pub gap_tol: Option<f64>,
    pub feas_tol: Option<f64>,
    pub max_iter: Option<usize>,
}

/// How the secondary link is placed relative to the primary system.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PlacementCfg {
    /// Distances are taken from the `distances` section as-is.
    Fixed,
    /// Primary receivers sit at fixed positions; each realization drops the
    /// secondary transmitter uniformly in the area with a uniformly random
    /// link orientation.
    RandomSecondary {
        area: [f64; 2],
        primary_rx: Vec<[f64; 2]>,
        /// Offset from each primary receiver to its transmitter.
        primary_tx_offset: [f64; 2],
        secondary_link_length: f64,
    },
}

/// Raw configuration document (all fields optional; presets fill the rest).
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigDocument {
    pub preset: Option<String>,
    pub antennas: Option<AntennasCfg>,
    pub distances: Option<DistancesCfg>,
    pub path_loss_exponent: Option<f64>,
    pub powers: Option<PowersCfg>,
    pub n0: Option<f64>,
    pub receiver_kinds: Option<Vec<ReceiverKind>>,
    pub seed: Option<u64>,
    pub interference: Option<InterferenceCfg>,
    pub sdp: Option<SdpCfg>,
    pub rounding_draws: Option<usize>,
    pub placement: Option<PlacementCfg>,
}

/// Expands a named preset into a full document.
///
/// `k2_paper` and `k4_paper` pin the published cross distances; distances
/// between distinct primary links are not published, so they default to 15 m
/// with own links at 10 m (overridable through `distances.d_kj`).
/// `grid9_paper` arranges nine 10 m primary links on a 70-by-40 m grid with
/// transmitters due east of their receivers and re-places the secondary link
/// uniformly at random per realization.
pub fn preset(name: &str) -> Result<ConfigDocument> {
    let base = |k: usize, d_ks: Vec<f64>, d_sk: Vec<f64>| ConfigDocument {
        distances: Some(DistancesCfg {
            d_ss: Some(10.0),
            d_ks: Some(d_ks),
            d_sk: Some(d_sk),
            d_kj: Some(default_d_kj(k)),
        }),
        ..ConfigDocument::default()
    };
    match name {
        "k2_paper" => Ok(base(2, vec![15.0, 13.0], vec![12.4, 12.7])),
        "k4_paper" => Ok(base(4, vec![20.0, 18.0, 15.0, 13.0], vec![16.0, 14.0, 12.4, 13.2])),
        "grid9_paper" => {
            let mut rx = Vec::new();
            for &x in &[0.0, 35.0, 70.0] {
                for &y in &[0.0, 20.0, 40.0] {
                    rx.push([x, y]);
                }
            }
            Ok(ConfigDocument {
                placement: Some(PlacementCfg::RandomSecondary {
                    area: [70.0, 40.0],
                    primary_rx: rx,
                    primary_tx_offset: [10.0, 0.0],
                    secondary_link_length: 10.0,
                }),
                ..ConfigDocument::default()
            })
        }
        other => Err(Error::InvalidConfig(format!("unknown preset '{other}'"))),
    }
}

fn default_d_kj(k: usize) -> Vec<Vec<f64>> {
    (0..k)
        .map(|i| (0..k).map(|j| if i == j { 10.0 } else { 15.0 }).collect())
        .collect()
}

/// Network description with the placement mode resolved.
#[derive(Debug, Clone)]
pub enum SetupTemplate {
    Fixed(NetworkSetup),
    RandomSecondary {
        area: [f64; 2],
        primary_rx: Vec<[f64; 2]>,
        primary_tx: Vec<[f64; 2]>,
        secondary_link_length: f64,
        base: BaseParams,
    },
}

/// Link-independent parameters shared by both placement modes.
#[derive(Debug, Clone)]
pub struct BaseParams {
    pub m_s: usize,
    pub n_s: usize,
    pub p_s_max: f64,
    pub n0: f64,
    pub path_loss_exponent: f64,
    pub primaries: Vec<PrimaryConfig>,
}

impl SetupTemplate {
    pub fn k(&self) -> usize {
        match self {
            SetupTemplate::Fixed(s) => s.primaries.len(),
            SetupTemplate::RandomSecondary { base, .. } => base.primaries.len(),
        }
    }

    pub fn n0(&self) -> f64 {
        match self {
            SetupTemplate::Fixed(s) => s.n0,
            SetupTemplate::RandomSecondary { base, .. } => base.n0,
        }
    }

    pub fn fixed(&self) -> Option<&NetworkSetup> {
        match self {
            SetupTemplate::Fixed(s) => Some(s),
            _ => None,
        }
    }

    /// Concrete setup for one realization; random placements consume draws
    /// from `rng`.
    pub fn sample<R: Rng>(&self, rng: &mut R) -> Result<NetworkSetup> {
        match self {
            SetupTemplate::Fixed(s) => Ok(s.clone()),
            SetupTemplate::RandomSecondary { area, primary_rx, primary_tx, secondary_link_length, base } => {
                let l = *secondary_link_length;
                loop {
                    let su_tx = (rng.random::<f64>() * area[0], rng.random::<f64>() * area[1]);
                    let theta = rng.random::<f64>() * std::f64::consts::TAU;
                    let su_rx = (su_tx.0 + l * theta.cos(), su_tx.1 + l * theta.sin());
                    let d_ks: Vec<f64> =
                        primary_rx.iter().map(|p| dist(su_tx, (p[0], p[1]))).collect();
                    let d_sk: Vec<f64> =
                        primary_tx.iter().map(|p| dist(su_rx, (p[0], p[1]))).collect();
                    let d_kj: Vec<Vec<f64>> = primary_rx
                        .iter()
                        .map(|r| primary_tx.iter().map(|t| dist((r[0], r[1]), (t[0], t[1]))).collect())
                        .collect();
                    // Degenerate drops (on top of a primary node) are resampled.
                    if d_ks.iter().chain(d_sk.iter()).any(|&d| d < 0.1) {
                        continue;
                    }
                    return Ok(NetworkSetup {
                        m_s: base.m_s,
                        n_s: base.n_s,
                        p_s_max: base.p_s_max,
                        n0: base.n0,
                        primaries: base.primaries.clone(),
                        geometry: LinkGeometry {
                            d_ss: l,
                            d_ks,
                            d_sk,
                            d_kj,
                            path_loss_exponent: base.path_loss_exponent,
                        },
                    });
                }
            }
        }
    }
}

fn dist(a: (f64, f64), b: (f64, f64)) -> f64 {
    ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt()
}

/// Fully resolved configuration ready for solving and sweeping.
#[derive(Debug, Clone)]
pub struct ResolvedConfig {
    pub template: SetupTemplate,
    pub spec: InterferenceSpec,
    pub epsilon_over_n0_db: Vec<f64>,
    pub seed: u64,
    pub sdp: SdpTolerances,
    pub rounding_draws: usize,
}

impl ResolvedConfig {
    pub fn k(&self) -> usize {
        self.template.k()
    }

    /// Interference spec with optional uniform overrides, used by sweeps.
    pub fn spec_with(&self, epsilon_over_n0_db: Option<f64>, delta: Option<f64>) -> InterferenceSpec {
        let k = self.k();
        let n0 = self.template.n0();
        let epsilon = match epsilon_over_n0_db {
            Some(db) => vec![n0 * 10f64.powf(db / 10.0); k],
            None => self.spec.epsilon.clone(),
        };
        let delta = match delta {
            Some(d) => vec![d; k],
            None => self.spec.delta.clone(),
        };
        InterferenceSpec { scenario: self.spec.scenario, epsilon, delta }
    }

    /// Same spec under a different scenario (sweeps plot all three).
    pub fn scenario_spec(
        &self,
        scenario: Scenario,
        epsilon_over_n0_db: Option<f64>,
        delta: Option<f64>,
    ) -> InterferenceSpec {
        let mut spec = self.spec_with(epsilon_over_n0_db, delta);
        spec.scenario = scenario;
        spec
    }
}

fn merge<T: Clone>(base: Option<T>, over: Option<T>) -> Option<T> {
    over.or(base)
}

impl ConfigDocument {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))
    }

    /// Overlays this document on top of its preset (if any) and resolves all
    /// defaults into a concrete configuration.
    pub fn resolve(&self) -> Result<ResolvedConfig> {
        let base = match &self.preset {
            Some(name) => preset(name)?,
            None => ConfigDocument::default(),
        };
        let doc = ConfigDocument {
            preset: None,
            antennas: merge(base.antennas, self.antennas.clone()),
            distances: merge_distances(base.distances, self.distances.clone()),
            path_loss_exponent: merge(base.path_loss_exponent, self.path_loss_exponent),
            powers: merge(base.powers, self.powers.clone()),
            n0: merge(base.n0, self.n0),
            receiver_kinds: merge(base.receiver_kinds, self.receiver_kinds.clone()),
            seed: merge(base.seed, self.seed),
            interference: merge(base.interference, self.interference.clone()),
            sdp: merge(base.sdp, self.sdp.clone()),
            rounding_draws: merge(base.rounding_draws, self.rounding_draws),
            placement: merge(base.placement, self.placement.clone()),
        };
        doc.resolve_concrete()
    }

    fn infer_k(&self) -> Result<usize> {
        let mut candidates: Vec<(usize, &str)> = Vec::new();
        if let Some(a) = &self.antennas {
            if let Some(v) = &a.m_k {
                candidates.push((v.len(), "antennas.m_k"));
            }
            if let Some(v) = &a.n_k {
                candidates.push((v.len(), "antennas.n_k"));
            }
        }
        if let Some(d) = &self.distances {
            if let Some(v) = &d.d_ks {
                candidates.push((v.len(), "distances.d_ks"));
            }
            if let Some(v) = &d.d_sk {
                candidates.push((v.len(), "distances.d_sk"));
            }
        }
        if let Some(r) = &self.receiver_kinds {
            candidates.push((r.len(), "receiver_kinds"));
        }
        if let Some(PlacementCfg::RandomSecondary { primary_rx, .. }) = &self.placement {
            candidates.push((primary_rx.len(), "placement.primary_rx"));
        }
        let Some(&(k, first)) = candidates.first() else {
            return Err(Error::InvalidConfig(
                "cannot infer the number of primary links; set antennas, distances, or receiver_kinds".into(),
            ));
        };
        for &(other, field) in &candidates[1..] {
            if other != k {
                return Err(Error::InvalidConfig(format!(
                    "inconsistent number of primary links: {first} says {k}, {field} says {other}"
                )));
            }
        }
        Ok(k)
    }

    fn resolve_concrete(&self) -> Result<ResolvedConfig> {
        let k = self.infer_k()?;
        let exponent = self.path_loss_exponent.unwrap_or(4.0);
        let n0 = self.n0.unwrap_or(1.0);
        if !(n0 > 0.0) {
            return Err(Error::InvalidConfig("n0 must be > 0".into()));
        }

        let ant = self.antennas.clone().unwrap_or_default();
        let m_s = ant.m_s.unwrap_or(4);
        let n_s = ant.n_s.unwrap_or(4);
        let m_k = ant.m_k.unwrap_or_else(|| vec![4; k]);
        let n_k = ant.n_k.unwrap_or_else(|| vec![4; k]);

        let receivers = self
            .receiver_kinds
            .clone()
            .unwrap_or_else(|| vec![ReceiverKind::Mmse; k]);

        // Secondary link length fixes alpha_ss, which the SNR convention needs.
        let d_ss = match (&self.placement, &self.distances) {
            (Some(PlacementCfg::RandomSecondary { secondary_link_length, .. }), _) => *secondary_link_length,
            (_, Some(d)) => d.d_ss.unwrap_or(10.0),
            _ => 10.0,
        };
        let alpha_ss = d_ss.powf(-exponent);

        let powers = self.powers.clone().unwrap_or_default();
        let p_s_max = match (powers.p_s_max, powers.target_snr_db) {
            (Some(_), Some(_)) => {
                return Err(Error::InvalidConfig("set either powers.p_s_max or powers.target_snr_db, not both".into()))
            }
            (Some(p), None) => p,
            (None, snr) => 10f64.powf(snr.unwrap_or(10.0) / 10.0) * n0 / alpha_ss,
        };
        if !(p_s_max > 0.0) {
            return Err(Error::InvalidConfig("p_s_max must be > 0".into()));
        }
        let p_k = match &powers.p_k {
            Some(v) => v.resolve(k, "powers.p_k")?,
            None => vec![p_s_max; k],
        };

        let primaries: Vec<PrimaryConfig> = (0..k)
            .map(|i| PrimaryConfig { m_k: m_k[i], n_k: n_k[i], p_k: p_k[i], receiver: receivers[i] })
            .collect();

        let template = match &self.placement {
            Some(PlacementCfg::RandomSecondary { area, primary_rx, primary_tx_offset, secondary_link_length }) => {
                let primary_tx: Vec<[f64; 2]> = primary_rx
                    .iter()
                    .map(|p| [p[0] + primary_tx_offset[0], p[1] + primary_tx_offset[1]])
                    .collect();
                SetupTemplate::RandomSecondary {
                    area: *area,
                    primary_rx: primary_rx.clone(),
                    primary_tx,
                    secondary_link_length: *secondary_link_length,
                    base: BaseParams { m_s, n_s, p_s_max, n0, path_loss_exponent: exponent, primaries },
                }
            }
            _ => {
                let d = self.distances.clone().unwrap_or_default();
                let geometry = LinkGeometry {
                    d_ss,
                    d_ks: d.d_ks.ok_or_else(|| Error::InvalidConfig("distances.d_ks is required".into()))?,
                    d_sk: d.d_sk.ok_or_else(|| Error::InvalidConfig("distances.d_sk is required".into()))?,
                    d_kj: d.d_kj.unwrap_or_else(|| default_d_kj(k)),
                    path_loss_exponent: exponent,
                };
                let setup = NetworkSetup { m_s, n_s, p_s_max, n0, primaries, geometry };
                setup.validate()?;
                SetupTemplate::Fixed(setup)
            }
        };

        let inter = self.interference.clone().unwrap_or(InterferenceCfg {
            scenario: Scenario::S1,
            epsilon_over_n0_db: None,
            delta: None,
        });
        let eps_db = match &inter.epsilon_over_n0_db {
            Some(v) => v.resolve(k, "interference.epsilon_over_n0_db")?,
            None => vec![5.0; k],
        };
        let epsilon: Vec<f64> = eps_db.iter().map(|db| n0 * 10f64.powf(db / 10.0)).collect();
        let delta = match &inter.delta {
            Some(v) => v.resolve(k, "interference.delta")?,
            None => vec![0.01; k],
        };
        let spec = InterferenceSpec { scenario: inter.scenario, epsilon, delta };
        spec.validate(k)?;

        let sdp_cfg = self.sdp.clone().unwrap_or_default();
        let defaults = SdpTolerances::default();
        let sdp = SdpTolerances {
            gap_tol: sdp_cfg.gap_tol.unwrap_or(defaults.gap_tol),
            feas_tol: sdp_cfg.feas_tol.unwrap_or(defaults.feas_tol),
            max_iter: sdp_cfg.max_iter.unwrap_or(defaults.max_iter),
        };

        Ok(ResolvedConfig {
            template,
            spec,
            epsilon_over_n0_db: eps_db,
            seed: self.seed.unwrap_or(1),
            sdp,
            rounding_draws: self.rounding_draws.unwrap_or(100),
        })
    }

    /// Convenience for tests: resolve to a fixed network setup.
    pub fn setup_for_tests(&self) -> NetworkSetup {
        self.resolve()
            .expect("preset resolves")
            .template
            .fixed()
            .expect("fixed placement")
            .clone()
    }
}

fn merge_distances(base: Option<DistancesCfg>, over: Option<DistancesCfg>) -> Option<DistancesCfg> {
    match (base, over) {
        (None, o) => o,
        (b, None) => b,
        (Some(b), Some(o)) => Some(DistancesCfg {
            d_ss: merge(b.d_ss, o.d_ss),
            d_ks: merge(b.d_ks, o.d_ks),
            d_sk: merge(b.d_sk, o.d_sk),
            d_kj: merge(b.d_kj, o.d_kj),
        }),
    }
}
