//! Machine-readable result documents.

use cogbeam_core::{BeamformerResult, KktReport, SdpSolution, SolveOutcome};
use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct KktSummary {
    pub primal_feas: f64,
    pub dual_slack_min_eig: f64,
    pub comp_x: f64,
    pub comp_y_max: f64,
    pub passes: bool,
}

impl KktSummary {
    pub fn from_report(r: &KktReport) -> Self {
        Self {
            primal_feas: r.primal_feas,
            dual_slack_min_eig: r.dual_slack_min_eig,
            comp_x: r.comp_x,
            comp_y_max: r.comp_y.iter().cloned().fold(0.0, f64::max),
            passes: r.passes(1e-6),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SdpSummary {
    pub status: cogbeam_core::SdpStatus,
    pub iterations: usize,
    pub primal_value: f64,
    pub dual_value: f64,
    pub gap: f64,
    pub projection_distance: f64,
}

/// The JSON document written by `cogbeam solve`.
#[derive(Debug, Clone, Serialize)]
pub struct ResultDocument {
    pub scenario: String,
    pub seed: u64,
    pub provenance: cogbeam_core::Provenance,
    /// Beamformer entries as `[re, im]` pairs.
    pub t: Vec<[f64; 2]>,
    pub objective: f64,
    pub upper_bound: f64,
    /// `objective / upper_bound`; 1 for exact routes up to tolerance.
    pub ratio: f64,
    pub slacks: Vec<f64>,
    pub power_slack: f64,
    pub infeasible: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub draws: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kkt: Option<KktSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sdp: Option<SdpSummary>,
}

impl ResultDocument {
    pub fn new(scenario: &str, seed: u64, outcome: &SolveOutcome) -> Self {
        let BeamformerResult {
            t,
            objective,
            slacks,
            power_slack,
            provenance,
            rounding_meta,
            infeasible,
            warning,
        } = &outcome.result;
        let ratio = if outcome.upper_bound.abs() > 0.0 { objective / outcome.upper_bound } else { 1.0 };
        Self {
            scenario: scenario.to_string(),
            seed,
            provenance: *provenance,
            t: t.iter().map(|z| [z.re, z.im]).collect(),
            objective: *objective,
            upper_bound: outcome.upper_bound,
            ratio,
            slacks: slacks.clone(),
            power_slack: *power_slack,
            infeasible: *infeasible,
            warning: warning.clone(),
            draws: rounding_meta.as_ref().map(|m| m.draws),
            kkt: outcome.kkt.as_ref().map(KktSummary::from_report),
            sdp: outcome.sdp.as_ref().map(|s: &SdpSolution| SdpSummary {
                status: s.status,
                iterations: s.iterations,
                primal_value: s.primal_value,
                dual_value: s.dual_value,
                gap: s.gap,
                projection_distance: s.projection_distance,
            }),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("document serializes")
    }

    pub fn provenance_label(&self) -> &'static str {
        match self.provenance {
            cogbeam_core::Provenance::ExactK1 => "exact (K=1)",
            cogbeam_core::Provenance::ExactK2 => "exact (K=2)",
            cogbeam_core::Provenance::Rounded => "rounded",
            cogbeam_core::Provenance::ClosedFormS3 => "closed form",
        }
    }
}
