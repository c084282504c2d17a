//! Single-instance solve: one realization, one beamformer, one document.

use anyhow::Context;
use cogbeam_core::channel::realize_network;
use cogbeam_core::config::ResolvedConfig;
use cogbeam_core::extract::solve_beamformer;
use cogbeam_core::problem::build_qcqp;
use cogbeam_core::{SdpStatus, SeededStream};

use crate::report::ResultDocument;
use crate::tags;

pub struct SolveRun {
    pub document: ResultDocument,
    pub exit_code: i32,
}

/// Samples one realization under the configured stream and solves it.
pub fn run_solve(cfg: &ResolvedConfig) -> anyhow::Result<SolveRun> {
    let root = SeededStream::new(cfg.seed, 0);
    let setup = cfg
        .template
        .sample(&mut root.substream(tags::PLACEMENT).rng())
        .context("sampling network placement")?;
    let rz = realize_network(&setup, &root.substream(tags::CHANNEL)).context("sampling channels")?;
    let problem = build_qcqp(&rz, &cfg.spec).context("building the QCQP")?;
    let outcome = solve_beamformer(
        &problem,
        &cfg.sdp,
        cfg.rounding_draws,
        &mut root.substream(tags::ROUNDING).rng(),
    )
    .context("solving")?;

    let exit_code = if outcome.result.infeasible {
        3
    } else if outcome.sdp.as_ref().is_some_and(|s| s.status == SdpStatus::NumericalTrouble) {
        2
    } else {
        0
    };
    Ok(SolveRun {
        document: ResultDocument::new(cfg.spec.scenario.as_str(), cfg.seed, &outcome),
        exit_code,
    })
}
