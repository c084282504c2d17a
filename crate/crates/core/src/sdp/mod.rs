//! SDP relaxation solver over Hermitian matrices.
//!
//! Instances are trace-inequality problems `max tr(C X), tr(G_i X) <= b_i,
//! X >= 0`. They are realified through [`embed`], solved by the
//! predictor-corrector core in [`ipm`], and mapped back; reported values use
//! the complex trace convention throughout. Certification is explicit:
//! [`kkt_verify`] reports the four KKT residual families and
//! [`slater_certificate`] constructs strictly feasible primal/dual points.

pub mod embed;
mod ipm;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{hermitize, inner, is_hermitian, min_eigenvalue, psd_project, CMat};

pub use embed::{embed_complex_to_real, extract_complex_solution};

/// Solver tolerances and iteration cap.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SdpTolerances {
    pub gap_tol: f64,
    pub feas_tol: f64,
    pub max_iter: usize,
}

impl Default for SdpTolerances {
    fn default() -> Self {
        Self { gap_tol: 1e-7, feas_tol: 1e-8, max_iter: 200 }
    }
}

/// Hermitian trace-inequality instance: maximize `tr(C X)` subject to
/// `tr(G_i X) <= b_i` and `X >= 0`.
#[derive(Debug, Clone)]
pub struct SdpInstance {
    pub c: CMat,
    pub constraints: Vec<(CMat, f64)>,
}

impl SdpInstance {
    pub fn dim(&self) -> usize {
        self.c.nrows()
    }

    /// Checks Hermitianity, dimensions, bounds, and the boundedness
    /// precondition (at least one positive definite constraint matrix).
    pub fn validate(&self) -> Result<()> {
        let m = self.c.nrows();
        if !is_hermitian(&self.c, 1e-12) {
            return Err(Error::InvalidInstance("objective matrix must be Hermitian".into()));
        }
        if self.constraints.is_empty() {
            return Err(Error::InvalidInstance("at least one constraint is required".into()));
        }
        let mut has_pd = false;
        for (i, (g, b)) in self.constraints.iter().enumerate() {
            if g.nrows() != m || !is_hermitian(g, 1e-12) {
                return Err(Error::InvalidInstance(format!(
                    "constraint {i} must be Hermitian with matching dimension"
                )));
            }
            if !b.is_finite() || !(*b > 0.0) {
                return Err(Error::InvalidInstance(format!("constraint {i}: bound must be finite and > 0")));
            }
            if min_eigenvalue(g) > 0.0 {
                has_pd = true;
            }
        }
        if !has_pd {
            return Err(Error::InvalidInstance(
                "no positive definite constraint matrix; primal may be unbounded".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SdpStatus {
    Optimal,
    Infeasible,
    NumericalTrouble,
}

/// Primal/dual solution pair in the complex trace convention.
#[derive(Debug, Clone)]
pub struct SdpSolution {
    /// PSD-projected primal solution.
    pub x: CMat,
    /// Nonnegative multipliers, one per constraint.
    pub y: Vec<f64>,
    pub primal_value: f64,
    pub dual_value: f64,
    /// `dual_value - primal_value`.
    pub gap: f64,
    pub iterations: usize,
    pub status: SdpStatus,
    /// Frobenius distance moved by the PSD projection of `x`.
    pub projection_distance: f64,
}

/// Residuals of the complementary-slackness optimality system.
///
/// All four families are reported unclamped; `passes` compares them against
/// `tol * (1 + scale)` with a single instance scale.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KktReport {
    /// Worst primal violation: constraint excess or negative eigenvalue of X.
    pub primal_feas: f64,
    /// Smallest eigenvalue of the dual slack `sum_i y_i G_i - C`.
    pub dual_slack_min_eig: f64,
    /// `|tr(X S)|`.
    pub comp_x: f64,
    /// `|y_i (tr(G_i X) - b_i)|` per constraint.
    pub comp_y: Vec<f64>,
    /// Scale used by `passes`.
    pub scale: f64,
}

impl KktReport {
    pub fn passes(&self, tol: f64) -> bool {
        let lim = tol * (1.0 + self.scale);
        self.primal_feas <= lim
            && self.dual_slack_min_eig >= -lim
            && self.comp_x <= lim
            && self.comp_y.iter().all(|&v| v <= lim)
    }

    /// Largest residual normalized by `1 + scale` (eigenvalue deficit counts
    /// only when negative).
    pub fn worst(&self) -> f64 {
        let mut w = self.primal_feas.max(self.comp_x).max((-self.dual_slack_min_eig).max(0.0));
        for &v in &self.comp_y {
            w = w.max(v);
        }
        w / (1.0 + self.scale)
    }
}

/// Solves the instance through the real embedding.
///
/// Non-convergence is not an `Err`: the best iterate comes back with status
/// [`SdpStatus::NumericalTrouble`] so callers can inspect its KKT report and
/// decide how to proceed.
pub fn solve_sdp(instance: &SdpInstance, tol: &SdpTolerances) -> Result<SdpSolution> {
    instance.validate()?;
    let real = ipm::RealSdp {
        c: embed_complex_to_real(&instance.c)?,
        constraints: instance
            .constraints
            .iter()
            .map(|(g, b)| Ok((embed_complex_to_real(g)?, 2.0 * b)))
            .collect::<Result<Vec<_>>>()?,
    };
    let out = ipm::solve(&real, tol);
    if !out.converged {
        log::debug!(
            "interior point stopped at iter {} (primal infeas {:.2e}, dual infeas {:.2e})",
            out.iterations,
            out.primal_infeas,
            out.dual_infeas
        );
    }
    let x_c = extract_complex_solution(&out.x);
    let (x, projection_distance) = psd_project(&x_c);
    let primal_value = 0.5 * out.primal_value;
    let dual_value = 0.5 * out.dual_value;
    Ok(SdpSolution {
        x,
        y: out.y,
        primal_value,
        dual_value,
        gap: dual_value - primal_value,
        iterations: out.iterations,
        status: if out.converged { SdpStatus::Optimal } else { SdpStatus::NumericalTrouble },
        projection_distance,
    })
}

/// Evaluates the four KKT residual families for a solution.
pub fn kkt_verify(instance: &SdpInstance, solution: &SdpSolution) -> KktReport {
    let max_b = instance.constraints.iter().map(|(_, b)| *b).fold(0.0f64, f64::max);
    let scale = solution.primal_value.abs().max(max_b).max(instance.c.norm());

    let mut primal_feas = (-min_eigenvalue(&solution.x)).max(0.0);
    let mut comp_y = Vec::with_capacity(instance.constraints.len());
    let mut dual_slack = -instance.c.clone();
    for ((g, b), &yi) in instance.constraints.iter().zip(&solution.y) {
        let t = inner(g, &solution.x);
        primal_feas = primal_feas.max(t - b);
        comp_y.push((yi * (t - b)).abs());
        dual_slack += g.scale(yi);
    }
    let dual_slack = hermitize(&dual_slack);
    KktReport {
        primal_feas,
        dual_slack_min_eig: min_eigenvalue(&dual_slack),
        comp_x: inner(&solution.x, &dual_slack).abs(),
        comp_y,
        scale,
    }
}

/// Constructs strictly feasible primal and dual points, certifying that
/// strong duality holds for the instance. The primal point keeps a 10%
/// margin on every bound; the dual point keeps its slack uniformly positive
/// definite. Both are verified numerically before being returned.
pub fn slater_certificate(instance: &SdpInstance) -> Result<(CMat, Vec<f64>)> {
    instance.validate()?;
    let m = instance.dim();

    let mut c_scale = f64::INFINITY;
    for (g, b) in &instance.constraints {
        let tr = g.trace().re;
        if tr > 1e-300 {
            c_scale = c_scale.min(b / tr);
        }
    }
    if !c_scale.is_finite() {
        return Err(Error::InvalidInstance("all constraint matrices have zero trace".into()));
    }
    let x = crate::linalg::ident(m).scale(0.9 * c_scale);
    for (i, (g, b)) in instance.constraints.iter().enumerate() {
        if inner(g, &x) > 0.9 * b + 1e-12 * b {
            return Err(Error::Numerical(format!("primal Slater margin failed on constraint {i}")));
        }
    }

    // Put all dual weight on the best-conditioned PD constraint and shift
    // past the top of the objective spectrum.
    let (idx, lam_min) = instance
        .constraints
        .iter()
        .enumerate()
        .map(|(i, (g, _))| (i, min_eigenvalue(g)))
        .max_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
        .expect("non-empty constraints");
    if lam_min <= 0.0 {
        return Err(Error::InvalidInstance("no positive definite constraint matrix".into()));
    }
    let lam_max_c = -min_eigenvalue(&(-instance.c.clone()));
    let mut y = vec![0.0; instance.constraints.len()];
    y[idx] = (lam_max_c.max(0.0) + 1.0) / lam_min;

    let mut slack = -instance.c.clone();
    for ((g, _), &yi) in instance.constraints.iter().zip(&y) {
        slack += g.scale(yi);
    }
    let margin = min_eigenvalue(&hermitize(&slack));
    if margin < 0.5 {
        return Err(Error::Numerical(format!("dual Slater margin {margin} too small")));
    }
    Ok((x, y))
}
