//! Homogeneous QCQP construction.
//!
//! Turns a sampled [`NetworkRealization`] plus an [`InterferenceSpec`] into
//!
//! ```text
//! max  t^H A t   s.t.  t^H Q_k t <= 1 (k = 1..K),  ||t||^2 <= P_max
//! ```
//!
//! The objective matrix folds the optimal secondary receive filter (an MMSE
//! beamformer) into a single quadratic form. The constraint matrices depend
//! on what the secondary transmitter knows about each primary receiver:
//!
//! * full knowledge of the effective channel: a rank-one deterministic cap,
//! * channel known but receive beamformer unknown: the chance constraint
//!   collapses to a norm bound via the F-distribution tail of the receive
//!   beamformer's projection,
//! * nothing known: the interference power is exponentially distributed with
//!   mean `||t||^2`, so all constraints collapse to one power ball and the
//!   optimum is a single eigenpair computation.
//!
//! All constraints are prescaled to the `t^H Q t <= 1` form; the power budget
//! stays separate until rounding.

use serde::{Deserialize, Serialize};

use crate::channel::NetworkRealization;
use crate::error::{Error, Result};
use crate::linalg::{hermitize, ident, phase_normalize, top_eigenpair, CMat, CVec};

/// Which level of channel knowledge the interference constraints assume.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Scenario {
    /// Effective channels to primary receivers fully known: deterministic caps.
    S1,
    /// Channels known, receive beamformers unknown: outage-constrained norm caps.
    S2,
    /// Nothing known: outage-constrained power ball, closed-form solution.
    S3,
}

impl Scenario {
    pub fn as_str(&self) -> &'static str {
        match self {
            Scenario::S1 => "S1",
            Scenario::S2 => "S2",
            Scenario::S3 => "S3",
        }
    }
}

/// Interference thresholds and outage budgets, one per primary link.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterferenceSpec {
    pub scenario: Scenario,
    /// Tolerable interference power at each primary receiver (linear).
    pub epsilon: Vec<f64>,
    /// Allowed outage probability per link; ignored under [`Scenario::S1`].
    pub delta: Vec<f64>,
}

impl InterferenceSpec {
    pub fn validate(&self, k: usize) -> Result<()> {
        if self.epsilon.len() != k || self.delta.len() != k {
            return Err(Error::InvalidConfig(format!(
                "interference spec must carry one (epsilon, delta) pair per link (K = {k})"
            )));
        }
        if self.epsilon.iter().any(|&e| !(e > 0.0)) {
            return Err(Error::InvalidConfig("epsilon thresholds must be > 0".into()));
        }
        if self.delta.iter().any(|&d| !(0.0..1.0).contains(&d)) {
            return Err(Error::InvalidConfig("delta must lie in [0, 1)".into()));
        }
        Ok(())
    }
}

/// Closed-form solution of the single-ball problem `max t^H A t, ||t||^2 <= lambda`.
#[derive(Debug, Clone)]
pub struct Scenario3Solution {
    pub lambda: f64,
    pub top_eigenvalue: f64,
    pub t_star: CVec,
    /// Set when a zero outage budget forces the zero beamformer.
    pub infeasible: bool,
}

/// The assembled homogeneous QCQP.
#[derive(Debug, Clone)]
pub struct QcqpProblem {
    /// Hermitian PSD objective matrix.
    pub a: CMat,
    /// Hermitian PSD constraint matrices, one per primary link, in
    /// `t^H Q t <= 1` form.
    pub q: Vec<CMat>,
    /// Transmit power budget.
    pub p_max: f64,
    /// Present when the scenario admits the eigenpair shortcut.
    pub closed_form: Option<Scenario3Solution>,
}

impl QcqpProblem {
    pub fn dim(&self) -> usize {
        self.a.nrows()
    }

    pub fn k(&self) -> usize {
        self.q.len()
    }

    pub fn validate(&self) -> Result<()> {
        let m = self.a.nrows();
        if !crate::linalg::is_hermitian(&self.a, 1e-12) {
            return Err(Error::InvalidInstance("objective matrix is not Hermitian".into()));
        }
        let min_a = crate::linalg::min_eigenvalue(&self.a);
        if min_a < -1e-9 * self.a.norm() {
            return Err(Error::InvalidInstance(format!("objective matrix is not PSD (min eig {min_a:e})")));
        }
        for (i, q) in self.q.iter().enumerate() {
            if q.nrows() != m || !crate::linalg::is_hermitian(q, 1e-12) {
                return Err(Error::InvalidInstance(format!("constraint {i} is not Hermitian of matching size")));
            }
            if crate::linalg::min_eigenvalue(q) < -1e-9 * q.norm().max(1.0) {
                return Err(Error::InvalidInstance(format!("constraint {i} is not PSD")));
            }
        }
        if !(self.p_max > 0.0) {
            return Err(Error::InvalidInstance("power budget must be > 0".into()));
        }
        Ok(())
    }
}

/// Interference-plus-noise covariance at the secondary receiver.
pub fn phi_matrix(rz: &NetworkRealization) -> CMat {
    let n = rz.secondary.n_s;
    let mut phi = ident(n).scale(rz.n0);
    for (k, p) in rz.primaries.iter().enumerate() {
        let v = &rz.cross.h_sk[k] * &p.t_k;
        phi += (&v * v.adjoint()).scale(rz.gains.alpha_sk[k]);
    }
    hermitize(&phi)
}

/// Optimal (MMSE) secondary receive beamformer for a given transmit vector.
pub fn secondary_mmse_receiver(rz: &NetworkRealization, t_s: &CVec) -> Result<CVec> {
    let signal = &rz.secondary.h_ss * t_s;
    if signal.norm() < 1e-300 {
        return Err(Error::ZeroSignal);
    }
    let phi = phi_matrix(rz);
    let chol = phi.cholesky().ok_or_else(|| Error::Singular {
        context: "interference covariance".into(),
        detail: "not positive definite".into(),
    })?;
    let v = chol.solve(&signal);
    Ok(v.clone().unscale(v.norm()))
}

/// SINR at the secondary receiver for explicit beamformers (`r_s` unit norm).
pub fn sinr(rz: &NetworkRealization, t_s: &CVec, r_s: &CVec) -> f64 {
    let num = rz.gains.alpha_ss * (r_s.adjoint() * &rz.secondary.h_ss * t_s)[(0, 0)].norm_sqr();
    let mut den = rz.n0 * r_s.norm_squared();
    for (k, p) in rz.primaries.iter().enumerate() {
        den += rz.gains.alpha_sk[k] * (r_s.adjoint() * &rz.cross.h_sk[k] * &p.t_k)[(0, 0)].norm_sqr();
    }
    num / den
}

/// Quadratic objective matrix: the SINR at the optimal receive filter is
/// exactly `t^H A t`.
pub fn objective_matrix(rz: &NetworkRealization) -> CMat {
    let phi = phi_matrix(rz);
    let chol = phi.cholesky().expect("phi >= n0 I > 0");
    let solved = chol.solve(&rz.secondary.h_ss);
    hermitize(&(rz.secondary.h_ss.adjoint() * solved).scale(rz.gains.alpha_ss))
}

/// Rank-one deterministic interference caps (full-knowledge scenario).
pub fn q_scenario1(rz: &NetworkRealization, spec: &InterferenceSpec) -> Result<Vec<CMat>> {
    spec.validate(rz.k())?;
    Ok(rz
        .primaries
        .iter()
        .enumerate()
        .map(|(k, p)| {
            let u = rz.cross.h_ks[k].adjoint() * &p.r_k;
            hermitize(&(&u * u.adjoint()).scale(rz.gains.alpha_ks[k] / spec.epsilon[k]))
        })
        .collect())
}

/// Norm-inflation factor turning the outage constraint on an isotropic
/// receive beamformer into a deterministic norm bound: a unit vector `r` in
/// `C^n` satisfies `Pr{|r^H u|^2 <= zeta} >= 1 - delta` exactly when
/// `||u||^2 <= zeta * chance_factor(n, delta)`.
pub fn chance_factor(n: usize, delta: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&delta) {
        return Err(Error::InvalidConfig(format!("outage probability {delta} outside [0, 1)")));
    }
    if delta == 0.0 {
        // Worst case: the bound must hold for every direction.
        return Ok(1.0);
    }
    if n < 2 {
        return Err(Error::UnsupportedDimension(
            "chance factor needs dimension >= 2 for a positive outage budget".into(),
        ));
    }
    Ok(1.0 / (1.0 - delta.powf(1.0 / (n as f64 - 1.0))))
}

/// CDF of the F-distribution with `(2(n-1), 2)` degrees of freedom in closed
/// form: `((n-1)x / ((n-1)x + 1))^(n-1)`.
pub fn f_distribution_cdf(x: f64, n: usize) -> f64 {
    assert!(n >= 2, "F CDF needs n >= 2");
    if x <= 0.0 {
        return 0.0;
    }
    let m = n as f64 - 1.0;
    (m * x / (m * x + 1.0)).powf(m)
}

/// Outage-constrained norm caps (beamformer-unknown scenario).
pub fn q_scenario2(rz: &NetworkRealization, spec: &InterferenceSpec) -> Result<Vec<CMat>> {
    spec.validate(rz.k())?;
    rz.primaries
        .iter()
        .enumerate()
        .map(|(k, p)| {
            let delta = spec.delta[k];
            let inflation = if delta == 0.0 {
                1.0
            } else {
                1.0 / chance_factor(p.n_k, delta).map_err(|_| {
                    Error::UnsupportedDimension(format!(
                        "link {k}: outage-constrained norm bound needs N_k >= 2 (got {})",
                        p.n_k
                    ))
                })?
            };
            let h = &rz.cross.h_ks[k];
            Ok(hermitize(
                &(h.adjoint() * h).scale(inflation * rz.gains.alpha_ks[k] / spec.epsilon[k]),
            ))
        })
        .collect()
}

/// Isotropic power caps for the no-knowledge scenario. Returns the constraint
/// matrices, the combined ball radius `lambda`, and whether a zero outage
/// budget forces the zero beamformer.
pub fn q_scenario3(
    spec: &InterferenceSpec,
    alpha_ks: &[f64],
    m_s: usize,
    p_s_max: f64,
) -> Result<(Vec<CMat>, f64, bool)> {
    spec.validate(alpha_ks.len())?;
    let mut lambda = p_s_max;
    let mut infeasible = false;
    let mut qs = Vec::with_capacity(alpha_ks.len());
    for (k, &alpha) in alpha_ks.iter().enumerate() {
        let delta = spec.delta[k];
        if delta == 0.0 {
            // Interference is exponentially distributed with mean ||t||^2, so
            // zero outage admits only the zero beamformer.
            infeasible = true;
            qs.push(CMat::zeros(m_s, m_s));
            continue;
        }
        let log_term = (1.0 / delta).ln();
        let coeff = alpha / spec.epsilon[k] * log_term;
        qs.push(ident(m_s).scale(coeff));
        if log_term > 0.0 {
            lambda = lambda.min(spec.epsilon[k] / (alpha * log_term));
        }
    }
    if infeasible {
        lambda = 0.0;
    }
    Ok((qs, lambda, infeasible))
}

/// Solves `max t^H A t, ||t||^2 <= lambda` by the top eigenpair of `A`.
pub fn scenario3_solve(a: &CMat, lambda: f64) -> Scenario3Solution {
    if lambda <= 0.0 {
        return Scenario3Solution {
            lambda: 0.0,
            top_eigenvalue: 0.0,
            t_star: CVec::zeros(a.nrows()),
            infeasible: true,
        };
    }
    let (top, v) = top_eigenpair(a);
    Scenario3Solution {
        lambda,
        top_eigenvalue: top,
        t_star: phase_normalize(&v.scale(lambda.sqrt())),
        infeasible: false,
    }
}

/// Assembles the QCQP for the active scenario.
pub fn build_qcqp(rz: &NetworkRealization, spec: &InterferenceSpec) -> Result<QcqpProblem> {
    spec.validate(rz.k())?;
    let a = objective_matrix(rz);
    let p_max = rz.secondary.p_s_max;
    let problem = match spec.scenario {
        Scenario::S1 => QcqpProblem { a, q: q_scenario1(rz, spec)?, p_max, closed_form: None },
        Scenario::S2 => QcqpProblem { a, q: q_scenario2(rz, spec)?, p_max, closed_form: None },
        Scenario::S3 => {
            let (q, lambda, infeasible) = q_scenario3(spec, &rz.gains.alpha_ks, rz.secondary.m_s, p_max)?;
            let mut sol = scenario3_solve(&a, lambda);
            sol.infeasible |= infeasible;
            QcqpProblem { a, q, p_max, closed_form: Some(sol) }
        }
    };
    problem.validate()?;
    Ok(problem)
}
