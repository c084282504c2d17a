//! Beamformer recovery from SDP solutions.
//!
//! Three routes out of the relaxation:
//!
//! * a rank-one decomposition that splits a PSD matrix into outer products
//!   whose quadratic forms under two pinned Hermitian matrices all equal the
//!   matrix-level averages — enough to extract exact optima for one or two
//!   interference constraints,
//! * randomized phase rounding with a multiplicative quality guarantee for
//!   three or more constraints,
//! * the eigenpair shortcut when the problem is a single power ball.

use nalgebra::Complex;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    hermitize, ident, inner, phase_normalize, psd_rank, quad_form, CMat, CVec,
};
use crate::problem::QcqpProblem;
use crate::sdp::{kkt_verify, solve_sdp, KktReport, SdpInstance, SdpSolution, SdpStatus, SdpTolerances};

/// Eigenvalues below `RANK_TOL * lambda_max` do not count toward the rank.
pub const RANK_TOL: f64 = 1e-9;
/// A trace constraint counts as binding within this tolerance.
pub const BINDING_TOL: f64 = 1e-6;

/// The exact-extraction paths amplify solver residuals: inflating a factor by
/// `sqrt(R)` multiplies its complementarity share by `R`, and the all-binding
/// rescaling divides by a constraint activity. Solving tighter than the
/// exposed defaults keeps the recovered objective within 1e-6 relative of the
/// relaxation value and constraint violations below 1e-8.
pub(crate) fn exactness_tolerances(tol: &SdpTolerances) -> SdpTolerances {
    SdpTolerances {
        gap_tol: tol.gap_tol.min(1e-10),
        feas_tol: tol.feas_tol.min(1e-10),
        max_iter: tol.max_iter.max(300),
    }
}

/// Factors of `Z = sum_r z_r z_r^H` equalizing two quadratic forms.
#[derive(Debug, Clone)]
pub struct RankOneFactors {
    pub factors: Vec<CVec>,
    pub rank: usize,
}

/// Which route produced a beamformer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    /// Exact extraction through the single-constraint decomposition.
    ExactK1,
    /// Exact extraction through the binding-case analysis for two constraints.
    ExactK2,
    /// Randomized phase rounding (best of N draws).
    Rounded,
    /// Closed-form eigenpair (power-ball problems).
    ClosedFormS3,
}

/// Bookkeeping for the rounding route.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RoundingMeta {
    pub draws: usize,
    pub best_draw_index: usize,
    /// Achieved objective divided by the relaxation value; in (0, 1] up to
    /// solver tolerance.
    pub ratio_to_relaxation: f64,
}

/// A recovered transmit beamformer with its certificates.
#[derive(Debug, Clone)]
pub struct BeamformerResult {
    pub t: CVec,
    /// Achieved quadratic objective `t^H A t`.
    pub objective: f64,
    /// `1 - t^H Q_k t` per interference constraint.
    pub slacks: Vec<f64>,
    /// `P_max - ||t||^2`.
    pub power_slack: f64,
    pub provenance: Provenance,
    pub rounding_meta: Option<RoundingMeta>,
    /// Set when a zero outage budget admits only the zero beamformer.
    pub infeasible: bool,
    pub warning: Option<String>,
}

impl BeamformerResult {
    pub fn min_slack(&self) -> f64 {
        self.slacks.iter().cloned().fold(self.power_slack_normalized(), f64::min)
    }

    fn power_slack_normalized(&self) -> f64 {
        // Compare on the same unit scale as the interference slacks.
        self.power_slack / (self.power_slack + self.t.norm_squared()).max(1e-300)
    }
}

fn result_from_t(
    t: &CVec,
    a: &CMat,
    qs: &[CMat],
    p_max: f64,
    provenance: Provenance,
    rounding_meta: Option<RoundingMeta>,
) -> BeamformerResult {
    let t = phase_normalize(t);
    BeamformerResult {
        objective: quad_form(a, &t),
        slacks: qs.iter().map(|q| 1.0 - quad_form(q, &t)).collect(),
        power_slack: p_max - t.norm_squared(),
        t,
        provenance,
        rounding_meta,
        infeasible: false,
        warning: None,
    }
}

/// Smaller-magnitude real root of `a2 g^2 + a1 g + a0 = 0`, with the linear
/// fallback when the leading coefficient vanishes. A clearly negative
/// discriminant violates the opposite-sign precondition and is reported.
fn smaller_quadratic_root(a2: f64, a1: f64, a0: f64) -> Result<f64> {
    let scale = a2.abs().max(a1.abs()).max(a0.abs()).max(1e-300);
    if a2.abs() <= 1e-14 * scale {
        if a1.abs() <= 1e-14 * scale {
            return Ok(0.0);
        }
        return Ok(-a0 / a1);
    }
    let disc = a1 * a1 - 4.0 * a2 * a0;
    if disc < -1e-12 * scale * scale {
        return Err(Error::InternalContradiction(format!(
            "negative discriminant {disc:e} in the rotation quadratic"
        )));
    }
    let sq = disc.max(0.0).sqrt();
    let q = -0.5 * (a1 + a1.signum() * sq);
    if q.abs() <= 1e-300 {
        return Ok(0.0);
    }
    let r1 = q / a2;
    let r2 = a0 / q;
    Ok(if r2.abs() < r1.abs() - 1e-15 * (1.0 + r1.abs()) {
        r2
    } else if r1.abs() < r2.abs() - 1e-15 * (1.0 + r2.abs()) {
        r1
    } else {
        r1.max(r2)
    })
}

/// Decomposes a Hermitian PSD `Z` of numerical rank `R` into `R` rank-one
/// factors such that every factor's quadratic form under `A` equals
/// `tr(A Z)/R` and likewise under `B`.
///
/// Stage one equalizes the `A`-forms pairwise with real rotations; stage two
/// equalizes the `B`-forms with phase-twisted rotations chosen to leave the
/// `A`-forms untouched.
pub fn rank_one_decompose(z: &CMat, a: &CMat, b: &CMat) -> Result<RankOneFactors> {
    let rank = psd_rank(z, RANK_TOL);
    if rank == 0 {
        return Ok(RankOneFactors { factors: vec![], rank: 0 });
    }
    let (vals, vecs) = crate::linalg::hermitian_eigen_desc(z);
    let mut p: Vec<CVec> = (0..rank).map(|r| vecs[r].scale(vals[r].max(0.0).sqrt())).collect();
    if rank == 1 {
        return Ok(RankOneFactors { factors: p, rank });
    }
    let rf = rank as f64;
    let scale_a = 1e-12 * (1.0 + inner(a, z).abs() / rf + a.norm() * z.norm() / rf);
    let scale_b = 1e-12 * (1.0 + inner(b, z).abs() / rf + b.norm() * z.norm() / rf);

    // Stage 1: equalize quadratic forms under A.
    let target_a = inner(a, z) / rf;
    for r in 0..rank - 1 {
        let res_r = quad_form(a, &p[r]) - target_a;
        if res_r.abs() <= scale_a {
            continue;
        }
        // Residuals over the active set sum to ~0, so an opposite-sign
        // partner exists whenever p_r is off target.
        let partner = (r + 1..rank)
            .map(|l| (l, quad_form(a, &p[l]) - target_a))
            .filter(|(_, res_l)| res_l * res_r < 0.0)
            .max_by(|x, y| x.1.abs().partial_cmp(&y.1.abs()).unwrap());
        let Some((l, res_l)) = partner else { continue };
        let cross = (p[r].adjoint() * a * &p[l])[(0, 0)].re;
        let gamma = smaller_quadratic_root(res_l, 2.0 * cross, res_r)?;
        let denom = (1.0 + gamma * gamma).sqrt();
        let q_r = (&p[r] + p[l].scale(gamma)).unscale(denom);
        let q_l = (p[l].clone() - p[r].scale(gamma)).unscale(denom);
        p[r] = q_r;
        p[l] = q_l;
    }

    // Stage 2: equalize quadratic forms under B, preserving the A-forms.
    let target_b = inner(b, z) / rf;
    for r in 0..rank - 1 {
        let res_r = quad_form(b, &p[r]) - target_b;
        if res_r.abs() <= scale_b {
            continue;
        }
        let partner = (r + 1..rank)
            .map(|l| (l, quad_form(b, &p[l]) - target_b))
            .filter(|(_, res_l)| res_l * res_r < 0.0)
            .max_by(|x, y| x.1.abs().partial_cmp(&y.1.abs()).unwrap());
        let Some((l, res_l)) = partner else { continue };
        let cross_a = (p[r].adjoint() * a * &p[l])[(0, 0)];
        let cross_b = (p[r].adjoint() * b * &p[l])[(0, 0)];
        let alpha1 = cross_a.arg();
        let alpha2 = cross_b.arg();
        let gamma0 = cross_b.norm();
        let gamma =
            smaller_quadratic_root(res_r, 2.0 * gamma0 * (alpha2 - alpha1).sin(), res_l)?;
        let w = Complex::from_polar(gamma, alpha1 + std::f64::consts::FRAC_PI_2);
        let denom = (1.0 + gamma * gamma).sqrt();
        let z_r = (p[r].scale_complex(w) + &p[l]).unscale(denom);
        let q_l = (p[l].scale_complex(w.conj()) - &p[r]).unscale(denom);
        p[r] = z_r;
        p[l] = q_l;
    }

    Ok(RankOneFactors { factors: p, rank })
}

trait ScaleComplex {
    fn scale_complex(&self, w: Complex<f64>) -> CVec;
}

impl ScaleComplex for CVec {
    fn scale_complex(&self, w: Complex<f64>) -> CVec {
        self * w
    }
}

/// Exact extraction for a single interference constraint: decompose the
/// optimal `X` against `(Q_1, I)` and inflate any factor back to full trace.
pub fn extract_k1(
    x: &CMat,
    y: &[f64],
    a: &CMat,
    q1: &CMat,
    p_max: f64,
) -> Result<BeamformerResult> {
    debug_assert_eq!(y.len(), 2, "one interference multiplier plus the power multiplier");
    let m = x.nrows();
    let factors = rank_one_decompose(x, q1, &ident(m))?;
    if factors.rank == 0 {
        return Ok(result_from_t(&CVec::zeros(m), a, std::slice::from_ref(q1), p_max, Provenance::ExactK1, None));
    }
    let t_hat = factors.factors[0].scale((factors.rank as f64).sqrt());
    Ok(result_from_t(&t_hat, a, std::slice::from_ref(q1), p_max, Provenance::ExactK1, None))
}

/// Exact extraction for two interference constraints.
///
/// If some constraint is slack at the optimum its multiplier vanishes, so
/// decomposing against the other two preserves optimality (case 1). If all
/// three are binding, decomposing against the two *differences* pins every
/// factor onto all three boundaries at once after rescaling (case 2).
pub fn extract_k2(
    x: &CMat,
    y: &[f64],
    a: &CMat,
    q1: &CMat,
    q2: &CMat,
    p_max: f64,
) -> Result<BeamformerResult> {
    debug_assert_eq!(y.len(), 3, "two interference multipliers plus the power multiplier");
    let m = x.nrows();
    let qs = [q1.clone(), q2.clone()];
    let tq1 = inner(q1, x);
    let tq2 = inner(q2, x);
    let tp = x.trace().re;
    let slacks = [1.0 - tq1, 1.0 - tq2, (p_max - tp) / p_max];
    let binding = [
        slacks[0].abs() <= BINDING_TOL,
        slacks[1].abs() <= BINDING_TOL,
        slacks[2].abs() <= BINDING_TOL,
    ];

    if binding.iter().all(|&b| b) {
        // Case 2: all constraints binding at optimality. Every factor lands
        // on all three boundaries simultaneously once rescaled; dividing by
        // the worst of the three forms (they coincide up to solver residuals)
        // keeps feasibility unconditional.
        let d1 = q1 - q2;
        let d2 = q2 - ident(m).unscale(p_max);
        let factors = rank_one_decompose(x, &d1, &d2)?;
        if factors.rank == 0 {
            return Ok(result_from_t(&CVec::zeros(m), a, &qs, p_max, Provenance::ExactK2, None));
        }
        let (best, s) = factors
            .factors
            .iter()
            .map(|f| (f, quad_form(q1, f)))
            .max_by(|x, y| x.1.partial_cmp(&y.1).unwrap())
            .expect("rank >= 1");
        if s <= 1e-12 * (1.0 + tq1.abs()) {
            return Err(Error::InternalContradiction(
                "no factor carries positive weight on a binding constraint".into(),
            ));
        }
        let s_worst = s
            .max(quad_form(q2, best))
            .max(best.norm_squared() / p_max);
        let t_hat = best.unscale(s_worst.sqrt());
        return Ok(result_from_t(&t_hat, a, &qs, p_max, Provenance::ExactK2, None));
    }

    // Case 1: the most-slack constraint has a vanishing multiplier, so
    // decompose against the other two and pick a factor that underuses the
    // slack one. Among the underusing factors, the one closest to the average
    // minimizes the residual objective error carried by the (near-zero)
    // multiplier of the slack constraint.
    let slack_idx = (0..3).max_by(|&i, &j| slacks[i].partial_cmp(&slacks[j]).unwrap()).unwrap();
    let eye = ident(m);
    let (b1, b2, slack_mat, slack_trace): (&CMat, &CMat, &CMat, f64) = match slack_idx {
        0 => (q2, &eye, q1, tq1),
        1 => (q1, &eye, q2, tq2),
        _ => (q1, q2, &eye, tp),
    };
    let factors = rank_one_decompose(x, b1, b2)?;
    if factors.rank == 0 {
        return Ok(result_from_t(&CVec::zeros(m), a, &qs, p_max, Provenance::ExactK2, None));
    }
    let rf = factors.rank as f64;
    let avg = slack_trace / rf;
    let cutoff = avg + 1e-12 * (1.0 + avg.abs());
    let best = factors
        .factors
        .iter()
        .filter(|f| quad_form(slack_mat, f) <= cutoff)
        .max_by(|u, v| quad_form(slack_mat, u).partial_cmp(&quad_form(slack_mat, v)).unwrap())
        .or_else(|| {
            factors.factors.iter().min_by(|u, v| {
                quad_form(slack_mat, u).partial_cmp(&quad_form(slack_mat, v)).unwrap()
            })
        })
        .expect("rank >= 1");
    let mut t_hat = best.scale(rf.sqrt());
    // Guard rescale: a no-op in exact arithmetic, it absorbs the last bits of
    // solver round-off so slacks never go negative.
    let worst = quad_form(q1, &t_hat)
        .max(quad_form(q2, &t_hat))
        .max(t_hat.norm_squared() / p_max);
    if worst > 1.0 {
        t_hat = t_hat.unscale(worst.sqrt());
    }
    Ok(result_from_t(&t_hat, a, &qs, p_max, Provenance::ExactK2, None))
}

/// Randomized phase rounding. The power budget joins the constraint set as
/// `I / P_max`, every draw is feasible by construction, and the best draw by
/// objective is returned.
pub fn randomized_round<R: Rng>(
    x: &CMat,
    a: &CMat,
    qs: &[CMat],
    p_max: f64,
    draws: usize,
    rng: &mut R,
) -> Result<BeamformerResult> {
    let m = x.nrows();
    if x.norm() <= 1e-300 || draws == 0 {
        let mut res = result_from_t(&CVec::zeros(m), a, qs, p_max, Provenance::Rounded, None);
        res.infeasible = true;
        return Ok(res);
    }

    // X = Delta^H Delta with Delta = Lambda^(1/2) U^H, keeping only rows
    // above the rank threshold (the rest carry pure round-off).
    let se = hermitize(x).symmetric_eigen();
    let lam_max = se.eigenvalues.iter().cloned().fold(0.0f64, f64::max);
    let kept: Vec<usize> = (0..m).filter(|&i| se.eigenvalues[i] >= RANK_TOL * lam_max).collect();
    let r = kept.len();
    let delta = CMat::from_fn(r, m, |i, j| {
        se.eigenvectors[(j, kept[i])].conj() * se.eigenvalues[kept[i]].sqrt()
    });

    // Rotate so the transformed objective is diagonal; its trace is the
    // relaxation value and is invariant under the phase draw.
    let a_tilde = hermitize(&(&delta * a * delta.adjoint()));
    let basis = a_tilde.symmetric_eigen().eigenvectors;
    let carrier = delta.adjoint() * &basis;

    let mut q_hat: Vec<CMat> = qs
        .iter()
        .map(|q| hermitize(&(basis.adjoint() * &delta * q * delta.adjoint() * &basis)))
        .collect();
    q_hat.push(hermitize(&(carrier.adjoint() * &carrier)).unscale(p_max));

    let relaxation = inner(a, x);
    let mut best: Option<(usize, f64, CVec)> = None;
    for draw in 0..draws {
        let xi = CVec::from_fn(r, |_, _| {
            Complex::from_polar(1.0, rng.random::<f64>() * std::f64::consts::TAU)
        });
        let maxq = q_hat.iter().map(|q| quad_form(q, &xi)).fold(f64::NEG_INFINITY, f64::max);
        if maxq <= 1e-300 {
            continue;
        }
        if best.as_ref().map_or(true, |(_, bq, _)| maxq < *bq) {
            best = Some((draw, maxq, xi));
        }
    }
    let Some((best_draw_index, maxq, xi)) = best else {
        return Err(Error::Numerical("all rounding draws degenerated".into()));
    };
    let t = (&carrier * xi).unscale(maxq.sqrt());
    let meta = RoundingMeta {
        draws,
        best_draw_index,
        ratio_to_relaxation: quad_form(a, &t) / relaxation,
    };
    Ok(result_from_t(&t, a, qs, p_max, Provenance::Rounded, Some(meta)))
}

/// Lower bound on the probability that a single rounding draw achieves at
/// least `1/alpha` of the relaxation value: `1 - 4(K+1) mu exp(-alpha/4)`
/// with `mu = min(rank(X*), M_S)`, clamped to `[0, 1)`.
pub fn approximation_bound(k: usize, rank_x: usize, m_s: usize, alpha: f64) -> f64 {
    assert!(alpha > 0.0, "alpha must be positive");
    let mu = rank_x.min(m_s) as f64;
    (1.0 - 4.0 * (k as f64 + 1.0) * mu * (-alpha / 4.0).exp()).max(0.0)
}

/// The SDP relaxation instance of a QCQP: interference caps at bound 1 plus
/// the power ball.
pub fn qcqp_to_sdp(problem: &QcqpProblem) -> SdpInstance {
    let mut constraints: Vec<(CMat, f64)> = problem.q.iter().map(|q| (q.clone(), 1.0)).collect();
    constraints.push((ident(problem.dim()), problem.p_max));
    SdpInstance { c: problem.a.clone(), constraints }
}

/// Full solve outcome: the beamformer, the relaxation upper bound, and the
/// solver artifacts when the SDP path ran.
#[derive(Debug, Clone)]
pub struct SolveOutcome {
    pub result: BeamformerResult,
    /// `tr(A X*)`; an upper bound on the best achievable objective.
    pub upper_bound: f64,
    pub sdp: Option<SdpSolution>,
    pub kkt: Option<KktReport>,
}

/// Dispatches a QCQP to the right recovery route: the eigenpair shortcut for
/// closed-form problems, exact extraction for up to two constraints, and
/// randomized rounding beyond. A solve that ends in numerical trouble (or
/// fails KKT verification) downgrades to rounding on the best iterate.
pub fn solve_beamformer<R: Rng>(
    problem: &QcqpProblem,
    tol: &SdpTolerances,
    rounding_draws: usize,
    rng: &mut R,
) -> Result<SolveOutcome> {
    problem.validate()?;

    if let Some(cf) = &problem.closed_form {
        let mut result =
            result_from_t(&cf.t_star, &problem.a, &problem.q, problem.p_max, Provenance::ClosedFormS3, None);
        result.infeasible = cf.infeasible;
        return Ok(SolveOutcome {
            upper_bound: result.objective,
            result,
            sdp: None,
            kkt: None,
        });
    }
    if problem.q.is_empty() {
        // Only the power ball constrains the problem; same eigenpair shortcut.
        let cf = crate::problem::scenario3_solve(&problem.a, problem.p_max);
        let result =
            result_from_t(&cf.t_star, &problem.a, &problem.q, problem.p_max, Provenance::ClosedFormS3, None);
        return Ok(SolveOutcome { upper_bound: result.objective, result, sdp: None, kkt: None });
    }

    let instance = qcqp_to_sdp(problem);

    // Both recovery routes compare against (or divide by) solver activities,
    // so the relaxation is solved tighter than the exposed tolerances; if the
    // tight run stalls, fall back to the requested ones.
    let tight_tol = if problem.k() <= 2 {
        exactness_tolerances(tol)
    } else {
        SdpTolerances {
            gap_tol: tol.gap_tol.min(1e-9),
            feas_tol: tol.feas_tol.min(1e-9),
            max_iter: tol.max_iter.max(300),
        }
    };
    let sol = {
        let tight = solve_sdp(&instance, &tight_tol)?;
        if tight.status == SdpStatus::Optimal {
            tight
        } else {
            solve_sdp(&instance, tol)?
        }
    };
    let report = kkt_verify(&instance, &sol);

    let exact_ok = sol.status == SdpStatus::Optimal && report.passes(1e-6);
    let mut result = if exact_ok && problem.k() == 1 {
        extract_k1(&sol.x, &sol.y, &problem.a, &problem.q[0], problem.p_max)?
    } else if exact_ok && problem.k() == 2 {
        extract_k2(&sol.x, &sol.y, &problem.a, &problem.q[0], &problem.q[1], problem.p_max)?
    } else {
        let mut r = randomized_round(&sol.x, &problem.a, &problem.q, problem.p_max, rounding_draws, rng)?;
        if !exact_ok {
            let why = if sol.status != SdpStatus::Optimal {
                "solver reported numerical trouble"
            } else {
                "KKT verification failed"
            };
            log::warn!("downgrading to randomized rounding: {why}");
            r.warning = Some(format!("rounded on best iterate: {why}"));
        }
        r
    };

    // Guard the relaxation-dominance invariant against solver slack.
    if result.objective > sol.primal_value * (1.0 + 1e-7) + 1e-12 {
        result.warning =
            Some(format!("objective {:.6e} exceeds relaxation {:.6e}", result.objective, sol.primal_value));
    }

    Ok(SolveOutcome { result, upper_bound: sol.primal_value, sdp: Some(sol), kkt: Some(report) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::min_eigenvalue;
    use crate::rng::SeededStream;
    use approx::assert_relative_eq;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    fn random_hermitian(rng: &mut impl Rng, n: usize) -> CMat {
        let g = crate::channel::sample_gaussian_matrix(rng, n, n);
        hermitize(&g)
    }

    fn random_psd(rng: &mut impl Rng, n: usize, rank: usize) -> CMat {
        let g = crate::channel::sample_gaussian_matrix(rng, n, rank);
        hermitize(&(&g * g.adjoint()))
    }

    fn check_factors(z: &CMat, a: &CMat, b: &CMat, f: &RankOneFactors) {
        let m = z.nrows();
        let mut recon = CMat::zeros(m, m);
        for v in &f.factors {
            recon += v * v.adjoint();
        }
        assert!((recon - z).norm() <= 1e-8 * z.norm().max(1e-12), "reconstruction failed");
        let rf = f.rank.max(1) as f64;
        let (ta, tb) = (inner(a, z) / rf, inner(b, z) / rf);
        for v in &f.factors {
            assert!((quad_form(a, v) - ta).abs() <= 1e-8 * (1.0 + ta.abs()), "A-form off target");
            assert!((quad_form(b, v) - tb).abs() <= 1e-8 * (1.0 + tb.abs()), "B-form off target");
        }
    }

    #[test]
    fn decompose_rank_one_is_identity() {
        let mut rng = SeededStream::new(1, 0).rng();
        let v = crate::channel::sample_gaussian_matrix(&mut rng, 4, 1).column(0).into_owned();
        let z = &v * v.adjoint();
        let a = random_hermitian(&mut rng, 4);
        let b = random_hermitian(&mut rng, 4);
        let f = rank_one_decompose(&z, &a, &b).unwrap();
        assert_eq!(f.rank, 1);
        check_factors(&z, &a, &b, &f);
    }

    #[test]
    fn decompose_identity_against_indefinite_form() {
        let z = ident(2);
        let a = CMat::from_diagonal(&CVec::from_vec(vec![c(1.0, 0.0), c(-1.0, 0.0)]));
        let b = ident(2);
        let f = rank_one_decompose(&z, &a, &b).unwrap();
        assert_eq!(f.rank, 2);
        check_factors(&z, &a, &b, &f);
        for v in &f.factors {
            assert!(quad_form(&a, v).abs() < 1e-12);
            assert_relative_eq!(v.norm_squared(), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn decompose_random_instances() {
        let mut rng = SeededStream::new(2, 0).rng();
        for trial in 0..60 {
            let n = 2 + (trial % 5);
            let rank = 1 + (trial % n);
            let z = random_psd(&mut rng, n, rank);
            let a = random_hermitian(&mut rng, n);
            let b = random_hermitian(&mut rng, n);
            let f = rank_one_decompose(&z, &a, &b).unwrap();
            check_factors(&z, &a, &b, &f);
        }
    }

    #[test]
    fn decompose_zero_matrix() {
        let f = rank_one_decompose(&CMat::zeros(3, 3), &ident(3), &ident(3)).unwrap();
        assert_eq!(f.rank, 0);
        assert!(f.factors.is_empty());
    }

    fn solve_instance(a: &CMat, qs: &[CMat], p_max: f64) -> SdpSolution {
        let mut constraints: Vec<(CMat, f64)> = qs.iter().map(|q| (q.clone(), 1.0)).collect();
        constraints.push((ident(a.nrows()), p_max));
        let tol = exactness_tolerances(&SdpTolerances::default());
        solve_sdp(&SdpInstance { c: a.clone(), constraints }, &tol).unwrap()
    }

    #[test]
    fn extract_k1_matches_relaxation_value() {
        let mut rng = SeededStream::new(3, 0).rng();
        for trial in 0..25 {
            let a = {
                let g = crate::channel::sample_gaussian_matrix(&mut rng, 4, 4);
                hermitize(&(&g * g.adjoint()))
            };
            let u = crate::channel::sample_gaussian_matrix(&mut rng, 4, 1).column(0).into_owned();
            let q1 = hermitize(&(&u * u.adjoint()));
            let p_max = 1.0 + 3.0 * rng.random::<f64>();
            let sol = solve_instance(&a, std::slice::from_ref(&q1), p_max);
            assert_eq!(sol.status, SdpStatus::Optimal, "trial {trial}");
            let res = extract_k1(&sol.x, &sol.y, &a, &q1, p_max).unwrap();
            assert_relative_eq!(res.objective, sol.primal_value, max_relative = 1e-6);
            assert!(res.min_slack() >= -1e-8, "violation {trial}: {}", res.min_slack());
        }
    }

    #[test]
    fn extract_k1_diagonal_oracle() {
        // A = diag(2,1), Q1 = diag(1,0)/c, P large. Optimal: put everything on
        // coordinate 1 up to the interference cap, then spill onto coordinate 2.
        let a = CMat::from_diagonal(&CVec::from_vec(vec![c(2.0, 0.0), c(1.0, 0.0)]));
        let cap = 0.5_f64; // coordinate-1 power cap from Q1
        let q1 = CMat::from_diagonal(&CVec::from_vec(vec![c(1.0 / cap, 0.0), c(0.0, 0.0)]));
        let p_max = 4.0;
        let sol = solve_instance(&a, std::slice::from_ref(&q1), p_max);
        let res = extract_k1(&sol.x, &sol.y, &a, &q1, p_max).unwrap();
        let expect = 2.0 * cap + (p_max - cap);
        assert_relative_eq!(res.objective, expect, max_relative = 1e-6);
        assert_relative_eq!(sol.primal_value, expect, max_relative = 1e-7);
    }

    fn random_scenario_like(rng: &mut impl Rng, m: usize, k: usize) -> (CMat, Vec<CMat>, f64) {
        let g = crate::channel::sample_gaussian_matrix(rng, m, m);
        let a = hermitize(&(&g * g.adjoint()));
        let qs: Vec<CMat> = (0..k)
            .map(|_| {
                let u = crate::channel::sample_gaussian_matrix(rng, m, 1).column(0).into_owned();
                hermitize(&(&u * u.adjoint())).scale(0.5 + rng.random::<f64>())
            })
            .collect();
        (a, qs, 0.5 + 2.0 * rng.random::<f64>())
    }

    #[test]
    fn extract_k2_exactness_over_random_instances() {
        let mut rng = SeededStream::new(4, 0).rng();
        let mut case2_seen = 0;
        for trial in 0..40 {
            let (a, qs, p_max) = random_scenario_like(&mut rng, 4, 2);
            let sol = solve_instance(&a, &qs, p_max);
            assert_eq!(sol.status, SdpStatus::Optimal, "trial {trial}");
            let res = extract_k2(&sol.x, &sol.y, &a, &qs[0], &qs[1], p_max).unwrap();
            assert_relative_eq!(res.objective, sol.primal_value, max_relative = 1e-6);
            assert!(res.min_slack() >= -1e-8, "trial {trial}");
            if res.slacks.iter().all(|s| s.abs() < 1e-5) {
                case2_seen += 1;
            }
        }
        let _ = case2_seen;
    }

    #[test]
    fn extract_k2_all_binding_case() {
        // Rescale constraints through the optimizer's activity levels so all
        // three constraints bind, then re-extract.
        let mut rng = SeededStream::new(5, 0).rng();
        let mut exercised = 0;
        for _trial in 0..30 {
            let (a, qs, p_max) = random_scenario_like(&mut rng, 4, 2);
            let sol = solve_instance(&a, &qs, p_max);
            let t1 = inner(&qs[0], &sol.x);
            let t2 = inner(&qs[1], &sol.x);
            let tp = sol.x.trace().re;
            if t1 < 1e-3 || t2 < 1e-3 {
                continue;
            }
            let scaled = [qs[0].unscale(t1), qs[1].unscale(t2)];
            let p_tight = tp;
            let sol2 = solve_instance(&a, &scaled, p_tight);
            let res = extract_k2(&sol2.x, &sol2.y, &a, &scaled[0], &scaled[1], p_tight).unwrap();
            assert_relative_eq!(res.objective, sol2.primal_value, max_relative = 1e-6);
            assert!(res.min_slack() >= -1e-8);
            // When all constraints really bind, the extraction puts the point
            // on every boundary.
            if [inner(&scaled[0], &sol2.x) - 1.0, inner(&scaled[1], &sol2.x) - 1.0]
                .iter()
                .all(|d| d.abs() < 1e-6)
                && (sol2.x.trace().re - p_tight).abs() < 1e-6 * p_tight
            {
                exercised += 1;
                for s in &res.slacks {
                    assert!(s.abs() < 1e-6, "constraint should be tight, slack = {s}");
                }
                assert!((res.power_slack / p_tight).abs() < 1e-6);
            }
            let _ = p_max;
        }
        assert!(exercised >= 5, "the all-binding construction should trigger (got {exercised})");
    }

    #[test]
    fn extract_rank_one_solution_directly() {
        let mut rng = SeededStream::new(6, 0).rng();
        let v = crate::channel::sample_gaussian_matrix(&mut rng, 3, 1).column(0).into_owned();
        let x = &v * v.adjoint();
        let a = random_psd(&mut rng, 3, 3);
        let q1 = random_psd(&mut rng, 3, 1).unscale(v.norm_squared());
        let res = extract_k1(&x, &[0.0, 0.0], &a, &q1, v.norm_squared() * 2.0).unwrap();
        // Same outer product up to phase.
        let align = (res.t.adjoint() * &v)[(0, 0)].norm();
        assert_relative_eq!(align, v.norm_squared(), max_relative = 1e-9);
    }

    #[test]
    fn rounding_on_rank_one_is_exact_and_deterministic_on_isotropic_instances() {
        let mut rng = SeededStream::new(7, 0).rng();
        // Hand-built rank-one optimum with an exactly binding constraint:
        // every draw must land on that beamformer up to phase, ratio 1.
        let v = crate::channel::sample_gaussian_matrix(&mut rng, 4, 1).column(0).into_owned();
        let a = random_psd(&mut rng, 4, 4);
        let q1 = {
            let raw = random_psd(&mut rng, 4, 2);
            raw.unscale(quad_form(&raw, &v)) // v^H Q1 v = 1 exactly
        };
        let x = &v * v.adjoint();
        let res = randomized_round(&x, &a, std::slice::from_ref(&q1), 1e6, 20, &mut rng).unwrap();
        let meta = res.rounding_meta.clone().unwrap();
        assert_relative_eq!(meta.ratio_to_relaxation, 1.0, epsilon = 1e-12);
        let align = (res.t.adjoint() * &v)[(0, 0)].norm() / (res.t.norm() * v.norm());
        assert_relative_eq!(align, 1.0, epsilon = 1e-12);

        // A solver-produced rank-one optimum matches up to solver residuals.
        let (a, qs, p_max) = random_scenario_like(&mut rng, 4, 3);
        let sol = solve_instance(&a, &qs, p_max);
        if psd_rank(&sol.x, RANK_TOL) == 1 {
            let res = randomized_round(&sol.x, &a, &qs, p_max, 20, &mut rng).unwrap();
            let meta = res.rounding_meta.unwrap();
            assert_relative_eq!(meta.ratio_to_relaxation, 1.0, epsilon = 1e-7);
        }

        // Isotropic sanity: A = I, all constraints proportional to I.
        let m = 3;
        let a = ident(m);
        let qs = vec![ident(m).scale(0.25)];
        let x = ident(m); // relaxation optimum for tr X <= 4 budget, say
        let res = randomized_round(&x, &a, &qs, 100.0, 5, &mut rng).unwrap();
        // Every draw saturates the tightest ball: ||t||^2 = 4.
        assert_relative_eq!(res.t.norm_squared(), 4.0, max_relative = 1e-12);
        assert_relative_eq!(res.objective, 4.0, max_relative = 1e-12);
    }

    #[test]
    fn rounding_draws_are_always_feasible() {
        let mut rng = SeededStream::new(8, 0).rng();
        for _ in 0..20 {
            let (a, qs, p_max) = random_scenario_like(&mut rng, 4, 4);
            let sol = solve_instance(&a, &qs, p_max);
            let res = randomized_round(&sol.x, &a, &qs, p_max, 50, &mut rng).unwrap();
            assert!(res.min_slack() >= -1e-8);
            let meta = res.rounding_meta.unwrap();
            assert!(meta.ratio_to_relaxation > 0.0 && meta.ratio_to_relaxation <= 1.0 + 1e-7);
        }
    }

    #[test]
    fn rounding_zero_matrix_is_flagged() {
        let mut rng = SeededStream::new(9, 0).rng();
        let res = randomized_round(&CMat::zeros(3, 3), &ident(3), &[ident(3)], 1.0, 10, &mut rng).unwrap();
        assert!(res.infeasible);
        assert_eq!(res.t.norm(), 0.0);
    }

    #[test]
    fn approximation_bound_reference_points() {
        let alpha = 4.0 * (8.0f64 / 0.5).ln();
        assert_relative_eq!(approximation_bound(1, 1, 4, alpha), 0.5, epsilon = 1e-12);
        assert_eq!(approximation_bound(3, 2, 4, 0.1), 0.0);
        assert_relative_eq!(
            approximation_bound(4, 2, 4, 40.0),
            1.0 - 40.0 * (-10.0f64).exp(),
            epsilon = 1e-12
        );
        assert!((approximation_bound(4, 2, 4, 40.0) - 0.99818).abs() < 1e-5);
    }

    #[test]
    fn solve_beamformer_dispatches_by_constraint_count() {
        use crate::channel::realize_network;
        use crate::config::preset;
        use crate::problem::{build_qcqp, InterferenceSpec, Scenario};

        let setup = preset("k2_paper").unwrap().setup_for_tests();
        let rz = realize_network(&setup, &SeededStream::new(21, 0)).unwrap();
        let tol = SdpTolerances::default();

        let spec = InterferenceSpec {
            scenario: Scenario::S1,
            epsilon: vec![1.0, 1.0],
            delta: vec![0.0, 0.0],
        };
        let problem = build_qcqp(&rz, &spec).unwrap();
        let mut rng = SeededStream::new(22, 0).rng();
        let out = solve_beamformer(&problem, &tol, 100, &mut rng).unwrap();
        assert_eq!(out.result.provenance, Provenance::ExactK2);
        assert_relative_eq!(out.result.objective, out.upper_bound, max_relative = 1e-6);
        assert!(out.kkt.unwrap().passes(1e-6));

        // Single-link variant goes through the K = 1 path.
        let mut one = problem.clone();
        one.q.truncate(1);
        let out1 = solve_beamformer(&one, &tol, 100, &mut rng).unwrap();
        assert_eq!(out1.result.provenance, Provenance::ExactK1);
        assert_relative_eq!(out1.result.objective, out1.upper_bound, max_relative = 1e-6);

        // S3 goes through the closed form.
        let spec3 = InterferenceSpec {
            scenario: Scenario::S3,
            epsilon: vec![1.0, 1.0],
            delta: vec![0.01, 0.01],
        };
        let p3 = build_qcqp(&rz, &spec3).unwrap();
        let out3 = solve_beamformer(&p3, &tol, 100, &mut rng).unwrap();
        assert_eq!(out3.result.provenance, Provenance::ClosedFormS3);
        assert!(!out3.result.infeasible);

        // No constraints at all: the eigenpair shortcut.
        let p0 = QcqpProblem { a: problem.a.clone(), q: vec![], p_max: problem.p_max, closed_form: None };
        let out0 = solve_beamformer(&p0, &tol, 100, &mut rng).unwrap();
        assert_eq!(out0.result.provenance, Provenance::ClosedFormS3);
        let (top, _) = crate::linalg::top_eigenpair(&problem.a);
        assert_relative_eq!(out0.result.objective, top * problem.p_max, max_relative = 1e-10);
    }

    #[test]
    fn scenario3_closed_form_matches_sdp_path() {
        use crate::channel::realize_network;
        use crate::config::preset;
        use crate::problem::{build_qcqp, InterferenceSpec, Scenario};

        let setup = preset("k2_paper").unwrap().setup_for_tests();
        let rz = realize_network(&setup, &SeededStream::new(23, 0)).unwrap();
        let spec3 = InterferenceSpec {
            scenario: Scenario::S3,
            epsilon: vec![2.0, 2.0],
            delta: vec![0.05, 0.01],
        };
        let p3 = build_qcqp(&rz, &spec3).unwrap();
        let closed = p3.closed_form.as_ref().unwrap();
        // Same problem forced through the SDP + extraction path.
        let opened = QcqpProblem { a: p3.a.clone(), q: p3.q.clone(), p_max: p3.p_max, closed_form: None };
        let mut rng = SeededStream::new(24, 0).rng();
        let out = solve_beamformer(&opened, &SdpTolerances::default(), 100, &mut rng).unwrap();
        let closed_obj = quad_form(&p3.a, &closed.t_star);
        assert_relative_eq!(out.result.objective, closed_obj, max_relative = 1e-6);
        assert_relative_eq!(out.upper_bound, closed_obj, max_relative = 1e-6);
    }

    #[test]
    fn psd_projection_keeps_rounding_well_posed() {
        let mut rng = SeededStream::new(10, 0).rng();
        let x = random_psd(&mut rng, 4, 2);
        assert!(min_eigenvalue(&x) >= -1e-12);
        let a = random_psd(&mut rng, 4, 4);
        let res = randomized_round(&x, &a, &[ident(4).scale(0.1)], 50.0, 30, &mut rng).unwrap();
        assert!(res.min_slack() >= -1e-8);
    }
}

