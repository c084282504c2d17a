//! Primal-dual path-following core over real symmetric matrices.
//!
//! Solves `max <C, X>  s.t.  <G_i, X> <= b_i, X >= 0` by introducing slack
//! variables and running a Mehrotra-style predictor-corrector with the
//! HKM search direction. The slack block enters the Schur complement as a
//! plain diagonal, so one dense factorization per iteration covers both the
//! PSD block and the inequality slacks. Problems here are tiny (dimension at
//! most a few dozen), so the implementation favors transparency over sparsity
//! tricks: no low-rank exploitation, no block elimination.

use nalgebra::DMatrix;

use super::SdpTolerances;

type Mat = DMatrix<f64>;

/// Real symmetric instance in inequality form.
pub(crate) struct RealSdp {
    pub c: Mat,
    pub constraints: Vec<(Mat, f64)>,
}

/// Raw iterate returned by the core; `y` is already in the caller's units.
pub(crate) struct IpmOutcome {
    pub x: Mat,
    pub y: Vec<f64>,
    pub primal_value: f64,
    pub dual_value: f64,
    pub iterations: usize,
    pub converged: bool,
    pub primal_infeas: f64,
    pub dual_infeas: f64,
}

fn sym(m: &Mat) -> Mat {
    (m + m.transpose()).scale(0.5)
}

fn min_eig_sym(m: &Mat) -> f64 {
    sym(m).symmetric_eigen().eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min)
}

/// Largest step `alpha` keeping `X + alpha * dx` positive semidefinite, given
/// the Cholesky factor `l` of `X`.
fn max_step_psd(l: &Mat, dx: &Mat) -> f64 {
    // X + a*D = L (I + a * L^-1 D L^-T) L^T; bound via the smallest eigenvalue.
    let t = l.solve_lower_triangular(dx).expect("nonsingular Cholesky factor");
    let b = l.solve_lower_triangular(&t.transpose()).expect("nonsingular Cholesky factor");
    let lam = min_eig_sym(&b);
    if lam >= -1e-14 {
        f64::INFINITY
    } else {
        -1.0 / lam
    }
}

fn max_step_vec(v: &[f64], dv: &[f64]) -> f64 {
    v.iter()
        .zip(dv)
        .filter(|(_, &d)| d < 0.0)
        .map(|(&x, &d)| -x / d)
        .fold(f64::INFINITY, f64::min)
}

/// Componentwise dot; equals `tr(A B)` when `A` is symmetric.
fn dot(a: &Mat, b: &Mat) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}

pub(crate) fn solve(prob: &RealSdp, tol: &SdpTolerances) -> IpmOutcome {
    let n = prob.c.nrows();
    let m = prob.constraints.len();
    assert!(m > 0, "at least one constraint required for a bounded primal");

    // Normalize every bound to 1 so feasibility tolerances are relative.
    let g: Vec<Mat> = prob.constraints.iter().map(|(gi, bi)| gi.unscale(*bi)).collect();
    let c = &prob.c;

    // Interior starting point: X small enough that every slack starts at 1/2,
    // Z shifted past the objective so the dual slack cone is comfortably deep.
    let max_tr = g.iter().map(|gi| gi.trace()).fold(0.0f64, f64::max);
    assert!(max_tr > 0.0, "all constraint matrices are zero");
    let mut x = Mat::identity(n, n).scale(0.5 / max_tr);
    let mut z = Mat::identity(n, n).scale(1.0 + c.norm());
    let mut s: Vec<f64> = g.iter().map(|gi| 1.0 - dot(gi, &x)).collect();
    let mut y: Vec<f64> = vec![1.0; m];

    let nm = (n + m) as f64;
    let tau = 0.98;

    let mut best: Option<(f64, Mat, Vec<f64>, f64, f64, f64, f64)> = None;
    let mut iterations = 0;
    let mut converged = false;

    for iter in 0..tol.max_iter {
        iterations = iter;

        // Residuals and merit bookkeeping.
        let traces: Vec<f64> = g.iter().map(|gi| dot(gi, &x)).collect();
        let r_p: Vec<f64> = traces.iter().zip(&s).map(|(t, si)| 1.0 - t - si).collect();
        let mut a_star_y = Mat::zeros(n, n);
        for (gi, &yi) in g.iter().zip(&y) {
            a_star_y += gi.scale(yi);
        }
        let r_d = c - &a_star_y + &z;
        let mu = (dot(&x, &z) + s.iter().zip(&y).map(|(a, b)| a * b).sum::<f64>()) / nm;

        let pobj = dot(c, &x);
        let dobj: f64 = y.iter().sum();
        let prim_inf = r_p.iter().fold(0.0f64, |a, r| a.max(r.abs()));
        let dual_inf = r_d.norm() / (1.0 + c.norm());
        let gap_rel = (dobj - pobj).abs() / (1.0 + pobj.abs());

        let score = prim_inf.max(dual_inf).max(gap_rel);
        if best.as_ref().map_or(true, |b| score < b.0) {
            best = Some((score, x.clone(), y.clone(), pobj, dobj, prim_inf, dual_inf));
        }

        if prim_inf <= tol.feas_tol && dual_inf <= tol.feas_tol && gap_rel <= tol.gap_tol {
            converged = true;
            break;
        }

        let Some(chol_z) = z.clone().cholesky() else { break };
        let z_inv = chol_z.inverse();
        let Some(chol_x) = x.clone().cholesky() else { break };
        let lx = chol_x.l();

        // Schur complement M_ij = <G_i, Z^-1 G_j X> + diag(s/y), symmetric PD.
        let zgx: Vec<Mat> = g.iter().map(|gj| &z_inv * gj * &x).collect();
        let mut schur = Mat::zeros(m, m);
        for i in 0..m {
            for j in 0..m {
                schur[(i, j)] = dot(&g[i], &zgx[j]);
            }
        }
        let schur = sym(&schur) + Mat::from_diagonal(&nalgebra::DVector::from_iterator(m, s.iter().zip(&y).map(|(si, yi)| si / yi)));
        let Some(chol_m) = schur.clone().cholesky() else { break };

        let zrdx = &z_inv * &r_d * &x;
        let base_rhs: Vec<f64> = g.iter().map(|gi| dot(gi, &zrdx) - 1.0).collect();

        // Predictor (affine scaling) direction.
        let dy_aff = chol_m.solve(&nalgebra::DVector::from_vec(base_rhs.clone()));
        let mut dz_aff = -&r_d;
        for (gi, dyi) in g.iter().zip(dy_aff.iter()) {
            dz_aff += gi.scale(*dyi);
        }
        let dx_aff = sym(&(-&x - &z_inv * &dz_aff * &x));
        let ds_aff: Vec<f64> = (0..m).map(|i| -s[i] - s[i] / y[i] * dy_aff[i]).collect();

        let ap_aff = 1.0f64
            .min(tau * max_step_psd(&lx, &dx_aff))
            .min(tau * max_step_vec(&s, &ds_aff));
        let lz = chol_z.l();
        let ad_aff = 1.0f64
            .min(tau * max_step_psd(&lz, &dz_aff))
            .min(tau * max_step_vec(&y, dy_aff.as_slice()));

        // Mehrotra centering weight from the affine trial point.
        let x_trial = &x + dx_aff.scale(ap_aff);
        let z_trial = &z + dz_aff.scale(ad_aff);
        let mut comp_trial = dot(&x_trial, &z_trial);
        for i in 0..m {
            comp_trial += (s[i] + ap_aff * ds_aff[i]) * (y[i] + ad_aff * dy_aff[i]);
        }
        let sigma = ((comp_trial / nm) / mu).clamp(0.0, 1.0).powi(3);

        // Corrector direction.
        let corr_psd = Mat::identity(n, n).scale(sigma * mu) - &dz_aff * &dx_aff;
        let zcorr = &z_inv * &corr_psd;
        let rhs: Vec<f64> = (0..m)
            .map(|i| {
                base_rhs[i] + dot(&g[i], &zcorr) + (sigma * mu - ds_aff[i] * dy_aff[i]) / y[i]
            })
            .collect();
        let dy = chol_m.solve(&nalgebra::DVector::from_vec(rhs));
        let mut dz = -&r_d;
        for (gi, dyi) in g.iter().zip(dy.iter()) {
            dz += gi.scale(*dyi);
        }
        let dx = sym(&(&zcorr - &x - &z_inv * &dz * &x));
        let ds: Vec<f64> = (0..m)
            .map(|i| (sigma * mu - ds_aff[i] * dy_aff[i]) / y[i] - s[i] - s[i] / y[i] * dy[i])
            .collect();

        let ap = 1.0f64
            .min(tau * max_step_psd(&lx, &dx))
            .min(tau * max_step_vec(&s, &ds));
        let ad = 1.0f64
            .min(tau * max_step_psd(&lz, &dz))
            .min(tau * max_step_vec(&y, dy.as_slice()));

        x = sym(&(&x + dx.scale(ap)));
        z = sym(&(&z + dz.scale(ad)));
        for i in 0..m {
            s[i] += ap * ds[i];
            y[i] += ad * dy[i];
        }
    }

    let (bx, by, pobj, dobj, prim_inf, dual_inf) = if converged {
        let prim_inf = g
            .iter()
            .zip(&s)
            .map(|(gi, si)| (1.0 - dot(gi, &x) - si).abs())
            .fold(0.0f64, f64::max);
        let mut a_star_y = Mat::zeros(n, n);
        for (gi, &yi) in g.iter().zip(&y) {
            a_star_y += gi.scale(yi);
        }
        let dual_inf = (c - a_star_y + &z).norm() / (1.0 + c.norm());
        let pobj = dot(c, &x);
        let dobj: f64 = y.iter().sum();
        (x, y, pobj, dobj, prim_inf, dual_inf)
    } else {
        let (_, bx, by, pobj, dobj, prim_inf, dual_inf) =
            best.expect("at least one iterate recorded");
        (bx, by, pobj, dobj, prim_inf, dual_inf)
    };

    // Map multipliers back to the caller's (un-normalized) bounds.
    let y_out: Vec<f64> = by
        .iter()
        .zip(prob.constraints.iter())
        .map(|(yi, (_, bi))| yi / bi)
        .collect();

    IpmOutcome {
        x: bx,
        y: y_out,
        primal_value: pobj,
        dual_value: dobj,
        iterations: iterations + 1,
        converged,
        primal_infeas: prim_inf,
        dual_infeas: dual_inf,
    }
}
