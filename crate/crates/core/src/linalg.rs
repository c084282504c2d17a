//! Dense complex linear-algebra helpers shared across the crate.
//!
//! Everything here operates on small Hermitian matrices (dimensions at most
//! a few antennas), so clarity beats asymptotics throughout.

use nalgebra::{Complex, DMatrix, DVector};

pub type CMat = DMatrix<Complex<f64>>;
pub type CVec = DVector<Complex<f64>>;
pub type RMat = DMatrix<f64>;
pub type RVec = DVector<f64>;

/// Hermitian symmetrization `(M + M^H)/2`, applied after every matrix
/// construction to suppress round-off asymmetry.
pub fn hermitize(m: &CMat) -> CMat {
    (m + m.adjoint()).scale(0.5)
}

/// Frobenius distance to the Hermitian part, relative to `1 + ||M||`.
pub fn hermitian_defect(m: &CMat) -> f64 {
    (m - m.adjoint()).norm() / (1.0 + m.norm())
}

pub fn is_hermitian(m: &CMat, tol: f64) -> bool {
    m.is_square() && hermitian_defect(m) <= tol
}

/// Real quadratic form `v^H M v` of a Hermitian matrix.
pub fn quad_form(m: &CMat, v: &CVec) -> f64 {
    (v.adjoint() * m * v)[(0, 0)].re
}

/// Real inner product `tr(A B)` of two Hermitian matrices.
pub fn inner(a: &CMat, b: &CMat) -> f64 {
    (a * b).trace().re
}

/// Fixes the global phase so the largest-magnitude entry is real-positive.
/// Eigenvectors and singular vectors are only defined up to phase; pinning it
/// keeps sampling and extraction deterministic. Ties on magnitude go to the
/// lowest index.
pub fn phase_normalize(v: &CVec) -> CVec {
    let mut idx = 0;
    let mut best = 0.0f64;
    for (i, z) in v.iter().enumerate() {
        let a = z.norm_sqr();
        if a > best {
            best = a;
            idx = i;
        }
    }
    if best == 0.0 {
        return v.clone();
    }
    let pivot = v[idx];
    let phase = pivot.conj() / pivot.norm();
    v * Complex::new(phase.re, phase.im)
}

/// Eigendecomposition of a Hermitian matrix with eigenvalues sorted in
/// decreasing order. Returns `(eigenvalues, eigenvectors)` with phase-fixed,
/// unit-norm eigenvectors.
pub fn hermitian_eigen_desc(m: &CMat) -> (RVec, Vec<CVec>) {
    let se = hermitize(m).symmetric_eigen();
    let n = se.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| se.eigenvalues[j].partial_cmp(&se.eigenvalues[i]).unwrap());
    let vals = RVec::from_iterator(n, order.iter().map(|&i| se.eigenvalues[i]));
    let vecs = order
        .iter()
        .map(|&i| phase_normalize(&se.eigenvectors.column(i).into_owned()))
        .collect();
    (vals, vecs)
}

/// Largest eigenvalue and a matching unit eigenvector. On (near-)degenerate
/// top eigenvalues the tie is broken deterministically by taking the
/// lexicographically dominant phase-normalized eigenvector.
pub fn top_eigenpair(m: &CMat) -> (f64, CVec) {
    let (vals, vecs) = hermitian_eigen_desc(m);
    let top = vals[0];
    let tol = 1e-12 * (1.0 + top.abs());
    let mut best = vecs[0].clone();
    for (v, vec) in vals.iter().zip(vecs.iter()).skip(1) {
        if top - *v > tol {
            break;
        }
        if lex_dominant(vec, &best) {
            best = vec.clone();
        }
    }
    (top, best)
}

/// `true` if `a` precedes `b` in the deterministic tie-break order: compare
/// entries front to back by real then imaginary part, larger first.
pub fn lex_dominant(a: &CVec, b: &CVec) -> bool {
    for (x, y) in a.iter().zip(b.iter()) {
        for (p, q) in [(x.re, y.re), (x.im, y.im)] {
            if (p - q).abs() > 1e-12 {
                return p > q;
            }
        }
    }
    false
}

/// Projects a Hermitian matrix onto the PSD cone by clipping negative
/// eigenvalues, returning the projection and the Frobenius distance moved.
pub fn psd_project(m: &CMat) -> (CMat, f64) {
    let se = hermitize(m).symmetric_eigen();
    let clipped = se.eigenvalues.map(|v| v.max(0.0));
    let dist = se
        .eigenvalues
        .iter()
        .map(|v| v.min(0.0).powi(2))
        .sum::<f64>()
        .sqrt();
    let d = CMat::from_diagonal(&clipped.map(|v| Complex::new(v, 0.0)));
    let proj = &se.eigenvectors * d * se.eigenvectors.adjoint();
    (hermitize(&proj), dist)
}

/// Smallest eigenvalue of a Hermitian matrix.
pub fn min_eigenvalue(m: &CMat) -> f64 {
    let se = hermitize(m).symmetric_eigen();
    se.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min)
}

/// Numerical rank at threshold `tol_rel * lambda_max` for a PSD matrix.
pub fn psd_rank(m: &CMat, tol_rel: f64) -> usize {
    let se = hermitize(m).symmetric_eigen();
    let top = se.eigenvalues.iter().cloned().fold(0.0f64, f64::max);
    if top <= 0.0 {
        return 0;
    }
    se.eigenvalues.iter().filter(|&&v| v >= tol_rel * top).count()
}

/// Identity matrix shorthand.
pub fn ident(n: usize) -> CMat {
    CMat::identity(n, n)
}
