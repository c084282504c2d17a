//! Complex-to-real embedding of Hermitian matrix problems.
//!
//! A Hermitian `m x m` matrix maps to the real symmetric `2m x 2m` matrix
//! `[[Re M, -Im M], [Im M, Re M]]`. The map preserves positive
//! semidefiniteness in both directions, duplicates the spectrum, and doubles
//! trace inner products: `tr(emb(M) emb(N)) = 2 tr(M N)`.

use nalgebra::Complex;

use crate::error::{Error, Result};
use crate::linalg::{hermitize, is_hermitian, CMat, RMat};

/// Embeds a Hermitian matrix as a real symmetric matrix.
pub fn embed_complex_to_real(m: &CMat) -> Result<RMat> {
    if !is_hermitian(m, 1e-12) {
        return Err(Error::InvalidInstance(
            "embedding requires a Hermitian matrix".into(),
        ));
    }
    let m = hermitize(m);
    let n = m.nrows();
    let mut out = RMat::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            let z = m[(i, j)];
            out[(i, j)] = z.re;
            out[(i + n, j + n)] = z.re;
            out[(i, j + n)] = -z.im;
            out[(i + n, j)] = z.im;
        }
    }
    Ok(out)
}

/// Inverse of the embedding, averaged so that any symmetric PSD input maps to
/// a Hermitian PSD matrix with half its trace inner products.
pub fn extract_complex_solution(x_r: &RMat) -> CMat {
    let n2 = x_r.nrows();
    debug_assert!(n2 % 2 == 0, "embedded matrix must have even dimension");
    let n = n2 / 2;
    let mut out = CMat::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let re = 0.5 * (x_r[(i, j)] + x_r[(i + n, j + n)]);
            let im = 0.5 * (x_r[(i + n, j)] - x_r[(i, j + n)]);
            out[(i, j)] = Complex::new(re, im);
        }
    }
    hermitize(&out)
}
