//! Rayleigh MIMO network sampling.
//!
//! Samples channel matrices, path-loss gains, and the primary links' own
//! transmit/receive beamformers, producing [`NetworkRealization`]s that feed
//! both the optimizer and the Monte Carlo oracles. Everything is a pure
//! function of `(setup, stream)`, so realizations can be drawn concurrently
//! from partitioned substreams.

use nalgebra::Complex;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{hermitize, ident, lex_dominant, phase_normalize, CMat, CVec};
use crate::rng::SeededStream;

/// Relative tolerance below which the top two singular values count as tied.
pub const SV_TIE_TOL: f64 = 1e-12;

/// Linear receive filter deployed by a primary receiver.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReceiverKind {
    /// Matched filter: identity weight matrix.
    Mf,
    /// Zero forcing: projector onto the complement of the interference span.
    Zf,
    /// Minimum mean squared error: inverse of interference-plus-noise covariance.
    Mmse,
}

/// Inter-node distances in meters plus the path-loss exponent.
///
/// `d_kj[k][j]` is the distance from primary transmitter `j` to primary
/// receiver `k`; the diagonal holds each primary link's own length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkGeometry {
    pub d_ss: f64,
    pub d_ks: Vec<f64>,
    pub d_sk: Vec<f64>,
    pub d_kj: Vec<Vec<f64>>,
    pub path_loss_exponent: f64,
}

impl LinkGeometry {
    pub fn validate(&self, k: usize) -> Result<()> {
        if self.path_loss_exponent <= 0.0 {
            return Err(Error::InvalidGeometry("path-loss exponent must be > 0".into()));
        }
        if self.d_ks.len() != k || self.d_sk.len() != k || self.d_kj.len() != k {
            return Err(Error::InvalidGeometry(format!(
                "distance vectors must have one entry per primary link (K = {k})"
            )));
        }
        let all = std::iter::once(self.d_ss)
            .chain(self.d_ks.iter().cloned())
            .chain(self.d_sk.iter().cloned())
            .chain(self.d_kj.iter().flat_map(|row| row.iter().cloned()));
        for d in all {
            if !(d > 0.0) {
                return Err(Error::InvalidGeometry(format!("non-positive distance {d}")));
            }
        }
        if self.d_kj.iter().any(|row| row.len() != k) {
            return Err(Error::InvalidGeometry("d_kj must be a K-by-K matrix".into()));
        }
        Ok(())
    }
}

/// Static description of one primary link.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrimaryConfig {
    pub m_k: usize,
    pub n_k: usize,
    pub p_k: f64,
    pub receiver: ReceiverKind,
}

/// Everything needed to sample a network: antenna counts, powers, geometry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkSetup {
    pub m_s: usize,
    pub n_s: usize,
    pub p_s_max: f64,
    pub n0: f64,
    pub primaries: Vec<PrimaryConfig>,
    pub geometry: LinkGeometry,
}

impl NetworkSetup {
    pub fn validate(&self) -> Result<()> {
        if self.m_s < 1 || self.n_s < 1 {
            return Err(Error::InvalidConfig("secondary antenna counts must be >= 1".into()));
        }
        if !(self.p_s_max > 0.0) || !(self.n0 > 0.0) {
            return Err(Error::InvalidConfig("P_S,max and N0 must be > 0".into()));
        }
        for (k, p) in self.primaries.iter().enumerate() {
            if p.m_k < 1 || p.n_k < 1 {
                return Err(Error::InvalidConfig(format!("primary link {k}: antenna counts must be >= 1")));
            }
            if !(p.p_k > 0.0) {
                return Err(Error::InvalidConfig(format!("primary link {k}: power must be > 0")));
            }
        }
        self.geometry.validate(self.primaries.len())
    }
}

/// One sampled primary link: its own channel and the beamformers it deploys.
#[derive(Debug, Clone)]
pub struct PrimaryLink {
    pub m_k: usize,
    pub n_k: usize,
    pub p_k: f64,
    pub receiver: ReceiverKind,
    pub h_kk: CMat,
    pub t_k: CVec,
    pub r_k: CVec,
    /// Set when the transmit beamformer hit a (near-)degenerate top singular
    /// value and the deterministic tie-break was applied.
    pub sv_tie: bool,
}

/// Secondary link draw.
#[derive(Debug, Clone)]
pub struct SecondaryLink {
    pub m_s: usize,
    pub n_s: usize,
    pub p_s_max: f64,
    pub h_ss: CMat,
}

/// Channels that couple distinct links. `h_kj[k][j]` (j != k) is the channel
/// from primary transmitter j to primary receiver k; diagonal slots are empty
/// placeholders (the own-link channel lives in [`PrimaryLink::h_kk`]).
#[derive(Debug, Clone)]
pub struct CrossChannels {
    pub h_ks: Vec<CMat>,
    pub h_sk: Vec<CMat>,
    pub h_kj: Vec<Vec<CMat>>,
}

/// Linear path-loss gains matching [`LinkGeometry`].
#[derive(Debug, Clone, PartialEq)]
pub struct Gains {
    pub alpha_ss: f64,
    pub alpha_ks: Vec<f64>,
    pub alpha_sk: Vec<f64>,
    pub alpha_kj: Vec<Vec<f64>>,
}

/// One sampled draw of the whole network.
#[derive(Debug, Clone)]
pub struct NetworkRealization {
    pub secondary: SecondaryLink,
    pub primaries: Vec<PrimaryLink>,
    pub cross: CrossChannels,
    pub gains: Gains,
    pub n0: f64,
}

impl NetworkRealization {
    /// Number of primary links.
    pub fn k(&self) -> usize {
        self.primaries.len()
    }

    /// Channel from primary transmitter `j` to primary receiver `k`.
    pub fn h_primary(&self, k: usize, j: usize) -> &CMat {
        if k == j {
            &self.primaries[k].h_kk
        } else {
            &self.cross.h_kj[k][j]
        }
    }

    /// Effective interference-bearing columns observed by primary receiver
    /// `k`: column j is `sqrt(alpha_kj) H_kj t_j`.
    pub fn hhat_matrix(&self, k: usize) -> CMat {
        let n_k = self.primaries[k].n_k;
        let cols: Vec<CVec> = (0..self.k())
            .map(|j| {
                let col = self.h_primary(k, j) * &self.primaries[j].t_k;
                col.scale(self.gains.alpha_kj[k][j].sqrt())
            })
            .collect();
        CMat::from_fn(n_k, self.k(), |r, c| cols[c][r])
    }

    /// Draws a fresh receive beamformer for primary link `k`, resampling the
    /// primary-side channels it depends on (all own links and the k-th cross
    /// row) but leaving the rest of the realization untouched. This is the
    /// sampling primitive behind the outage and isotropy oracles.
    pub fn resample_receiver<R: Rng>(&self, k: usize, rng: &mut R) -> Result<CVec> {
        let n_k = self.primaries[k].n_k;
        let kk = self.k();
        let mut hhat = CMat::zeros(n_k, kk);
        for j in 0..kk {
            let pj = &self.primaries[j];
            let h_jj = sample_gaussian_matrix(rng, pj.n_k, pj.m_k);
            let (t_j, _) = primary_tx_beamformer(&h_jj, pj.p_k)?;
            let h_kj = if j == k { h_jj } else { sample_gaussian_matrix(rng, n_k, pj.m_k) };
            let col = (h_kj * t_j).scale(self.gains.alpha_kj[k][j].sqrt());
            hhat.column_mut(j).copy_from(&col);
        }
        let minus_k = drop_column(&hhat, k);
        let w = receiver_weight_matrix(self.primaries[k].receiver, &minus_k, self.n0)?;
        primary_rx_beamformer(&w, &hhat.column(k).into_owned(), k)
    }
}

/// Matrix with i.i.d. standard complex Gaussian entries (unit complex
/// variance: real and imaginary parts each N(0, 1/2)).
pub fn sample_gaussian_matrix<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> CMat {
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    CMat::from_fn(rows, cols, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        Complex::new(re * scale, im * scale)
    })
}

/// Unit vector uniform on the complex unit sphere: a standard complex
/// Gaussian draw, renormalized. Resamples on the measure-zero all-zero draw.
pub fn normalized_gaussian_vector<R: Rng>(rng: &mut R, n: usize) -> CVec {
    loop {
        let z = sample_gaussian_matrix(rng, n, 1).column(0).into_owned();
        let norm = z.norm();
        if norm > 1e-150 {
            return z.unscale(norm);
        }
    }
}

/// Linear power-law gain `distance^(-exponent)`.
pub fn path_loss_gain(distance: f64, exponent: f64) -> Result<f64> {
    if !(distance > 0.0) {
        return Err(Error::InvalidGeometry(format!("distance must be > 0, got {distance}")));
    }
    Ok(distance.powf(-exponent))
}

/// Transmit beamformer along the dominant right singular vector, scaled to
/// power `p_k`. Returns the vector and whether the singular-value tie-break
/// fired.
pub fn primary_tx_beamformer(h_kk: &CMat, p_k: f64) -> Result<(CVec, bool)> {
    if h_kk.norm() == 0.0 {
        return Err(Error::Singular {
            context: "transmit beamformer".into(),
            detail: "zero channel matrix".into(),
        });
    }
    let svd = h_kk.clone().svd(false, true);
    let v_t = svd.v_t.as_ref().expect("requested V^H");
    let sv = &svd.singular_values;
    // Singular values come back sorted in decreasing order; gather every
    // direction tied with the top one.
    let top = sv[0];
    let tied: Vec<CVec> = (0..sv.len())
        .take_while(|&i| top - sv[i] <= SV_TIE_TOL * top.max(1.0))
        .map(|i| phase_normalize(&v_t.row(i).adjoint()))
        .collect();
    let tie = tied.len() > 1;
    let mut best = tied[0].clone();
    for cand in tied.iter().skip(1) {
        if lex_dominant(cand, &best) {
            best = cand.clone();
        }
    }
    Ok((best.scale(p_k.sqrt()), tie))
}

/// Receive weight matrix for one primary link given the interference columns
/// `hhat_minus_k`. With no interferers (zero columns) every kind degrades to
/// the matched filter `W = I`.
pub fn receiver_weight_matrix(kind: ReceiverKind, hhat_minus_k: &CMat, n0: f64) -> Result<CMat> {
    let n = hhat_minus_k.nrows();
    if hhat_minus_k.ncols() == 0 {
        return Ok(ident(n));
    }
    match kind {
        ReceiverKind::Mf => Ok(ident(n)),
        ReceiverKind::Zf => {
            let gram = hhat_minus_k.adjoint() * hhat_minus_k;
            let rank_deficient = crate::linalg::min_eigenvalue(&gram) <= 1e-12 * gram.norm();
            let chol = (!rank_deficient)
                .then(|| gram.clone().cholesky())
                .flatten()
                .ok_or_else(|| Error::Singular {
                    context: "zero-forcing Gram matrix".into(),
                    detail: "interference columns are rank deficient".into(),
                })?;
            let solved = chol.solve(&hhat_minus_k.adjoint());
            Ok(hermitize(&(ident(n) - hhat_minus_k * solved)))
        }
        ReceiverKind::Mmse => {
            let cov = hhat_minus_k * hhat_minus_k.adjoint() + ident(n).scale(n0);
            let chol = cov.clone().cholesky().ok_or_else(|| Error::Singular {
                context: "MMSE covariance".into(),
                detail: "covariance not positive definite".into(),
            })?;
            Ok(hermitize(&chol.inverse()))
        }
    }
}

/// Unit-norm receive beamformer `W hhat_k / ||W hhat_k||`.
pub fn primary_rx_beamformer(w: &CMat, hhat_k: &CVec, link: usize) -> Result<CVec> {
    let v = w * hhat_k;
    let norm = v.norm();
    if norm < 1e-14 {
        return Err(Error::DegenerateReceiver { link });
    }
    Ok(v.unscale(norm))
}

fn drop_column(m: &CMat, k: usize) -> CMat {
    m.clone().remove_column(k)
}

fn gains_from_geometry(geom: &LinkGeometry, k: usize) -> Result<Gains> {
    let exp = geom.path_loss_exponent;
    Ok(Gains {
        alpha_ss: path_loss_gain(geom.d_ss, exp)?,
        alpha_ks: geom.d_ks.iter().map(|&d| path_loss_gain(d, exp)).collect::<Result<_>>()?,
        alpha_sk: geom.d_sk.iter().map(|&d| path_loss_gain(d, exp)).collect::<Result<_>>()?,
        alpha_kj: (0..k)
            .map(|i| geom.d_kj[i].iter().map(|&d| path_loss_gain(d, exp)).collect::<Result<_>>())
            .collect::<Result<_>>()?,
    })
}

/// Samples a full network realization from one stream.
///
/// Channels are drawn in a fixed order (secondary link, own primary links,
/// cross links), then the primary beamformers are computed, so the result is
/// a pure function of `(setup, stream)`.
pub fn realize_network(setup: &NetworkSetup, stream: &SeededStream) -> Result<NetworkRealization> {
    setup.validate()?;
    let k = setup.primaries.len();
    let mut rng = stream.rng();

    let h_ss = sample_gaussian_matrix(&mut rng, setup.n_s, setup.m_s);
    let h_kk: Vec<CMat> = setup
        .primaries
        .iter()
        .map(|p| sample_gaussian_matrix(&mut rng, p.n_k, p.m_k))
        .collect();
    let h_ks: Vec<CMat> = setup
        .primaries
        .iter()
        .map(|p| sample_gaussian_matrix(&mut rng, p.n_k, setup.m_s))
        .collect();
    let h_sk: Vec<CMat> = setup
        .primaries
        .iter()
        .map(|p| sample_gaussian_matrix(&mut rng, setup.n_s, p.m_k))
        .collect();
    let h_kj: Vec<Vec<CMat>> = (0..k)
        .map(|i| {
            (0..k)
                .map(|j| {
                    if i == j {
                        CMat::zeros(0, 0)
                    } else {
                        sample_gaussian_matrix(&mut rng, setup.primaries[i].n_k, setup.primaries[j].m_k)
                    }
                })
                .collect()
        })
        .collect();

    let gains = gains_from_geometry(&setup.geometry, k)?;

    let mut tx: Vec<(CVec, bool)> = Vec::with_capacity(k);
    for (i, p) in setup.primaries.iter().enumerate() {
        let pair = primary_tx_beamformer(&h_kk[i], p.p_k)
            .map_err(|e| Error::Singular { context: format!("primary link {i}"), detail: e.to_string() })?;
        tx.push(pair);
    }

    let mut primaries = Vec::with_capacity(k);
    for (i, p) in setup.primaries.iter().enumerate() {
        // Interference-bearing columns at receiver i.
        let mut hhat = CMat::zeros(p.n_k, k);
        for j in 0..k {
            let h = if i == j { &h_kk[i] } else { &h_kj[i][j] };
            let col = (h * &tx[j].0).scale(gains.alpha_kj[i][j].sqrt());
            hhat.column_mut(j).copy_from(&col);
        }
        let w = receiver_weight_matrix(p.receiver, &drop_column(&hhat, i), setup.n0)
            .map_err(|e| Error::Singular { context: format!("primary link {i}"), detail: e.to_string() })?;
        let r_k = primary_rx_beamformer(&w, &hhat.column(i).into_owned(), i)?;
        primaries.push(PrimaryLink {
            m_k: p.m_k,
            n_k: p.n_k,
            p_k: p.p_k,
            receiver: p.receiver,
            h_kk: h_kk[i].clone(),
            t_k: tx[i].0.clone(),
            r_k,
            sv_tie: tx[i].1,
        });
    }

    Ok(NetworkRealization {
        secondary: SecondaryLink {
            m_s: setup.m_s,
            n_s: setup.n_s,
            p_s_max: setup.p_s_max,
            h_ss,
        },
        primaries,
        cross: CrossChannels { h_ks, h_sk, h_kj },
        gains,
        n0: setup.n0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::preset;
    use approx::assert_relative_eq;
    use nalgebra::Complex;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    fn test_rng(seed: u64) -> rand_chacha::ChaCha12Rng {
        SeededStream::new(seed, 0).rng()
    }

    #[test]
    fn gaussian_entries_have_unit_complex_variance() {
        let mut rng = test_rng(42);
        let n = 100_000;
        let mut acc = 0.0;
        for _ in 0..n / 4 {
            let m = sample_gaussian_matrix(&mut rng, 2, 2);
            acc += m.iter().map(|z| z.norm_sqr()).sum::<f64>();
        }
        let mean = acc / n as f64;
        assert!((0.99..=1.01).contains(&mean), "mean |entry|^2 = {mean}");
    }

    #[test]
    fn gaussian_sampling_is_deterministic() {
        let stream = SeededStream::new(7, 3);
        let a = sample_gaussian_matrix(&mut stream.rng(), 3, 4);
        let b = sample_gaussian_matrix(&mut stream.rng(), 3, 4);
        assert_eq!(a, b);
    }

    #[test]
    fn normalized_vector_is_unit_and_isotropic_in_first_coord() {
        let mut rng = test_rng(5);
        // n = 1: unit modulus scalar.
        let v1 = normalized_gaussian_vector(&mut rng, 1);
        assert_relative_eq!(v1[0].norm(), 1.0, epsilon = 1e-14);
        // any n: exactly unit norm.
        for n in [2, 4, 7] {
            let v = normalized_gaussian_vector(&mut rng, n);
            assert!((v.norm_squared() - 1.0).abs() < 1e-14);
        }
        // |first coordinate|^2 has mean 1/4 for n = 4 (Beta(1,3) law).
        let draws = 100_000;
        let mut acc = 0.0;
        for _ in 0..draws {
            acc += normalized_gaussian_vector(&mut rng, 4)[0].norm_sqr();
        }
        let mean = acc / draws as f64;
        // Var of Beta(1,3) is 3/80; allow 3 standard errors.
        let se = (0.0375f64 / draws as f64).sqrt();
        assert!((mean - 0.25).abs() < 3.0 * se, "mean = {mean}");
    }

    #[test]
    fn path_loss_examples() {
        assert_relative_eq!(path_loss_gain(1.0, 4.0).unwrap(), 1.0);
        assert_relative_eq!(path_loss_gain(10.0, 4.0).unwrap(), 1e-4);
        assert_relative_eq!(path_loss_gain(13.0, 4.0).unwrap(), 13.0f64.powi(-4), epsilon = 1e-15);
        assert!(path_loss_gain(0.0, 4.0).is_err());
        assert!(path_loss_gain(-2.0, 4.0).is_err());
    }

    #[test]
    fn tx_beamformer_diagonal_and_tied_cases() {
        let h = CMat::from_diagonal(&CVec::from_vec(vec![c(2.0, 0.0), c(1.0, 0.0)]));
        let (t, tie) = primary_tx_beamformer(&h, 1.0).unwrap();
        assert!(!tie);
        assert_relative_eq!(t[0].re, 1.0, epsilon = 1e-12);
        assert!(t[1].norm() < 1e-12);

        let (t, tie) = primary_tx_beamformer(&ident(2), 4.0).unwrap();
        assert!(tie);
        assert_relative_eq!(t[0].re, 2.0, epsilon = 1e-12);
        assert!(t[1].norm() < 1e-12);
        assert_relative_eq!(t.norm_squared(), 4.0, epsilon = 1e-12);
    }

    #[test]
    fn tx_beamformer_achieves_top_singular_value() {
        let mut rng = test_rng(11);
        for _ in 0..20 {
            let h = sample_gaussian_matrix(&mut rng, 4, 4);
            let (t, _) = primary_tx_beamformer(&h, 1.0).unwrap();
            let sigma_max = h.clone().svd(false, false).singular_values[0];
            assert_relative_eq!((&h * &t).norm() / t.norm(), sigma_max, epsilon = 1e-10);
        }
    }

    #[test]
    fn weight_matrix_mf_zf_mmse() {
        let mut rng = test_rng(3);
        let hhat = sample_gaussian_matrix(&mut rng, 4, 1);
        assert_eq!(receiver_weight_matrix(ReceiverKind::Mf, &hhat, 1.0).unwrap(), ident(4));

        let w = receiver_weight_matrix(ReceiverKind::Zf, &hhat, 1.0).unwrap();
        let col = hhat.column(0).into_owned();
        assert!((&w * &col).norm() < 1e-10, "ZF must annihilate the interference column");
        assert!((&w * &w - &w).norm() < 1e-10, "ZF weight must be a projector");

        let w = receiver_weight_matrix(ReceiverKind::Mmse, &CMat::zeros(3, 2), 0.5).unwrap();
        assert!((&w - ident(3).scale(2.0)).norm() < 1e-12);

        // No interferers: everything degrades to the matched filter.
        for kind in [ReceiverKind::Mf, ReceiverKind::Zf, ReceiverKind::Mmse] {
            assert_eq!(receiver_weight_matrix(kind, &CMat::zeros(4, 0), 1.0).unwrap(), ident(4));
        }
    }

    #[test]
    fn zf_rank_deficient_gram_is_an_error() {
        let col = CVec::from_vec(vec![c(1.0, 0.0), c(0.0, 1.0)]);
        let hhat = CMat::from_columns(&[col.clone(), col.scale(2.0)]);
        assert!(matches!(
            receiver_weight_matrix(ReceiverKind::Zf, &hhat, 1.0),
            Err(Error::Singular { .. })
        ));
    }

    #[test]
    fn rx_beamformer_normalizes_and_detects_degeneracy() {
        let h = CVec::from_vec(vec![c(3.0, 0.0), c(4.0, 0.0)]);
        let r = primary_rx_beamformer(&ident(2), &h, 0).unwrap();
        assert_relative_eq!(r[0].re, 0.6, epsilon = 1e-12);
        assert_relative_eq!(r[1].re, 0.8, epsilon = 1e-12);

        // Projector orthogonal to the desired column.
        let e1 = CVec::from_vec(vec![c(1.0, 0.0), c(0.0, 0.0)]);
        let proj = ident(2) - &e1 * e1.adjoint();
        assert!(matches!(
            primary_rx_beamformer(&proj, &e1, 5),
            Err(Error::DegenerateReceiver { link: 5 })
        ));
    }

    #[test]
    fn realize_network_no_primaries() {
        let setup = NetworkSetup {
            m_s: 3,
            n_s: 2,
            p_s_max: 1.0,
            n0: 1.0,
            primaries: vec![],
            geometry: LinkGeometry {
                d_ss: 10.0,
                d_ks: vec![],
                d_sk: vec![],
                d_kj: vec![],
                path_loss_exponent: 4.0,
            },
        };
        let rz = realize_network(&setup, &SeededStream::new(1, 0)).unwrap();
        assert_eq!(rz.k(), 0);
        assert_eq!(rz.secondary.h_ss.shape(), (2, 3));
    }

    #[test]
    fn paper_preset_dimensions_and_gains() {
        let setup = preset("k2_paper").unwrap().setup_for_tests();
        let rz = realize_network(&setup, &SeededStream::new(42, 0)).unwrap();
        assert_eq!(rz.k(), 2);
        assert_eq!(rz.secondary.h_ss.shape(), (4, 4));
        for p in &rz.primaries {
            assert_eq!(p.h_kk.shape(), (4, 4));
            assert_relative_eq!(p.r_k.norm_squared(), 1.0, epsilon = 1e-12);
            assert_relative_eq!(p.t_k.norm_squared(), p.p_k, epsilon = 1e-10 * p.p_k);
        }
        assert_relative_eq!(rz.gains.alpha_ks[0], 15.0f64.powi(-4), epsilon = 1e-15);
        assert_relative_eq!(rz.gains.alpha_ks[1], 13.0f64.powi(-4), epsilon = 1e-15);
        assert_relative_eq!(rz.gains.alpha_sk[0], 12.4f64.powi(-4), epsilon = 1e-15);
        assert_relative_eq!(rz.gains.alpha_sk[1], 12.7f64.powi(-4), epsilon = 1e-15);
    }

    #[test]
    fn realizations_are_deterministic() {
        let setup = preset("k2_paper").unwrap().setup_for_tests();
        let s = SeededStream::new(9, 1);
        let a = realize_network(&setup, &s).unwrap();
        let b = realize_network(&setup, &s).unwrap();
        assert_eq!(a.secondary.h_ss, b.secondary.h_ss);
        assert_eq!(a.primaries[0].r_k, b.primaries[0].r_k);
        assert_eq!(a.cross.h_ks[1], b.cross.h_ks[1]);
    }

    #[test]
    fn zf_receiver_cancels_intra_primary_interference() {
        let mut setup = preset("k4_paper").unwrap().setup_for_tests();
        for p in &mut setup.primaries {
            p.receiver = ReceiverKind::Zf;
        }
        let rz = realize_network(&setup, &SeededStream::new(17, 0)).unwrap();
        for k in 0..rz.k() {
            let hhat = rz.hhat_matrix(k);
            let scale = hhat.norm();
            for j in 0..rz.k() {
                if j != k {
                    let leak = (rz.primaries[k].r_k.adjoint() * hhat.column(j))[(0, 0)].norm();
                    assert!(leak < 1e-8 * scale.max(1.0), "link {k} leaks from {j}: {leak}");
                }
            }
        }
    }

    #[test]
    fn resampled_receivers_are_unit_norm_and_vary() {
        let setup = preset("k2_paper").unwrap().setup_for_tests();
        let rz = realize_network(&setup, &SeededStream::new(4, 0)).unwrap();
        let mut rng = test_rng(100);
        let a = rz.resample_receiver(0, &mut rng).unwrap();
        let b = rz.resample_receiver(0, &mut rng).unwrap();
        assert_relative_eq!(a.norm_squared(), 1.0, epsilon = 1e-12);
        assert!((a - b).norm() > 1e-3);
    }
}
