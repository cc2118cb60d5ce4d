//! Second-order statistics of `u = |Ψs|² + η` written out term by term for
//! iid symbols whose law is symmetric about its mean.
//!
//! These are kept deliberately close to the textbook expansion (including the
//! `−μ_u μ_uᵀ` subtraction) so they can be checked independently of the
//! factored form in [`super::OperatorGram`].

use nalgebra::{DMatrix, DVector};

use super::OutputStats;
use crate::channel::ConvOperator;

/// `c = 2σ²μ · Re{(Ψ e_{M′}) ∘ w*}`
pub fn cross_covariance(op: &ConvOperator, mu_s: f64, sigma_s2: f64) -> DVector<f64> {
    let psi = op.matrix();
    let w = op.gram().w();
    let col = psi.column(op.target_col());
    DVector::from_fn(op.k(), |i, _| {
        2.0 * sigma_s2 * mu_s * (col[i] * w[i].conj()).re
    })
}

/// `μ_u = σ²·diag(ΨΨᴴ) + μ²·|w|∘²`
pub fn output_mean(op: &ConvOperator, mu_s: f64, sigma_s2: f64) -> DVector<f64> {
    let psi = op.matrix();
    let gram = psi * psi.adjoint();
    let w = op.gram().w();
    DVector::from_fn(op.k(), |i, _| {
        sigma_s2 * gram[(i, i)].re + mu_s * mu_s * w[i].norm_sqr()
    })
}

/// Full covariance expansion; `mu4` is the fourth central moment.
pub fn output_covariance(
    op: &ConvOperator,
    mu_s: f64,
    sigma_s2: f64,
    mu4: f64,
    sigma_eta2: f64,
) -> DMatrix<f64> {
    let psi = op.matrix();
    let k = op.k();
    let a2 = psi.map(|x| x.norm_sqr());
    let w = op.gram().w();
    let w2 = w.map(|x| x.norm_sqr());
    let z = DVector::from_fn(k, |i, _| a2.row(i).sum());
    let pph = psi * psi.adjoint();
    let ppt = psi * psi.transpose();
    let s2 = sigma_s2;
    let s4 = s2 * s2;
    let m2 = mu_s * mu_s;

    let kurt = &a2 * a2.transpose() * (mu4 - 3.0 * s4);
    let quad = (&z * z.transpose()
        + pph.map(|x| x.norm_sqr())
        + ppt.map(|x| x.norm_sqr()))
        * s4;
    let cross = DMatrix::from_fn(k, k, |i, j| {
        let t1 = z[i] * w2[j] + w2[i] * z[j];
        let t2 = 2.0 * (w[i].conj() * ppt[(i, j)] * w[j].conj()).re;
        let t3 = 2.0 * (w[i].conj() * pph[(i, j)] * w[j]).re;
        t1 + t2 + t3
    }) * (s2 * m2);
    let mean_sq = &w2 * w2.transpose() * (m2 * m2);
    let mu_u = output_mean(op, mu_s, sigma_s2);
    let mut c = kurt + quad + cross + mean_sq - &mu_u * mu_u.transpose();
    for i in 0..k {
        c[(i, i)] += sigma_eta2;
    }
    c
}

/// Bundles the three closed-form statistics.
pub fn output_stats(
    op: &ConvOperator,
    mu_s: f64,
    sigma_s2: f64,
    mu4: f64,
    sigma_eta2: f64,
) -> OutputStats {
    OutputStats {
        c_su: cross_covariance(op, mu_s, sigma_s2),
        mu_u: output_mean(op, mu_s, sigma_s2),
        c_uu: output_covariance(op, mu_s, sigma_s2, mu4, sigma_eta2),
        w: op.gram().w().clone(),
        z: op.gram().z().clone(),
        sigma_eta2,
    }
}
