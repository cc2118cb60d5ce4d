use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::OutputStats;
use crate::constellation::SymbolLaw;

/// Which function of the transmitted symbol the filter estimates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Target {
    /// The field amplitude `s` itself.
    Amplitude,
    /// Its square `s²`, i.e. the intensity symbol before predistortion.
    Intensity,
}

/// Products of `Ψ` that do not depend on the symbol law.
///
/// With `s = μ + d` for iid zero-mean `d` and `y = Ψd`,
/// `u_k = μ²|w_k|² + 2μ·Σ_n R_kn d_n + |y_k|²` where `R_kn = Re{Ψ_kn w_k*}`.
/// Every second-order statistic of `u` is then a law-weighted sum of the
/// matrices below, so a new constellation only costs `O(K²)` to assemble.
#[derive(Debug, Clone)]
pub struct OperatorGram {
    target_col: usize,
    /// `|Ψ|∘²`
    a2: DMatrix<f64>,
    r: DMatrix<f64>,
    w: DVector<Complex64>,
    z: DVector<f64>,
    w_abs2: DVector<f64>,
    /// `ΨΨᴴ`
    g1: DMatrix<Complex64>,
    /// fourth-cumulant term `|Ψ|∘²·(|Ψ|∘²)ᵀ`
    t1: DMatrix<f64>,
    /// `|ΨΨᴴ|∘² + |ΨΨᵀ|∘²`
    t2: DMatrix<f64>,
    /// `4·R·Rᵀ`
    t3: DMatrix<f64>,
    /// `R·(|Ψ|∘²)ᵀ + |Ψ|∘²·Rᵀ`
    t4: DMatrix<f64>,
}

impl OperatorGram {
    pub fn new(psi: &DMatrix<Complex64>, target_col: usize) -> Self {
        let (k, n) = psi.shape();
        let a2 = psi.map(|x| x.norm_sqr());
        let w = DVector::from_fn(k, |i, _| psi.row(i).sum());
        let z = DVector::from_fn(k, |i, _| a2.row(i).sum());
        let w_abs2 = w.map(|x| x.norm_sqr());
        let r = DMatrix::from_fn(k, n, |i, j| (psi[(i, j)] * w[i].conj()).re);
        let g1 = psi * psi.adjoint();
        let g2 = psi * psi.transpose();
        let t1 = &a2 * a2.transpose();
        let t2 = DMatrix::from_fn(k, k, |i, j| g1[(i, j)].norm_sqr() + g2[(i, j)].norm_sqr());
        let t3 = (&r * r.transpose()) * 4.0;
        let ra = &r * a2.transpose();
        let t4 = &ra + ra.transpose();
        Self {
            target_col,
            a2,
            r,
            w,
            z,
            w_abs2,
            g1,
            t1,
            t2,
            t3,
            t4,
        }
    }

    pub fn k(&self) -> usize {
        self.z.len()
    }

    /// `w = Ψ·1`
    pub fn w(&self) -> &DVector<Complex64> {
        &self.w
    }

    /// `z = |Ψ|∘²·1`
    pub fn z(&self) -> &DVector<f64> {
        &self.z
    }

    /// `ΨΨᴴ`
    pub fn psi_psi_h(&self) -> &DMatrix<Complex64> {
        &self.g1
    }

    /// Mean of `u` for symbols drawn from `law`.
    pub fn mean(&self, law: &SymbolLaw) -> DVector<f64> {
        let m2 = law.mean * law.mean;
        &self.z * law.variance + &self.w_abs2 * m2
    }

    /// Covariance of `u`, valid for any iid law (skewed ones included).
    pub fn covariance(&self, law: &SymbolLaw, sigma_eta2: f64) -> DMatrix<f64> {
        let s2 = law.variance;
        let s4 = s2 * s2;
        let mu = law.mean;
        let mut c = &self.t1 * (law.mu4 - 3.0 * s4)
            + &self.t2 * s4
            + &self.t3 * (s2 * mu * mu)
            + &self.t4 * (2.0 * mu * law.mu3);
        for i in 0..c.nrows() {
            c[(i, i)] += sigma_eta2;
        }
        c
    }

    /// Covariance between the target function of the estimated symbol and `u`.
    pub fn cross_covariance(&self, law: &SymbolLaw, target: Target) -> DVector<f64> {
        let t = self.target_col;
        let a = self.a2.column(t);
        let r = self.r.column(t);
        let (mu, s2) = (law.mean, law.variance);
        match target {
            Target::Amplitude => r * (2.0 * s2 * mu) + a * law.mu3,
            Target::Intensity => {
                r * (4.0 * mu * mu * s2 + 2.0 * mu * law.mu3)
                    + a * (2.0 * mu * law.mu3 + law.mu4 - s2 * s2)
            }
        }
    }

    pub fn stats(&self, law: &SymbolLaw, target: Target, sigma_eta2: f64) -> OutputStats {
        OutputStats {
            c_su: self.cross_covariance(law, target),
            mu_u: self.mean(law),
            c_uu: self.covariance(law, sigma_eta2),
            w: self.w.clone(),
            z: self.z.clone(),
            sigma_eta2,
        }
    }
}

/// Mean and variance of the target function under `law`.
pub fn target_moments(law: &SymbolLaw, target: Target) -> (f64, f64) {
    match target {
        Target::Amplitude => (law.mean, law.variance),
        Target::Intensity => {
            let (mu, s2) = (law.mean, law.variance);
            (
                s2 + mu * mu,
                law.mu4 + 4.0 * mu * law.mu3 + 4.0 * mu * mu * s2 - s2 * s2,
            )
        }
    }
}
