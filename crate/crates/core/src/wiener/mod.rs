//! Linear minimum mean-square error filters for the square-law channel.
//!
//! Three designs share one interface:
//!
//! * **matched** — the exact affine LMMSE estimator of the intensity symbol
//!   `s̆` from `u`, using the true statistics of the predistorted stream.
//! * **mismatched** — the same normal equations evaluated with the symbol
//!   law obtained from the first-order expansion `√s̆ ≈ t_α·s̆ + t_β`; cheap and
//!   symmetric, and the quantity the span optimizer minimizes.
//! * **naive** — ignores the square law entirely and treats `u` as `Ψs̆`
//!   plus noise, keeping the real part of the complex estimate.

mod closed_form;
mod gram;

pub use closed_form::{cross_covariance, output_covariance, output_mean, output_stats};
pub use gram::{target_moments, OperatorGram, Target};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use crate::channel::ConvOperator;
use crate::constellation::{predistort, taylor_coeffs, Constellation, SymbolLaw};
use crate::error::{Error, Result};
use crate::linalg::solve_hpd;

/// Statistics entering the normal equations.
#[derive(Debug, Clone, PartialEq)]
pub struct OutputStats {
    /// Covariance between the target symbol and each observation.
    pub c_su: DVector<f64>,
    pub mu_u: DVector<f64>,
    pub c_uu: DMatrix<f64>,
    /// `Ψ·1`
    pub w: DVector<Complex64>,
    /// `|Ψ|∘²·1`
    pub z: DVector<f64>,
    pub sigma_eta2: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Matched,
    Mismatched,
    Naive,
}

impl Variant {
    pub const ALL: [Variant; 3] = [Variant::Matched, Variant::Mismatched, Variant::Naive];

    pub fn as_str(&self) -> &'static str {
        match self {
            Variant::Matched => "matched",
            Variant::Mismatched => "mismatched",
            Variant::Naive => "naive",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "matched" => Ok(Variant::Matched),
            "mismatched" => Ok(Variant::Mismatched),
            "naive" => Ok(Variant::Naive),
            other => Err(Error::invalid(
                "variant",
                format!("expected matched, mismatched or naive, got `{other}`"),
            )),
        }
    }
}

/// Affine estimator `ŝ = Re{gᵀu + g_m}`.
#[derive(Debug, Clone, PartialEq)]
pub struct WienerFilter {
    pub taps: Vec<Complex64>,
    pub bias: Complex64,
    pub variant: Variant,
}

impl WienerFilter {
    fn real(taps: DVector<f64>, bias: f64, variant: Variant) -> Self {
        Self {
            taps: taps.iter().map(|&g| Complex64::new(g, 0.0)).collect(),
            bias: Complex64::new(bias, 0.0),
            variant,
        }
    }

    pub fn len(&self) -> usize {
        self.taps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.taps.is_empty()
    }

    /// Taps as seen by real-valued observations: `Re{gᵀu} = (Re g)ᵀu`.
    pub fn real_taps(&self) -> Vec<f64> {
        self.taps.iter().map(|g| g.re).collect()
    }

    pub fn real_bias(&self) -> f64 {
        self.bias.re
    }

    pub fn apply(&self, u: &[f64]) -> Result<f64> {
        if u.len() != self.taps.len() {
            return Err(Error::DimensionMismatch {
                expected: self.taps.len(),
                actual: u.len(),
            });
        }
        Ok(self.taps.iter().zip(u).map(|(g, x)| g.re * x).sum::<f64>() + self.bias.re)
    }

    /// CSV with columns `tap_index,g_real,g_imag`; the bias goes in `#` metadata.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        self.write_csv_with_meta(out, &[])
    }

    /// As [`Self::write_csv`] with extra `# key: value` lines after the fixed metadata.
    pub fn write_csv_with_meta<W: Write>(&self, mut out: W, meta: &[(&str, String)]) -> Result<()> {
        writeln!(out, "# schema: imdd-wiener/filter/v1")?;
        writeln!(out, "# variant: {}", self.variant)?;
        for (k, v) in meta {
            writeln!(out, "# {k}: {v}")?;
        }
        writeln!(out, "# bias_real: {:.12e}", self.bias.re)?;
        writeln!(out, "# bias_imag: {:.12e}", self.bias.im)?;
        writeln!(out, "tap_index,g_real,g_imag")?;
        for (i, g) in self.taps.iter().enumerate() {
            writeln!(out, "{},{:.12e},{:.12e}", i, g.re, g.im)?;
        }
        Ok(())
    }
}

/// Solves `gᵀ = c·C⁻¹`, `g_m = μ_s − gᵀμ_u`.
pub fn solve_wf(stats: &OutputStats, mu_s: f64) -> Result<WienerFilter> {
    let (g, gm) = solve_affine(stats, mu_s)?;
    Ok(WienerFilter::real(g, gm, Variant::Matched))
}

fn solve_affine(stats: &OutputStats, mu_s: f64) -> Result<(DVector<f64>, f64)> {
    let g = solve_hpd(&stats.c_uu, &stats.c_su)?;
    let gm = mu_s - g.dot(&stats.mu_u);
    Ok((g, gm))
}

/// LMMSE estimator of `s̆` built from the exact statistics of the `√s̆` stream.
pub fn matched_wf(op: &ConvOperator, breve: &Constellation, sigma_eta2: f64) -> Result<WienerFilter> {
    check_noise(sigma_eta2)?;
    let law = predistort(breve)?.law();
    let stats = op.gram().stats(&law, Target::Intensity, sigma_eta2);
    let (g, gm) = solve_affine(&stats, breve.mean)?;
    Ok(WienerFilter::real(g, gm, Variant::Matched))
}

fn mismatched_parts(
    op: &ConvOperator,
    breve: &Constellation,
    sigma_eta2: f64,
) -> Result<(f64, OutputStats, DVector<f64>)> {
    check_noise(sigma_eta2)?;
    let t = taylor_coeffs(breve.mean)?;
    let law = SymbolLaw::taylor_substituted(breve)?;
    let stats = op.gram().stats(&law, Target::Amplitude, sigma_eta2);
    let x = solve_hpd(&stats.c_uu, &stats.c_su)?;
    Ok((t.t_alpha, stats, x))
}

/// Normal equations under the Taylor-substituted law, rescaled back to `s̆`.
pub fn mismatched_wf(op: &ConvOperator, breve: &Constellation, sigma_eta2: f64) -> Result<WienerFilter> {
    let (t_alpha, stats, x) = mismatched_parts(op, breve, sigma_eta2)?;
    let g = x / t_alpha;
    let gm = breve.mean - g.dot(&stats.mu_u);
    Ok(WienerFilter::real(g, gm, Variant::Mismatched))
}

/// Linear-channel baseline: `u ≈ Ψs̆ + η`, complex normal equations, real part kept.
pub fn naive_wf(op: &ConvOperator, breve: &Constellation, sigma_eta2: f64) -> Result<WienerFilter> {
    check_noise(sigma_eta2)?;
    let s2 = breve.variance;
    let gram = op.gram();
    let mut c = gram.psi_psi_h() * Complex64::new(s2, 0.0);
    for i in 0..c.nrows() {
        c[(i, i)] += sigma_eta2;
    }
    let rhs = op.matrix().column(op.target_col()) * Complex64::new(s2, 0.0);
    // gᵀ = c_su·C⁻¹ with c_su = σ̆²(Ψe)ᴴ and C Hermitian ⇒ g = conj(C⁻¹·σ̆²Ψe)
    let h = solve_hpd(&c, &rhs.into_owned())?;
    let g: Vec<Complex64> = h.iter().map(|x| x.conj()).collect();
    let mean_u = gram.w() * Complex64::new(breve.mean, 0.0);
    let gm = Complex64::new(breve.mean, 0.0)
        - g.iter().zip(mean_u.iter()).map(|(a, b)| a * b).sum::<Complex64>();
    Ok(WienerFilter {
        taps: g,
        bias: gm,
        variant: Variant::Naive,
    })
}

pub fn design(variant: Variant, op: &ConvOperator, breve: &Constellation, sigma_eta2: f64) -> Result<WienerFilter> {
    match variant {
        Variant::Matched => matched_wf(op, breve, sigma_eta2),
        Variant::Mismatched => mismatched_wf(op, breve, sigma_eta2),
        Variant::Naive => naive_wf(op, breve, sigma_eta2),
    }
}

/// Error-to-signal ratio predicted by the Taylor-substituted statistics,
/// `1 − t_α⁻²·c̃·C̃⁻¹·c̃ᵀ / σ̆²`. This is the shaping objective.
pub fn analytic_esr(op: &ConvOperator, breve: &Constellation, sigma_eta2: f64) -> Result<f64> {
    if !(breve.variance > 0.0) {
        return Err(Error::Domain(
            "error-to-signal ratio undefined for a constellation without spread".into(),
        ));
    }
    let (t_alpha, stats, x) = mismatched_parts(op, breve, sigma_eta2)?;
    Ok(1.0 - stats.c_su.dot(&x) / (t_alpha * t_alpha * breve.variance))
}

/// Exact normalized MSE of `filter` on the predistorted stream,
/// `E|Re{gᵀu + g_m} − s̆|² / σ̆²`.
pub fn filter_esr(
    op: &ConvOperator,
    filter: &WienerFilter,
    breve: &Constellation,
    sigma_eta2: f64,
) -> Result<f64> {
    if !(breve.variance > 0.0) {
        return Err(Error::Domain(
            "error-to-signal ratio undefined for a constellation without spread".into(),
        ));
    }
    check_noise(sigma_eta2)?;
    if filter.len() != op.k() {
        return Err(Error::DimensionMismatch {
            expected: op.k(),
            actual: filter.len(),
        });
    }
    let law = predistort(breve)?.law();
    let stats = op.gram().stats(&law, Target::Intensity, sigma_eta2);
    let g = DVector::from_vec(filter.real_taps());
    let bias_err = g.dot(&stats.mu_u) + filter.real_bias() - breve.mean;
    let mse = breve.variance - 2.0 * g.dot(&stats.c_su)
        + g.dot(&(&stats.c_uu * &g))
        + bias_err * bias_err;
    Ok(mse.max(0.0) / breve.variance)
}

fn check_noise(sigma_eta2: f64) -> Result<()> {
    if sigma_eta2 >= 0.0 && sigma_eta2.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid("sigma_eta2", format!("must be finite and >= 0, got {sigma_eta2}")))
    }
}
