//! Choice of the PAM span per noise level.
//!
//! Wider spacing resists noise but drives the outer points further into the
//! curved part of `√·`, which the linear estimator cannot undo. The analytic
//! ESR of the mismatched design captures both effects cheaply and serves as
//! the objective.

use crate::channel::ConvOperator;
use crate::constellation::{build_pam_normalized, Constellation};
use crate::error::{Error, Result};
use crate::wiener::analytic_esr;

/// Smallest normalized span considered; below it `σ̆²` is too close to zero.
pub const MIN_D_NORM: f64 = 1e-4;
const GRID_POINTS: usize = 33;
const REL_WIDTH: f64 = 1e-3;
const TIE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct ShapingResult {
    /// `D / (2·P_tx,opt)`
    pub d_norm: f64,
    /// Analytic ESR at `d_norm`.
    pub esr: f64,
    pub constellation: Constellation,
}

/// The coarse search grid: `MIN_D_NORM` followed by `i/32`, `i = 1..=32`.
pub fn coarse_grid() -> Vec<f64> {
    let steps = (GRID_POINTS - 1) as f64;
    std::iter::once(MIN_D_NORM)
        .chain((1..GRID_POINTS).map(|i| i as f64 / steps))
        .collect()
}

/// Minimizes the analytic ESR over `d_norm ∈ [1e−4, 1]`.
pub fn optimize_span(
    op: &ConvOperator,
    order: usize,
    p_tx_opt: f64,
    sigma_eta2: f64,
) -> Result<ShapingResult> {
    if order < 2 {
        return Err(Error::invalid("order", format!("need Q >= 2, got {order}")));
    }
    if !(p_tx_opt > 0.0 && p_tx_opt.is_finite()) {
        return Err(Error::invalid("p_tx_opt", format!("must be positive, got {p_tx_opt}")));
    }
    let eval = |d: f64| -> Result<(f64, Constellation)> {
        let c = build_pam_normalized(order, p_tx_opt, d)?;
        Ok((analytic_esr(op, &c, sigma_eta2)?, c))
    };

    let grid = coarse_grid();
    let mut values = Vec::with_capacity(grid.len());
    for &d in &grid {
        values.push(eval(d)?.0);
    }
    // ties go to the widest spacing
    let mut best = 0;
    for i in 1..grid.len() {
        if values[i] <= values[best] + TIE_TOL {
            best = i;
        }
    }

    let lo = grid[best.saturating_sub(1)];
    let hi = grid[(best + 1).min(grid.len() - 1)];
    let (refined, refined_esr) = golden_section(lo, hi, |d| eval(d).map(|r| r.0))?;

    let d = if refined_esr < values[best] {
        refined
    } else {
        grid[best]
    };
    let (esr, constellation) = eval(d)?;
    Ok(ShapingResult {
        d_norm: d,
        esr,
        constellation,
    })
}

fn golden_section<F>(mut a: f64, mut b: f64, mut f: F) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> Result<f64>,
{
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    while b - a > REL_WIDTH * b {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = f(x1)?;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = f(x2)?;
        }
    }
    Ok(if f1 <= f2 { (x1, f1) } else { (x2, f2) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{build_conv_operator, sample_cir, CirGrid, LinkParams};
    use nalgebra::DMatrix;
    use num_complex::Complex64;

    fn link_op() -> ConvOperator {
        let cir = sample_cir(&LinkParams::default(), 0.01, CirGrid::default()).unwrap();
        build_conv_operator(&cir, cir.len(), 2).unwrap()
    }

    const P: f64 = 6.0219e-3;

    #[test]
    fn grid_layout() {
        let g = coarse_grid();
        assert_eq!(g.len(), 33);
        assert_eq!(g[0], MIN_D_NORM);
        assert_eq!(g[32], 1.0);
        assert!(g.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn golden_section_finds_parabola_minimum() {
        let (x, fx) = golden_section(0.0, 1.0, |x| Ok((x - 0.3) * (x - 0.3))).unwrap();
        assert!((x - 0.3).abs() < 1e-3);
        assert!(fx < 1e-6);
    }

    #[test]
    fn scalar_noiseless_two_point() {
        let op = ConvOperator::from_matrix(DMatrix::from_element(1, 1, Complex64::new(1.0, 0.0)), 0)
            .unwrap();
        let r = optimize_span(&op, 2, 1.0, 0.0).unwrap();
        assert!(r.esr <= 1e-6, "{}", r.esr);
        assert!(r.d_norm > 0.0 && r.d_norm <= 1.0);
    }

    #[test]
    fn low_snr_prefers_full_span() {
        let op = link_op();
        // signal power ~P² ≈ 4e−5, noise far above
        let r = optimize_span(&op, 4, P, 1.0).unwrap();
        assert!(r.d_norm > 0.99, "{}", r.d_norm);
    }

    #[test]
    fn stored_esr_is_reproducible_and_grid_optimal() {
        let op = link_op();
        let eta = 1e-9;
        let r = optimize_span(&op, 4, P, eta).unwrap();
        assert_eq!(analytic_esr(&op, &r.constellation, eta).unwrap(), r.esr);
        for d in coarse_grid() {
            let c = build_pam_normalized(4, P, d).unwrap();
            assert!(r.esr <= analytic_esr(&op, &c, eta).unwrap());
        }
    }

    #[test]
    fn rejects_bad_arguments() {
        let op = link_op();
        assert!(optimize_span(&op, 1, P, 1e-9).is_err());
        assert!(optimize_span(&op, 4, 0.0, 1e-9).is_err());
    }
}
