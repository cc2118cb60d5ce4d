//! Unipolar PAM alphabets with uniform probabilities.
//!
//! The transmitter draws intensity symbols `s̆` from an equally spaced
//! alphabet centred on the average launch power. Before pulse shaping the
//! symbols are mapped through `√·` so that the square-law detector returns
//! the intensity alphabet at the zero-ISI sampling instants.
//!
//! Moments are cached on construction since the statistics engine reads them
//! for every operator and noise level.

use crate::error::{Error, Result};

/// First four moments of an iid real symbol law (central moments for orders 2..4).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymbolLaw {
    pub mean: f64,
    pub variance: f64,
    /// Third central moment; zero for laws symmetric around their mean.
    pub mu3: f64,
    /// Fourth central moment.
    pub mu4: f64,
}

impl SymbolLaw {
    pub fn symmetric(mean: f64, variance: f64, mu4: f64) -> Self {
        Self {
            mean,
            variance,
            mu3: 0.0,
            mu4,
        }
    }

    /// Law seen by the mismatched filter: `√s̆ ≈ t_α·s̆ + t_β` pushed through the
    /// moments of the intensity alphabet. The result is symmetric whenever the
    /// intensity alphabet is.
    pub fn taylor_substituted(breve: &Constellation) -> Result<Self> {
        let t = taylor_coeffs(breve.mean)?;
        let a2 = t.t_alpha * t.t_alpha;
        Ok(Self::symmetric(
            t.t_alpha * breve.mean + t.t_beta,
            a2 * breve.variance,
            a2 * a2 * breve.mu4,
        ))
    }

    /// Second raw moment `E[s²]`.
    pub fn power(&self) -> f64 {
        self.variance + self.mean * self.mean
    }
}

/// A finite real alphabet with a uniform PMF.
#[derive(Debug, Clone, PartialEq)]
pub struct Constellation {
    points: Vec<f64>,
    pub mean: f64,
    pub variance: f64,
    pub mu3: f64,
    pub mu4: f64,
}

/// Coefficients of the first-order expansion `√x ≈ t_alpha·x + t_beta` around the mean.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TaylorCoeffs {
    pub t_alpha: f64,
    pub t_beta: f64,
}

fn central_moments(points: &[f64]) -> (f64, f64, f64, f64) {
    let q = points.len() as f64;
    let mean = points.iter().sum::<f64>() / q;
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for &p in points {
        let d = p - mean;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    (mean, m2 / q, m3 / q, m4 / q)
}

impl Constellation {
    /// Builds an alphabet from explicit nonnegative points (uniform PMF).
    pub fn from_points(points: Vec<f64>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::invalid("points", "alphabet must not be empty"));
        }
        if let Some(p) = points.iter().find(|p| !p.is_finite() || **p < 0.0) {
            return Err(Error::Domain(format!(
                "constellation point {p} is not a finite nonnegative amplitude"
            )));
        }
        let (mean, variance, mu3, mu4) = central_moments(&points);
        Ok(Self {
            points,
            mean,
            variance,
            mu3,
            mu4,
        })
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn order(&self) -> usize {
        self.points.len()
    }

    pub fn probability(&self) -> f64 {
        1.0 / self.points.len() as f64
    }

    pub fn law(&self) -> SymbolLaw {
        SymbolLaw {
            mean: self.mean,
            variance: self.variance,
            mu3: self.mu3,
            mu4: self.mu4,
        }
    }

    /// Recomputes the moments from the points; used as a self-check of the cache.
    pub fn recomputed_law(&self) -> SymbolLaw {
        let (mean, variance, mu3, mu4) = central_moments(&self.points);
        SymbolLaw {
            mean,
            variance,
            mu3,
            mu4,
        }
    }
}

/// Equally spaced `Q`-point alphabet `p − D/2 + i·D/(Q−1)`, `i = 0..Q−1`.
pub fn build_pam(order: usize, p_tx_opt: f64, span: f64) -> Result<Constellation> {
    if order < 2 {
        return Err(Error::invalid("order", format!("need Q >= 2, got {order}")));
    }
    if !(p_tx_opt > 0.0 && p_tx_opt.is_finite()) {
        return Err(Error::invalid("p_tx_opt", format!("must be positive, got {p_tx_opt}")));
    }
    if !(0.0..=2.0 * p_tx_opt).contains(&span) {
        return Err(Error::invalid(
            "span",
            format!("D = {span} outside [0, {}]", 2.0 * p_tx_opt),
        ));
    }
    let step = span / (order - 1) as f64;
    let points = (0..order)
        .map(|i| (p_tx_opt - span / 2.0 + i as f64 * step).max(0.0))
        .collect();
    Constellation::from_points(points)
}

/// Equally spaced alphabet parameterised by the normalized span `D / (2·p_tx_opt)`.
pub fn build_pam_normalized(order: usize, p_tx_opt: f64, d_norm: f64) -> Result<Constellation> {
    if !(0.0..=1.0).contains(&d_norm) {
        return Err(Error::invalid("d_norm", format!("{d_norm} outside [0, 1]")));
    }
    build_pam(order, p_tx_opt, (d_norm * 2.0 * p_tx_opt).min(2.0 * p_tx_opt))
}

/// Element-wise `√·` of the alphabet, with moments of the transformed points.
pub fn predistort(c: &Constellation) -> Result<Constellation> {
    let points = c
        .points()
        .iter()
        .map(|&p| {
            if p < 0.0 {
                Err(Error::Domain(format!("cannot predistort negative point {p}")))
            } else {
                Ok(p.sqrt())
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Constellation::from_points(points)
}

pub fn taylor_coeffs(mean_breve: f64) -> Result<TaylorCoeffs> {
    if !(mean_breve > 0.0 && mean_breve.is_finite()) {
        return Err(Error::Domain(format!(
            "square-root expansion needs a positive mean, got {mean_breve}"
        )));
    }
    let root = mean_breve.sqrt();
    Ok(TaylorCoeffs {
        t_alpha: 1.0 / (2.0 * root),
        t_beta: root / 2.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + b.abs())
    }

    #[test]
    fn two_point_full_span() {
        let c = build_pam(2, 1.0, 2.0).unwrap();
        assert_eq!(c.points(), &[0.0, 2.0]);
        assert_eq!(c.mean, 1.0);
        assert_eq!(c.variance, 1.0);
        assert_eq!(c.mu4, 1.0);
        assert_eq!(c.mu3, 0.0);
    }

    #[test]
    fn degenerate_span() {
        let c = build_pam(4, 1.0, 0.0).unwrap();
        assert_eq!(c.points(), &[1.0; 4]);
        assert_eq!(c.variance, 0.0);
        assert_eq!(c.mu4, 0.0);
    }

    #[test]
    fn four_point_unit_span() {
        let c = build_pam(4, 1.0, 1.0).unwrap();
        let expect = [0.5, 5.0 / 6.0, 7.0 / 6.0, 1.5];
        for (p, e) in c.points().iter().zip(expect) {
            assert!(close(*p, e, 1e-15), "{p} vs {e}");
        }
        assert!(close(c.mean, 1.0, 1e-15));
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(build_pam(1, 1.0, 0.5).is_err());
        assert!(build_pam(4, 1.0, 2.5).is_err());
        assert!(build_pam(4, 1.0, -0.1).is_err());
        assert!(build_pam(4, 0.0, 0.0).is_err());
    }

    #[test]
    fn predistort_examples() {
        let c = predistort(&build_pam(2, 1.0, 2.0).unwrap()).unwrap();
        assert_eq!(c.points()[0], 0.0);
        assert!(close(c.points()[1], 2f64.sqrt(), 1e-15));
        assert!(close(c.mean, 2f64.sqrt() / 2.0, 1e-15));
        assert!(close(c.variance, 0.5, 1e-15));

        let ones = predistort(&build_pam(4, 1.0, 0.0).unwrap()).unwrap();
        assert_eq!(ones.points(), &[1.0; 4]);
        assert_eq!(ones.variance, 0.0);

        let c = predistort(&Constellation::from_points(vec![0.25, 2.25]).unwrap()).unwrap();
        assert_eq!(c.points(), &[0.5, 1.5]);
        assert_eq!(c.mean, 1.0);
        assert_eq!(c.variance, 0.25);
    }

    #[test]
    fn negative_points_rejected() {
        assert!(matches!(
            Constellation::from_points(vec![-1.0, 1.0]),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn taylor_examples() {
        assert_eq!(
            taylor_coeffs(1.0).unwrap(),
            TaylorCoeffs { t_alpha: 0.5, t_beta: 0.5 }
        );
        assert_eq!(
            taylor_coeffs(4.0).unwrap(),
            TaylorCoeffs { t_alpha: 0.25, t_beta: 1.0 }
        );
        assert_eq!(
            taylor_coeffs(0.25).unwrap(),
            TaylorCoeffs { t_alpha: 1.0, t_beta: 0.25 }
        );
        assert!(taylor_coeffs(0.0).is_err());
        assert!(taylor_coeffs(-1.0).is_err());
    }

    #[test]
    fn predistorted_law_is_skewed() {
        let c = predistort(&build_pam(4, 1.0, 2.0).unwrap()).unwrap();
        assert!(c.mu3 < 0.0);
    }

    proptest! {
        #[test]
        fn cached_moments_match_recomputation(q in 2usize..20, p in 1e-4f64..10.0, frac in 0.0f64..=1.0) {
            let c = build_pam(q, p, frac * 2.0 * p).unwrap();
            prop_assert_eq!(c.law(), c.recomputed_law());
            prop_assert!(c.mu4 >= c.variance * c.variance * (1.0 - 1e-12));
            prop_assert!(close(c.mean, p, 1e-12));
            // equal spacing makes the alphabet symmetric about its mean
            prop_assert!(c.mu3.abs() <= 1e-12 * p.powi(3).max(1e-300));
        }

        #[test]
        fn squaring_inverts_predistortion(q in 2usize..20, p in 1e-4f64..10.0, frac in 0.0f64..=1.0) {
            let c = build_pam(q, p, frac * 2.0 * p).unwrap();
            let pd = predistort(&c).unwrap();
            for (s, x) in pd.points().iter().zip(c.points()) {
                // correctly rounded sqrt: squaring is within two ulps of the source point
                prop_assert!((s * s - x).abs() <= 2.0 * f64::EPSILON * x);
            }
        }

        #[test]
        fn variance_grows_with_span(q in 2usize..20, p in 1e-3f64..10.0, a in 0.0f64..1.0, b in 0.0f64..1.0) {
            prop_assume!((a - b).abs() > 1e-6);
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            let cl = build_pam(q, p, lo * 2.0 * p).unwrap();
            let ch = build_pam(q, p, hi * 2.0 * p).unwrap();
            prop_assert!(ch.variance > cl.variance);
            prop_assert!(close(cl.mean, ch.mean, 1e-12));
        }

        #[test]
        fn taylor_product_is_quarter(m in 1e-12f64..1e12) {
            let t = taylor_coeffs(m).unwrap();
            prop_assert!((t.t_alpha * t.t_beta - 0.25).abs() <= 4.0 * f64::EPSILON);
        }
    }
}
