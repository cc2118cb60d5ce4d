use std::f64::consts::{LN_2, PI};

use crate::error::{Error, Result};

/// Minimum number of estimates per constellation point for a Gaussian fit.
pub const MIN_CLASS_SAMPLES: usize = 100;

/// Achievable-rate lower bound (bits per channel use) from paired estimates
/// and transmitted symbol indices.
///
/// Each constellation point gets a Gaussian auxiliary channel fitted by
/// sample mean and variance; the bound is
/// `mean_v log₂[q(ŝ_v|a_v) / Σ_j q(ŝ_v|a_j)/Q]`. Variances are floored at
/// `1e−12` times the overall estimate variance so perfectly separated classes
/// stay finite.
pub fn achievable_rate_lb(estimates: &[f64], symbols: &[usize], order: usize) -> Result<f64> {
    if estimates.len() != symbols.len() {
        return Err(Error::DimensionMismatch {
            expected: symbols.len(),
            actual: estimates.len(),
        });
    }
    if order < 2 {
        return Err(Error::invalid("order", format!("need Q >= 2, got {order}")));
    }
    if let Some(&bad) = symbols.iter().find(|&&s| s >= order) {
        return Err(Error::invalid("symbols", format!("index {bad} outside alphabet of {order}")));
    }
    let mut count = vec![0usize; order];
    let mut sum = vec![0.0; order];
    for (&x, &s) in estimates.iter().zip(symbols) {
        count[s] += 1;
        sum[s] += x;
    }
    if let Some((i, &n)) = count.iter().enumerate().find(|(_, &n)| n < MIN_CLASS_SAMPLES) {
        return Err(Error::InsufficientSamples(format!(
            "constellation point {i} has {n} estimates, need {MIN_CLASS_SAMPLES}"
        )));
    }
    let mean: Vec<f64> = sum.iter().zip(&count).map(|(s, &n)| s / n as f64).collect();
    let mut var = vec![0.0; order];
    for (&x, &s) in estimates.iter().zip(symbols) {
        var[s] += (x - mean[s]).powi(2);
    }
    let n_total = estimates.len() as f64;
    let grand = estimates.iter().sum::<f64>() / n_total;
    let total_var = estimates.iter().map(|x| (x - grand).powi(2)).sum::<f64>() / n_total;
    let floor = 1e-12 * total_var.max(f64::MIN_POSITIVE);
    for (v, &n) in var.iter_mut().zip(&count) {
        *v = (*v / n as f64).max(floor);
    }

    let log_q = |x: f64, i: usize| -> f64 {
        -0.5 * ((2.0 * PI * var[i]).ln() + (x - mean[i]).powi(2) / var[i])
    };
    let ln_order = (order as f64).ln();
    let mut logs = vec![0.0; order];
    let mut acc = 0.0;
    for (&x, &s) in estimates.iter().zip(symbols) {
        for (i, l) in logs.iter_mut().enumerate() {
            *l = log_q(x, i);
        }
        let peak = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let lse = peak + logs.iter().map(|l| (l - peak).exp()).sum::<f64>().ln();
        acc += logs[s] - (lse - ln_order);
    }
    let rate = acc / n_total / LN_2;
    let max = (order as f64).log2();
    if rate < 0.0 {
        log::warn!("rate bound {rate:.4} bpcu negative before clamping");
    }
    Ok(rate.clamp(0.0, max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    #[test]
    fn separated_classes_reach_log_q() {
        for q in [2usize, 4, 8, 16] {
            let symbols: Vec<usize> = (0..200 * q).map(|i| i % q).collect();
            let est: Vec<f64> = symbols.iter().map(|&s| s as f64 * 0.1).collect();
            let r = achievable_rate_lb(&est, &symbols, q).unwrap();
            assert!(((q as f64).log2() - r).abs() < 0.01, "Q={q}: {r}");
        }
    }

    #[test]
    fn independent_estimates_give_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 100_000;
        let symbols: Vec<usize> = (0..n).map(|_| rng.random_range(0..4)).collect();
        let normal = Normal::new(0.0, 1.0).unwrap();
        let est: Vec<f64> = (0..n).map(|_| normal.sample(&mut rng)).collect();
        let r = achievable_rate_lb(&est, &symbols, 4).unwrap();
        assert!(r < 0.005, "{r}");
    }

    #[test]
    fn gaussian_two_level_matches_numerical_integral() {
        // two levels ±1 with unit noise: the bound is the BI-AWGN mutual information
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let normal = Normal::new(0.0, 1.0).unwrap();
        let n = 400_000;
        let symbols: Vec<usize> = (0..n).map(|_| rng.random_range(0..2)).collect();
        let est: Vec<f64> = symbols
            .iter()
            .map(|&s| if s == 0 { -1.0 } else { 1.0 } + normal.sample(&mut rng))
            .collect();
        let r = achievable_rate_lb(&est, &symbols, 2).unwrap();
        // I = 1 − E[log₂(1 + e^{−2y})], y ~ N(1, 1), by trapezoid quadrature
        let mut integral = 0.0f64;
        let h = 1e-3;
        let mut y: f64 = -9.0;
        while y < 11.0 {
            let pdf = (-(y - 1.0) * (y - 1.0) / 2.0).exp() / (2.0 * PI).sqrt();
            integral += pdf * (1.0 + (-2.0 * y).exp()).log2() * h;
            y += h;
        }
        let mi = 1.0 - integral;
        assert!((r - mi).abs() < 0.01, "{r} vs {mi}");
    }

    #[test]
    fn errors() {
        let symbols: Vec<usize> = (0..150).map(|i| i % 2).collect();
        let est = vec![0.0; 150];
        assert!(matches!(
            achievable_rate_lb(&est, &symbols, 2),
            Err(Error::InsufficientSamples(_))
        ));
        assert!(achievable_rate_lb(&est[..10], &symbols, 2).is_err());
        assert!(achievable_rate_lb(&est, &symbols, 1).is_err());
        let bad: Vec<usize> = vec![5; 150];
        assert!(achievable_rate_lb(&est, &bad, 4).is_err());
    }
}
