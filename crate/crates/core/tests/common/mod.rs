#![allow(dead_code)]

use imdd_wiener::channel::{build_conv_operator, Cir, ConvOperator};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

/// Sample moments of `u = |Ψs|² + η` and of a target function of the
/// estimated symbol, each with its standard error.
pub struct SampleStats {
    pub mean: DVector<f64>,
    pub mean_se: DVector<f64>,
    pub cov: DMatrix<f64>,
    pub cov_se: DMatrix<f64>,
    pub cross: DVector<f64>,
    pub cross_se: DVector<f64>,
}

fn draw(
    op: &ConvOperator,
    amps: &[f64],
    target: &dyn Fn(f64) -> f64,
    sigma_eta: f64,
    rng: &mut ChaCha8Rng,
    s: &mut [f64],
    u: &mut [f64],
) -> f64 {
    for x in s.iter_mut() {
        *x = amps[rng.random_range(0..amps.len())];
    }
    let psi = op.matrix();
    for (i, ui) in u.iter_mut().enumerate() {
        let mut acc = Complex64::new(0.0, 0.0);
        for (j, sj) in s.iter().enumerate() {
            acc += psi[(i, j)] * sj;
        }
        let z: f64 = StandardNormal.sample(rng);
        *ui = acc.norm_sqr() + sigma_eta * z;
    }
    target(s[op.target_col()])
}

/// Brute-force moments over `n` windows of iid symbols drawn uniformly from `amps`.
///
/// Two passes over the same seeded stream: means first, then centred products.
pub fn sample_stats(
    op: &ConvOperator,
    amps: &[f64],
    target: &dyn Fn(f64) -> f64,
    sigma_eta2: f64,
    n: usize,
    seed: u64,
) -> SampleStats {
    let (k, np) = (op.k(), op.n_prime());
    let sd = sigma_eta2.sqrt();
    let mut s = vec![0.0; np];
    let mut u = vec![0.0; k];

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sum_u = vec![0.0; k];
    let mut sum_t = 0.0;
    for _ in 0..n {
        let t = draw(op, amps, target, sd, &mut rng, &mut s, &mut u);
        sum_t += t;
        for (a, b) in sum_u.iter_mut().zip(&u) {
            *a += b;
        }
    }
    let nf = n as f64;
    let mu: Vec<f64> = sum_u.iter().map(|x| x / nf).collect();
    let mu_t = sum_t / nf;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut p1 = DMatrix::<f64>::zeros(k, k);
    let mut p2 = DMatrix::<f64>::zeros(k, k);
    let mut c1 = vec![0.0; k];
    let mut c2 = vec![0.0; k];
    let mut d1 = vec![0.0; k];
    let mut d2 = vec![0.0; k];
    let mut d = vec![0.0; k];
    for _ in 0..n {
        let t = draw(op, amps, target, sd, &mut rng, &mut s, &mut u) - mu_t;
        for i in 0..k {
            d[i] = u[i] - mu[i];
            d1[i] += d[i];
            d2[i] += d[i] * d[i];
            let c = t * d[i];
            c1[i] += c;
            c2[i] += c * c;
        }
        for j in 0..k {
            for i in j..k {
                let p = d[i] * d[j];
                p1[(i, j)] += p;
                p2[(i, j)] += p * p;
            }
        }
    }
    let se = |s1: f64, s2: f64| ((s2 / nf - (s1 / nf).powi(2)).max(0.0) / nf).sqrt();
    let mut cov = DMatrix::zeros(k, k);
    let mut cov_se = DMatrix::zeros(k, k);
    for j in 0..k {
        for i in j..k {
            cov[(i, j)] = p1[(i, j)] / nf;
            cov_se[(i, j)] = se(p1[(i, j)], p2[(i, j)]);
            cov[(j, i)] = cov[(i, j)];
            cov_se[(j, i)] = cov_se[(i, j)];
        }
    }
    SampleStats {
        mean: DVector::from_vec(mu),
        mean_se: DVector::from_iterator(k, (0..k).map(|i| se(d1[i], d2[i]))),
        cov,
        cov_se,
        cross: DVector::from_iterator(k, c1.iter().map(|c| c / nf)),
        cross_se: DVector::from_iterator(k, (0..k).map(|i| se(c1[i], c2[i]))),
    }
}

/// Largest `|analytic − sampled| / SE` over all entries; entries whose SE
/// vanishes must agree to rounding.
pub fn worst_z(analytic: &[f64], sampled: &[f64], se: &[f64]) -> f64 {
    let scale = analytic.iter().map(|x| x.abs()).fold(1e-300, f64::max);
    analytic
        .iter()
        .zip(sampled)
        .zip(se)
        .map(|((a, b), s)| {
            let diff = (a - b).abs();
            if diff <= 1e-9 * scale {
                0.0
            } else {
                diff / s
            }
        })
        .fold(0.0, f64::max)
}

/// Random small channel with complex taps.
pub fn random_operator(rng: &mut ChaCha8Rng, max_m: usize, max_k: usize) -> ConvOperator {
    let m = rng.random_range(1..=max_m);
    let k = rng.random_range(1..=max_k);
    let taps = (0..m)
        .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect();
    build_conv_operator(&Cir::new(taps, 1.0).unwrap(), k, 2).unwrap()
}
