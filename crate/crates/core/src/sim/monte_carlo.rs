use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::convolve::OverlapAdd;
use crate::channel::{Cir, ConvOperator};
use crate::constellation::{predistort, Constellation};
use crate::error::{Error, Result};
use crate::wiener::WienerFilter;

/// Symbols per RNG stream when drawing the transmit sequence.
const SYMBOL_BLOCK: usize = 4096;
/// Samples per RNG stream when drawing receiver noise.
const NOISE_BLOCK: usize = 8192;

#[derive(Debug, Clone, PartialEq)]
pub struct MonteCarloResult {
    /// `E|ŝ − s̆|²` over the retained estimates.
    pub mse_prime: f64,
    /// `mse_prime / σ̆²`
    pub esr_empirical: f64,
    /// One estimate per retained symbol.
    pub estimates: Vec<f64>,
    /// Alphabet indices of the retained symbols, aligned with `estimates`.
    pub symbols: Vec<usize>,
}

fn block_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// iid uniform alphabet indices. Block `b` uses stream `2b`, so the sequence
/// does not depend on how the work is split.
pub fn draw_symbols(order: usize, n: usize, seed: u64) -> Vec<usize> {
    let mut out = Vec::with_capacity(n);
    for b in 0..n.div_ceil(SYMBOL_BLOCK) {
        let mut rng = block_rng(seed, 2 * b as u64);
        let len = SYMBOL_BLOCK.min(n - b * SYMBOL_BLOCK);
        out.extend((0..len).map(|_| rng.random_range(0..order)));
    }
    out
}

/// Photodiode output for a stream of field amplitudes: zero-insertion
/// upsampling by 2, convolution with the impulse response, `|·|²`, plus white
/// Gaussian noise (noise block `b` uses stream `2b + 1`).
///
/// The sample at index `2ν + i` is observation `i` of the window that
/// estimates symbol `ν`.
pub fn received_intensity(cir: &Cir, amplitudes: &[f64], sigma_eta2: f64, seed: u64) -> Result<Vec<f64>> {
    if !(sigma_eta2 >= 0.0 && sigma_eta2.is_finite()) {
        return Err(Error::invalid("sigma_eta2", format!("must be finite and >= 0, got {sigma_eta2}")));
    }
    let mut up = vec![Complex64::new(0.0, 0.0); 2 * amplitudes.len()];
    for (i, &a) in amplitudes.iter().enumerate() {
        up[2 * i] = Complex64::new(a, 0.0);
    }
    let field = OverlapAdd::new(&cir.taps)?.convolve(&up);
    // x[n] = Σ_m ψ[m]·s′[n − m]: symbol ν reaches samples 2ν .. 2ν + M − 1 through ψ[0..M]
    let mut u: Vec<f64> = field.iter().map(|x| x.norm_sqr()).collect();
    if sigma_eta2 > 0.0 {
        let sd = sigma_eta2.sqrt();
        for (b, chunk) in u.chunks_mut(NOISE_BLOCK).enumerate() {
            let mut rng = block_rng(seed, 2 * b as u64 + 1);
            for x in chunk {
                let z: f64 = StandardNormal.sample(&mut rng);
                *x += sd * z;
            }
        }
    }
    Ok(u)
}

/// Slides the real part of the filter over `u`: estimate `ν` is
/// `Re{g}ᵀ·u[2ν .. 2ν+K] + Re{g_m}`, for every `ν` with a full window.
pub fn apply_filter(filter: &WienerFilter, u: &[f64]) -> Result<Vec<f64>> {
    let k = filter.len();
    if k == 0 {
        return Err(Error::invalid("filter", "has no taps"));
    }
    if u.len() < k {
        return Ok(Vec::new());
    }
    // correlation as convolution with the reversed taps
    let rev: Vec<Complex64> = filter.real_taps().iter().rev().map(|&g| Complex64::new(g, 0.0)).collect();
    let y = OverlapAdd::new(&rev)?.convolve_real(u);
    let n_est = (u.len() - k) / 2 + 1;
    let bias = filter.real_bias();
    Ok((0..n_est).map(|nu| y[2 * nu + k - 1] + bias).collect())
}

/// Estimates near either end of the stream are dropped: the first ones miss
/// interference from symbols that were never sent, the last ones lack
/// observations.
pub fn edge_discard(cir_len: usize, k: usize) -> usize {
    cir_len.div_ceil(2).max(k.div_ceil(2))
}

/// Transmits `n_symbols` iid draws from `breve` through the predistorted
/// link and measures the estimation error of `filter`.
pub fn run_monte_carlo(
    op: &ConvOperator,
    cir: &Cir,
    filter: &WienerFilter,
    breve: &Constellation,
    sigma_eta2: f64,
    n_symbols: usize,
    rng_seed: u64,
) -> Result<MonteCarloResult> {
    if filter.len() != op.k() {
        return Err(Error::DimensionMismatch {
            expected: op.k(),
            actual: filter.len(),
        });
    }
    if !(breve.variance > 0.0) {
        return Err(Error::Domain("ESR undefined for a constellation without spread".into()));
    }
    let discard = edge_discard(cir.len(), op.k());
    if n_symbols <= 2 * discard {
        return Err(Error::InsufficientSamples(format!(
            "{n_symbols} symbols leave nothing after discarding {discard} at each edge"
        )));
    }
    let idx = draw_symbols(breve.order(), n_symbols, rng_seed);
    let amp_points = predistort(breve)?;
    let amps: Vec<f64> = idx.iter().map(|&i| amp_points.points()[i]).collect();
    let u = received_intensity(cir, &amps, sigma_eta2, rng_seed)?;
    let all = apply_filter(filter, &u)?;
    let end = (n_symbols - discard).min(all.len());
    if end <= discard {
        return Err(Error::InsufficientSamples("no estimate with full filter support".into()));
    }
    let estimates = all[discard..end].to_vec();
    let symbols = idx[discard..end].to_vec();
    let pts = breve.points();
    let mse_prime = estimates
        .iter()
        .zip(&symbols)
        .map(|(e, &s)| (e - pts[s]).powi(2))
        .sum::<f64>()
        / estimates.len() as f64;
    Ok(MonteCarloResult {
        mse_prime,
        esr_empirical: mse_prime / breve.variance,
        estimates,
        symbols,
    })
}
