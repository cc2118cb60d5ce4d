use num_complex::Complex64;
use rustfft::FftPlanner;
use std::io::Write;

use super::{cd_frequency_response, LinkParams};
use crate::error::{Error, Result};

/// Relative magnitude below which leading and trailing taps are dropped.
pub const DEFAULT_TRUNCATION: f64 = 0.01;
/// Number of `T_s′`-spaced time samples in one period of the inverse transform.
pub const DEFAULT_GRID_LEN: usize = 1 << 16;

/// Dense frequency grid for the inverse transform.
///
/// The grid spans `[−1/(2T_s′), 1/(2T_s′))` with `len` bins, so the inverse FFT
/// lands directly on the receiver sampling instants with a time period of
/// `len · T_s′`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CirGrid {
    pub len: usize,
}

impl Default for CirGrid {
    fn default() -> Self {
        Self { len: DEFAULT_GRID_LEN }
    }
}

/// Sampled combined impulse response of the transmit sinc and the fiber.
#[derive(Debug, Clone, PartialEq)]
pub struct Cir {
    /// Taps ordered earliest to latest.
    pub taps: Vec<Complex64>,
    /// `T_s′`, seconds.
    pub sample_period: f64,
    /// Index of the largest-magnitude tap.
    pub center_index: usize,
}

impl Cir {
    pub fn new(taps: Vec<Complex64>, sample_period: f64) -> Result<Self> {
        if taps.is_empty() {
            return Err(Error::invalid("taps", "impulse response is empty"));
        }
        let center_index = argmax_abs(&taps);
        Ok(Self {
            taps,
            sample_period,
            center_index,
        })
    }

    /// Number of taps `M`.
    pub fn len(&self) -> usize {
        self.taps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.taps.is_empty()
    }

    pub fn energy(&self) -> f64 {
        self.taps.iter().map(|t| t.norm_sqr()).sum()
    }

    /// CSV with columns `index,tap_real,tap_imag,tap_abs` and `#` metadata.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "# schema: imdd-wiener/cir/v1")?;
        writeln!(out, "# taps_m: {}", self.len())?;
        writeln!(out, "# sample_period_s: {:e}", self.sample_period)?;
        writeln!(out, "# center_index: {}", self.center_index)?;
        writeln!(out, "index,tap_real,tap_imag,tap_abs")?;
        for (i, t) in self.taps.iter().enumerate() {
            writeln!(out, "{},{:.12e},{:.12e},{:.12e}", i, t.re, t.im, t.norm())?;
        }
        Ok(())
    }
}

fn argmax_abs(taps: &[Complex64]) -> usize {
    let mut best = 0;
    let mut best_v = f64::NEG_INFINITY;
    for (i, t) in taps.iter().enumerate() {
        let v = t.norm_sqr();
        if v > best_v {
            best_v = v;
            best = i;
        }
    }
    best
}

/// One full period of `ψ(κT_s′)`, centred so that `t = 0` sits at index `len/2`.
///
/// The transmit pulse is `sinc(Bπt)` with unit peak, i.e. a brick-wall
/// spectrum of height `1/B` on `|f| ≤ B/2`. The band edges fall exactly on
/// bins and receive half weight.
pub fn sample_cir_untruncated(params: &LinkParams, grid: CirGrid) -> Result<Vec<Complex64>> {
    params.validate()?;
    let n = grid.len;
    let over = 2 * params.n_os;
    if n < 4 * over || !n.is_multiple_of(over) {
        return Err(Error::invalid(
            "grid_len",
            format!("need a multiple of {over} with at least {} bins, got {n}", 4 * over),
        ));
    }
    let fs = params.n_os as f64 * params.baud_hz;
    let df = fs / n as f64;
    // bins up to |f| = B/2
    let edge = n / over;
    let mut spectrum = vec![Complex64::new(0.0, 0.0); n];
    let freqs: Vec<f64> = (-(edge as i64)..=edge as i64).map(|i| i as f64 * df).collect();
    let h = cd_frequency_response(params, &freqs);
    for (j, hj) in h.into_iter().enumerate() {
        let i = j as i64 - edge as i64;
        let weight = if i.unsigned_abs() as usize == edge { 0.5 } else { 1.0 };
        let bin = i.rem_euclid(n as i64) as usize;
        spectrum[bin] += hj * weight;
    }
    let mut planner = FftPlanner::new();
    planner.plan_fft_inverse(n).process(&mut spectrum);
    // ψ(kT′) = Δf/B · Σ H(f_i) e^{j2π f_i k T′}
    let scale = df / params.baud_hz;
    let mut centred = vec![Complex64::new(0.0, 0.0); n];
    for (k, v) in spectrum.into_iter().enumerate() {
        centred[(k + n / 2) % n] = v * scale;
    }
    Ok(centred)
}

/// Samples the combined impulse response and drops leading/trailing taps below
/// `truncation_rel · max|ψ|`.
pub fn sample_cir(params: &LinkParams, truncation_rel: f64, grid: CirGrid) -> Result<Cir> {
    if !(truncation_rel > 0.0 && truncation_rel <= 1.0) {
        return Err(Error::invalid(
            "truncation_rel",
            format!("must lie in (0, 1], got {truncation_rel}"),
        ));
    }
    let full = sample_cir_untruncated(params, grid)?;
    let n = full.len();
    let peak = full[argmax_abs(&full)].norm();
    let floor = truncation_rel * peak;
    let first = full.iter().position(|t| t.norm() >= floor).unwrap_or(0);
    let last = full.iter().rposition(|t| t.norm() >= floor).unwrap_or(n - 1);
    // The response wraps around the grid period; a retained span reaching the
    // outer eighths means the floor is never reached inside the window.
    let guard = n / 8;
    if first < guard || last >= n - guard {
        return Err(Error::GridResolution {
            grid_len: n,
            truncation_rel,
        });
    }
    Cir::new(full[first..=last].to_vec(), params.sample_period())
}
