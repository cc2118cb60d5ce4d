use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

use crate::error::{Error, Result};

/// Block FFT convolution with a fixed kernel.
pub struct OverlapAdd {
    kernel_len: usize,
    fft_len: usize,
    block_len: usize,
    kernel_spec: Vec<Complex64>,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl OverlapAdd {
    pub fn new(kernel: &[Complex64]) -> Result<Self> {
        if kernel.is_empty() {
            return Err(Error::invalid("kernel", "must not be empty"));
        }
        let m = kernel.len();
        let fft_len = (8 * m).next_power_of_two().max(1024);
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(fft_len);
        let inv = planner.plan_fft_inverse(fft_len);
        let mut kernel_spec = vec![Complex64::new(0.0, 0.0); fft_len];
        kernel_spec[..m].copy_from_slice(kernel);
        fwd.process(&mut kernel_spec);
        // fold the inverse transform's 1/n into the kernel
        let scale = 1.0 / fft_len as f64;
        for k in &mut kernel_spec {
            *k *= scale;
        }
        Ok(Self {
            kernel_len: m,
            fft_len,
            block_len: fft_len - m + 1,
            kernel_spec,
            fwd,
            inv,
        })
    }

    /// Full linear convolution, length `x.len() + M − 1`.
    pub fn convolve(&self, x: &[Complex64]) -> Vec<Complex64> {
        if x.is_empty() {
            return Vec::new();
        }
        let out_len = x.len() + self.kernel_len - 1;
        let mut out = vec![Complex64::new(0.0, 0.0); out_len];
        let mut buf = vec![Complex64::new(0.0, 0.0); self.fft_len];
        for (b, chunk) in x.chunks(self.block_len).enumerate() {
            let start = b * self.block_len;
            buf[..chunk.len()].copy_from_slice(chunk);
            buf[chunk.len()..].fill(Complex64::new(0.0, 0.0));
            self.fwd.process(&mut buf);
            for (v, h) in buf.iter_mut().zip(&self.kernel_spec) {
                *v *= h;
            }
            self.inv.process(&mut buf);
            let valid = (chunk.len() + self.kernel_len - 1).min(out_len - start);
            for (o, v) in out[start..start + valid].iter_mut().zip(&buf) {
                *o += v;
            }
        }
        out
    }

    /// Convolution of a real sequence, keeping only the real part of the result.
    pub fn convolve_real(&self, x: &[f64]) -> Vec<f64> {
        let xc: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.convolve(&xc).into_iter().map(|v| v.re).collect()
    }
}

/// Reference `O(N·M)` convolution.
pub fn direct_convolve(x: &[Complex64], h: &[Complex64]) -> Vec<Complex64> {
    if x.is_empty() || h.is_empty() {
        return Vec::new();
    }
    let mut out = vec![Complex64::new(0.0, 0.0); x.len() + h.len() - 1];
    for (i, xi) in x.iter().enumerate() {
        for (j, hj) in h.iter().enumerate() {
            out[i + j] += xi * hj;
        }
    }
    out
}
