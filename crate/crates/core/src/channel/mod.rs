//! Dispersive fiber channel with square-law detection.
//!
//! The transmit sinc pulse and chromatic dispersion are combined into one
//! complex impulse response sampled at twice the symbol rate. Stacking shifted
//! copies of that response and dropping the columns that only ever see the
//! zeros of the upsampled symbol stream gives the convolution operator used
//! by the statistics engine.

mod cir;
mod operator;

pub use cir::{sample_cir, sample_cir_untruncated, Cir, CirGrid, DEFAULT_GRID_LEN, DEFAULT_TRUNCATION};
pub use operator::{build_conv_operator, forward_simulate, ConvOperator};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Physical link parameters. Units are carried in the field names.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LinkParams {
    /// Group-velocity dispersion, s²/km (sign included).
    pub beta2_s2_per_km: f64,
    /// Power attenuation, 1/km.
    pub alpha_per_km: f64,
    /// Kerr coefficient, 1/(W·km). Only enters the launch-power constraint.
    pub gamma_per_w_km: f64,
    pub length_km: f64,
    /// Symbol rate, equal to the two-sided transmit bandwidth.
    pub baud_hz: f64,
    /// Receiver oversampling factor.
    pub n_os: usize,
}

impl Default for LinkParams {
    fn default() -> Self {
        Self {
            beta2_s2_per_km: -2.168e-23,
            alpha_per_km: 0.046,
            gamma_per_w_km: 1.27,
            length_km: 20.0,
            baud_hz: 27e9,
            n_os: 2,
        }
    }
}

impl LinkParams {
    pub fn back_to_back() -> Self {
        Self {
            length_km: 0.0,
            ..Self::default()
        }
    }

    pub fn symbol_period(&self) -> f64 {
        1.0 / self.baud_hz
    }

    /// Receiver sampling period `T_s / N_os`.
    pub fn sample_period(&self) -> f64 {
        self.symbol_period() / self.n_os as f64
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.baud_hz > 0.0 && self.baud_hz.is_finite()) {
            return Err(Error::invalid("baud_hz", format!("must be positive, got {}", self.baud_hz)));
        }
        if !(self.length_km >= 0.0 && self.length_km.is_finite()) {
            return Err(Error::invalid("length_km", format!("must be >= 0, got {}", self.length_km)));
        }
        if !(self.alpha_per_km >= 0.0) {
            return Err(Error::invalid("alpha_per_km", "must be >= 0"));
        }
        if !(self.gamma_per_w_km >= 0.0) {
            return Err(Error::invalid("gamma_per_w_km", "must be >= 0"));
        }
        if !self.beta2_s2_per_km.is_finite() {
            return Err(Error::invalid("beta2_s2_per_km", "must be finite"));
        }
        if self.n_os == 0 {
            return Err(Error::invalid("n_os", "must be >= 1"));
        }
        Ok(())
    }
}

/// All-pass dispersion response `exp(+j·(β₂/2)·ω²·L)` at the given frequencies (Hz).
pub fn cd_frequency_response(params: &LinkParams, freqs_hz: &[f64]) -> Vec<Complex64> {
    let k = 0.5 * params.beta2_s2_per_km * params.length_km;
    freqs_hz
        .iter()
        .map(|&f| {
            let w = 2.0 * PI * f;
            Complex64::from_polar(1.0, k * w * w)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dc_and_back_to_back_are_unity() {
        let p = LinkParams::default();
        assert_eq!(cd_frequency_response(&p, &[0.0])[0], Complex64::new(1.0, 0.0));
        let b2b = LinkParams::back_to_back();
        for h in cd_frequency_response(&b2b, &[-3e10, 1e9, 5e10]) {
            assert_eq!(h, Complex64::new(1.0, 0.0));
        }
    }

    #[test]
    fn response_is_all_pass_and_even() {
        let p = LinkParams::default();
        let f: Vec<f64> = (-50..=50).map(|i| i as f64 * 1e9).collect();
        let h = cd_frequency_response(&p, &f);
        for (i, hi) in h.iter().enumerate() {
            assert!((hi.norm() - 1.0).abs() < 1e-14);
            assert_eq!(*hi, h[h.len() - 1 - i]);
        }
    }

    #[test]
    fn validation() {
        assert!(LinkParams::default().validate().is_ok());
        let bad = LinkParams { baud_hz: 0.0, ..LinkParams::default() };
        assert!(bad.validate().is_err());
        let bad = LinkParams { length_km: -1.0, ..LinkParams::default() };
        assert!(bad.validate().is_err());
    }
}
