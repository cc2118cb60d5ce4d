use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::monte_carlo::run_monte_carlo;
use super::power::{electrical_receive_power, snr_db, PowerBudget};
use super::rate::achievable_rate_lb;
use crate::channel::{Cir, ConvOperator};
use crate::constellation::{build_pam_normalized, predistort, Constellation};
use crate::error::{Error, Result};
use crate::shaping::optimize_span;
use crate::wiener::{design, filter_esr, Target, Variant};

const MAX_CALIBRATION_ROUNDS: usize = 50;

/// Normalization of the received electrical power.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum RxPowerNorm {
    /// Divide by `N′`: power per retained symbol column.
    #[default]
    PerSymbol,
    /// Divide by `N′·N_os`: power per received sample.
    PerSample,
}

impl RxPowerNorm {
    pub fn divisor(&self, n_os: usize) -> usize {
        match self {
            RxPowerNorm::PerSymbol => 1,
            RxPowerNorm::PerSample => n_os,
        }
    }
}

/// Everything shared by the points of one sweep.
pub struct SweepSetup<'a> {
    pub cir: &'a Cir,
    pub op: &'a ConvOperator,
    pub budget: PowerBudget,
    pub order: usize,
    pub n_symbols: usize,
    pub master_seed: u64,
    pub rx_norm: RxPowerNorm,
}

/// Noise level and span agreed on for one target SNR.
#[derive(Debug, Clone, PartialEq)]
pub struct Calibration {
    pub snr_target_db: f64,
    /// SNR actually realized with `sigma_eta2` and the chosen span.
    pub snr_el_db: f64,
    pub sigma_eta2: f64,
    pub d_norm: f64,
    pub breve: Constellation,
    /// Shaping objective at the chosen span.
    pub esr_proxy: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub snr_target_db: f64,
    pub snr_el_db: f64,
    pub variant: Variant,
    pub d_norm: f64,
    /// Exact ESR of the applied filter.
    pub esr_analytic: f64,
    pub esr_proxy: f64,
    pub esr_empirical: f64,
    pub rate_bpcu: f64,
    pub sigma_eta2: f64,
    pub n_symbols: usize,
    pub seed: u64,
}

impl<'a> SweepSetup<'a> {
    /// Received electrical power for the alphabet `breve`, from the exact
    /// statistics of the predistorted stream without noise.
    pub fn receive_power(&self, breve: &Constellation) -> Result<f64> {
        let law = predistort(breve)?.law();
        let stats = self.op.gram().stats(&law, Target::Intensity, 0.0);
        Ok(electrical_receive_power(
            &stats,
            0.0,
            self.op.n_prime(),
            self.rx_norm.divisor(self.op.n_os()),
        ))
    }

    /// The received power depends on the span and the optimal span on the
    /// noise level, so the pair is found by fixed-point iteration starting
    /// from the full span.
    pub fn calibrate(&self, snr_target_db: f64) -> Result<Calibration> {
        if !snr_target_db.is_finite() {
            return Err(Error::invalid("snr_el_db", "must be finite"));
        }
        let p = self.budget.p_tx_opt_w;
        let lin = 10f64.powf(snr_target_db / 10.0);
        let mut d = 1.0;
        let mut sigma_eta2 = self.receive_power(&build_pam_normalized(self.order, p, d)?)? / lin;
        let mut shaped = optimize_span(self.op, self.order, p, sigma_eta2)?;
        for round in 0..MAX_CALIBRATION_ROUNDS {
            if shaped.d_norm == d {
                break;
            }
            if round + 1 == MAX_CALIBRATION_ROUNDS {
                log::warn!("span calibration at {snr_target_db} dB did not settle; last step {d} -> {}", shaped.d_norm);
            }
            d = shaped.d_norm;
            sigma_eta2 = self.receive_power(&shaped.constellation)? / lin;
            shaped = optimize_span(self.op, self.order, p, sigma_eta2)?;
        }
        let p_rx = self.receive_power(&shaped.constellation)?;
        Ok(Calibration {
            snr_target_db,
            snr_el_db: snr_db(p_rx, sigma_eta2),
            sigma_eta2,
            d_norm: shaped.d_norm,
            breve: shaped.constellation,
            esr_proxy: shaped.esr,
        })
    }

    /// Seed for grid point `index` and `variant`, independent of which other
    /// points or variants are run.
    pub fn point_seed(&self, index: usize, variant: Variant) -> u64 {
        let slot = Variant::ALL.iter().position(|v| *v == variant).unwrap_or(0);
        let mut rng = ChaCha8Rng::seed_from_u64(self.master_seed);
        rng.set_stream((index * Variant::ALL.len() + slot) as u64);
        rng.next_u64()
    }

    pub fn evaluate(&self, cal: &Calibration, index: usize, variant: Variant) -> Result<SweepPoint> {
        let filter = design(variant, self.op, &cal.breve, cal.sigma_eta2)?;
        let esr_analytic = filter_esr(self.op, &filter, &cal.breve, cal.sigma_eta2)?;
        let seed = self.point_seed(index, variant);
        let mc = run_monte_carlo(
            self.op,
            self.cir,
            &filter,
            &cal.breve,
            cal.sigma_eta2,
            self.n_symbols,
            seed,
        )?;
        let rate = achievable_rate_lb(&mc.estimates, &mc.symbols, self.order)?;
        Ok(SweepPoint {
            snr_target_db: cal.snr_target_db,
            snr_el_db: cal.snr_el_db,
            variant,
            d_norm: cal.d_norm,
            esr_analytic,
            esr_proxy: cal.esr_proxy,
            esr_empirical: mc.esr_empirical,
            rate_bpcu: rate,
            sigma_eta2: cal.sigma_eta2,
            n_symbols: self.n_symbols,
            seed,
        })
    }

    /// All requested variants at one grid point.
    pub fn run_point(&self, index: usize, snr_target_db: f64, variants: &[Variant]) -> Result<Vec<SweepPoint>> {
        let cal = self.calibrate(snr_target_db)?;
        variants.iter().map(|&v| self.evaluate(&cal, index, v)).collect()
    }
}
