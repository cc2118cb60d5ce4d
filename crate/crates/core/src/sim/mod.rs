//! Monte-Carlo link simulation, SNR calibration and the rate bound.

mod convolve;
mod monte_carlo;
mod power;
mod rate;
mod sweep;

pub use convolve::{direct_convolve, OverlapAdd};
pub use monte_carlo::{
    apply_filter, draw_symbols, edge_discard, received_intensity, run_monte_carlo, MonteCarloResult,
};
pub use power::{calibrate_noise, effective_length, electrical_receive_power, launch_power, snr_db, PowerBudget};
pub use rate::{achievable_rate_lb, MIN_CLASS_SAMPLES};
pub use sweep::{Calibration, RxPowerNorm, SweepPoint, SweepSetup};
