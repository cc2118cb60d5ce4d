use crate::channel::LinkParams;
use crate::error::{Error, Result};
use crate::wiener::OutputStats;

/// Launch power allowed by a cap on the accumulated Kerr phase.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerBudget {
    pub phi_max_rad: f64,
    /// Effective length `(1 − e^{−αL})/α`, km.
    pub l_eff_km: f64,
    /// Average optical launch power, W.
    pub p_tx_opt_w: f64,
}

/// `(1 − e^{−αL})/α`, tending to `L` as `αL → 0`.
pub fn effective_length(params: &LinkParams) -> f64 {
    let (a, l) = (params.alpha_per_km, params.length_km);
    if a * l < 1e-12 {
        l
    } else {
        -(-a * l).exp_m1() / a
    }
}

pub fn launch_power(params: &LinkParams, phi_max_rad: f64) -> Result<PowerBudget> {
    params.validate()?;
    if !(params.gamma_per_w_km > 0.0) {
        return Err(Error::invalid(
            "gamma_per_w_km",
            "phase-rotation constraint undefined without a Kerr coefficient",
        ));
    }
    if !(phi_max_rad >= 0.0 && phi_max_rad.is_finite()) {
        return Err(Error::invalid("phi_max_rad", format!("must be >= 0, got {phi_max_rad}")));
    }
    let l_eff = effective_length(params);
    if l_eff <= 0.0 {
        return Err(Error::invalid(
            "length_km",
            "zero effective length leaves the launch power unconstrained",
        ));
    }
    Ok(PowerBudget {
        phi_max_rad,
        l_eff_km: l_eff,
        p_tx_opt_w: phi_max_rad / (params.gamma_per_w_km * l_eff),
    })
}

/// `(tr(C_uu − σ²_η I) + ‖μ_u‖²) / (N′·n_os)`.
///
/// Passing `n_os = 1` gives the power per retained symbol column instead of
/// per received sample.
pub fn electrical_receive_power(stats: &OutputStats, sigma_eta2: f64, n_prime: usize, n_os: usize) -> f64 {
    let k = stats.c_uu.nrows();
    let signal_trace = stats.c_uu.trace() - sigma_eta2 * k as f64;
    (signal_trace + stats.mu_u.norm_squared()) / (n_prime * n_os) as f64
}

/// Noise variance that puts the electrical SNR at `target_snr_el_db`.
pub fn calibrate_noise(stats: &OutputStats, target_snr_el_db: f64, n_prime: usize, n_os: usize) -> f64 {
    let p = electrical_receive_power(stats, stats.sigma_eta2, n_prime, n_os);
    p / 10f64.powf(target_snr_el_db / 10.0)
}

pub fn snr_db(p_rx: f64, sigma_eta2: f64) -> f64 {
    10.0 * (p_rx / sigma_eta2).log10()
}
