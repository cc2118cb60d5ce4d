//! Configuration-driven experiment runner behind the `imdd-wiener` binary.
//!
//! Each command writes one CSV document: a `# schema:` line naming the
//! format version, further `#` metadata lines, a header row and data rows.

mod config;

pub use config::{CirConfig, ExperimentConfig, KPolicy, ModulationConfig, NamedK, SweepConfig, MIN_SYMBOLS};

use rayon::prelude::*;
use std::fmt;
use std::io::Write;

use crate::channel::{build_conv_operator, sample_cir, Cir, CirGrid, ConvOperator};
use crate::error::{Error, Result};
use crate::sim::{effective_length, launch_power, PowerBudget, SweepPoint, SweepSetup};
use crate::wiener::{design, Variant};

/// A module error tagged with the sweep point that raised it, if any.
#[derive(Debug, Clone, PartialEq)]
pub struct CommandError {
    pub point: Option<usize>,
    pub error: Error,
}

impl CommandError {
    fn at(point: usize) -> impl Fn(Error) -> Self {
        move |error| Self {
            point: Some(point),
            error,
        }
    }

    /// Single machine-readable line for stderr.
    pub fn line(&self) -> String {
        let point = self.point.map_or_else(|| "-".to_string(), |p| p.to_string());
        let msg = self.error.to_string().replace('\n', " ");
        format!("error: kind={} point={} msg={}", self.error.kind(), point, msg)
    }
}

impl fmt::Display for CommandError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.line())
    }
}

impl std::error::Error for CommandError {}

impl From<Error> for CommandError {
    fn from(error: Error) -> Self {
        Self { point: None, error }
    }
}

impl From<std::io::Error> for CommandError {
    fn from(e: std::io::Error) -> Self {
        Error::from(e).into()
    }
}

pub type CommandResult<T> = std::result::Result<T, CommandError>;

/// Sampled response, operator and launch power for a configuration.
pub struct Channel {
    pub cir: Cir,
    pub op: ConvOperator,
    pub budget: PowerBudget,
}

pub fn build_channel(cfg: &ExperimentConfig) -> Result<Channel> {
    cfg.validate()?;
    let cir = sample_cir(&cfg.link, cfg.cir.truncation_rel, CirGrid { len: cfg.cir.grid_len })?;
    let k = cfg.sweep.observations.resolve(cir.len());
    let op = build_conv_operator(&cir, k, cfg.link.n_os)?;
    let budget = match cfg.modulation.launch_power_w {
        Some(p) => PowerBudget {
            phi_max_rad: cfg.modulation.phi_max_rad,
            l_eff_km: effective_length(&cfg.link),
            p_tx_opt_w: p,
        },
        None => launch_power(&cfg.link, cfg.modulation.phi_max_rad)?,
    };
    Ok(Channel { cir, op, budget })
}

impl Channel {
    pub fn setup<'a>(&'a self, cfg: &ExperimentConfig) -> SweepSetup<'a> {
        SweepSetup {
            cir: &self.cir,
            op: &self.op,
            budget: self.budget,
            order: cfg.modulation.pam_order,
            n_symbols: cfg.sweep.n_symbols,
            master_seed: cfg.sweep.master_seed,
            rx_norm: cfg.sweep.rx_power_norm,
        }
    }

    fn write_meta<W: Write>(&self, cfg: &ExperimentConfig, out: &mut W) -> Result<()> {
        writeln!(out, "# pam_order: {}", cfg.modulation.pam_order)?;
        writeln!(out, "# length_km: {}", cfg.link.length_km)?;
        writeln!(out, "# baud_hz: {:e}", cfg.link.baud_hz)?;
        writeln!(out, "# taps_m: {}", self.cir.len())?;
        writeln!(out, "# observations_k: {}", self.op.k())?;
        writeln!(out, "# p_tx_opt_w: {:.10e}", self.budget.p_tx_opt_w)?;
        writeln!(out, "# rx_power_norm: {}", rx_norm_name(cfg))?;
        Ok(())
    }
}

fn rx_norm_name(cfg: &ExperimentConfig) -> &'static str {
    match cfg.sweep.rx_power_norm {
        crate::sim::RxPowerNorm::PerSymbol => "per_symbol",
        crate::sim::RxPowerNorm::PerSample => "per_sample",
    }
}

fn db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// Writes the sampled impulse response.
pub fn cmd_cir<W: Write>(cfg: &ExperimentConfig, out: W) -> CommandResult<()> {
    cfg.validate()?;
    let cir = sample_cir(&cfg.link, cfg.cir.truncation_rel, CirGrid { len: cfg.cir.grid_len })?;
    cir.write_csv(out)?;
    Ok(())
}

/// Calibrates one SNR point and writes the taps of the requested filter.
pub fn cmd_design<W: Write>(
    cfg: &ExperimentConfig,
    snr_el_db: f64,
    variant: Variant,
    mut out: W,
) -> CommandResult<()> {
    let ch = build_channel(cfg)?;
    let cal = ch.setup(cfg).calibrate(snr_el_db)?;
    let filter = design(variant, &ch.op, &cal.breve, cal.sigma_eta2)?;
    let meta = [
        ("snr_el_db", format!("{:.6}", cal.snr_el_db)),
        ("d_norm", format!("{:.6}", cal.d_norm)),
        ("sigma_eta2", format!("{:.10e}", cal.sigma_eta2)),
    ];
    filter.write_csv_with_meta(&mut out, &meta)?;
    Ok(())
}

/// Optimized span per grid point.
pub fn cmd_shape<W: Write>(cfg: &ExperimentConfig, mut out: W) -> CommandResult<()> {
    let ch = build_channel(cfg)?;
    let setup = ch.setup(cfg);
    let cals = cfg
        .sweep
        .snr_grid_db
        .par_iter()
        .enumerate()
        .map(|(i, &snr)| setup.calibrate(snr).map_err(CommandError::at(i)))
        .collect::<CommandResult<Vec<_>>>()?;
    writeln!(out, "# schema: imdd-wiener/shape/v1")?;
    ch.write_meta(cfg, &mut out)?;
    writeln!(out, "snr_target_db,snr_el_db,d_norm,esr_analytic_db,sigma_eta2")?;
    for c in cals {
        writeln!(
            out,
            "{:.6},{:.6},{:.6},{:.6},{:.10e}",
            c.snr_target_db,
            c.snr_el_db,
            c.d_norm,
            db(c.esr_proxy),
            c.sigma_eta2
        )?;
    }
    Ok(())
}

/// Runs every (grid point × variant) and returns the rows in grid order.
pub fn run_sweep(cfg: &ExperimentConfig, ch: &Channel, variants: &[Variant]) -> CommandResult<Vec<SweepPoint>> {
    let setup = ch.setup(cfg);
    let rows = cfg
        .sweep
        .snr_grid_db
        .par_iter()
        .enumerate()
        .map(|(i, &snr)| {
            log::info!("sweep point {i}: {snr} dB");
            setup.run_point(i, snr, variants).map_err(CommandError::at(i))
        })
        .collect::<CommandResult<Vec<_>>>()?;
    Ok(rows.into_iter().flatten().collect())
}

pub const SWEEP_HEADER: &str =
    "snr_target_db,snr_el_db,variant,d_norm,esr_analytic_db,esr_proxy_db,esr_empirical_db,rate_bpcu,sigma_eta2,seed";

/// Full pipeline: calibration, shaping, filter design, Monte Carlo and rate bound.
pub fn cmd_sweep<W: Write>(cfg: &ExperimentConfig, variants: &[Variant], mut out: W) -> CommandResult<()> {
    let ch = build_channel(cfg)?;
    let rows = run_sweep(cfg, &ch, variants)?;
    writeln!(out, "# schema: imdd-wiener/sweep/v1")?;
    ch.write_meta(cfg, &mut out)?;
    writeln!(out, "# n_symbols: {}", cfg.sweep.n_symbols)?;
    writeln!(out, "# master_seed: {}", cfg.sweep.master_seed)?;
    writeln!(out, "{SWEEP_HEADER}")?;
    for r in rows {
        writeln!(
            out,
            "{:.6},{:.6},{},{:.6},{:.6},{:.6},{:.6},{:.6},{:.10e},{}",
            r.snr_target_db,
            r.snr_el_db,
            r.variant,
            r.d_norm,
            db(r.esr_analytic),
            db(r.esr_proxy),
            db(r.esr_empirical),
            r.rate_bpcu,
            r.sigma_eta2,
            r.seed
        )?;
    }
    Ok(())
}
