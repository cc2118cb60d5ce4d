//! Linear MMSE equalization for short-reach intensity-modulation /
//! direct-detection links with chromatic dispersion.
//!
//! The transmitter predistorts unipolar PAM intensities with `√·`, the fiber
//! disperses the field, and a square-law detector sampled at twice the
//! symbol rate produces the observations. [`wiener`] builds affine
//! estimators of the intensity symbols from those observations, [`shaping`]
//! picks the PAM span, and [`sim`] measures the result by Monte Carlo.

// `!(x > 0.0)` is used on purpose throughout: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel;
pub mod cli;
pub mod constellation;
pub mod error;
pub mod linalg;
pub mod shaping;
pub mod sim;
pub mod wiener;

pub use error::{Error, Result};
