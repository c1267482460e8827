//! Signal-processing core for estimating vital signs from facial color traces.
//!
//! The crate is `no_std` (it needs `alloc`) and performs no IO. It covers the
//! whole numerical path: per-frame region-of-interest statistics, filtering of
//! the resulting color traces, spectral and peak-based estimators for heart
//! rate, heart rate variability, SpO2, respiratory rate, blood pressure and a
//! heart-rate-derived stress label, plus a seeded simulator that produces traces
//! and frames with known ground truth.
//!
//! File formats, persistence and the HTTP service live in the `vitalcam` crate.

#![no_std]
#![warn(missing_debug_implementations)]
// Checks are written as `!(x > 0.0)` so that NaN fails them too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

mod error;
pub mod fft;
pub(crate) mod math;
pub mod roi;
pub mod signal;
pub mod sim;
pub mod vitals;

pub use error::{Error, Result};
