//! Simulation of photon-echo quantum memories in inhomogeneously broadened
//! atomic ensembles.
//!
//! Two storage protocols are covered: controlled reversible inhomogeneous
//! broadening (CRIB), where a Stark-broadened absorption line is rephased by
//! flipping the sign of the applied field, and the atomic frequency comb
//! (AFC), where a periodic absorption structure rephases the collective
//! dipole at multiples of the inverse peak spacing.
//!
//! The crate is organised along the experimental pipeline:
//!
//! * [`spectral`] builds absorption profiles (single lines, combs), applies
//!   Stark broadening and samples discrete ensembles.
//! * [`pumping`] prepares those profiles by optical pumping between two ground
//!   Zeeman levels and tracks the residual excited population.
//! * [`echo`] propagates a weak pulse through the prepared medium, evaluates
//!   the closed-form efficiency, timing and phase laws, and carries a
//!   brute-force dipole-sum oracle.
//! * [`detection`] turns intensities into photon-count histograms and fits
//!   interference fringes.
//! * [`harness`] runs named scenarios from unit-checked configuration files.

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod detection;
pub mod echo;
pub mod error;
pub mod harness;
pub mod pumping;
pub mod spectral;
pub mod units;

pub use error::{Error, Result};

/// `sqrt(8 ln 2)`: ratio of a Gaussian's FWHM to its standard deviation.
pub const FWHM_PER_SIGMA: f64 = 2.354_820_045_030_949_3;
