//! Channel estimation for IRS-assisted multi-user links.
//!
//! The equivalent BS-to-user channel through a passive reflecting surface has
//! Bessel-K distributed rows. Writing each row as a Gaussian scale mixture
//! turns the MMSE estimator into a per-user scalar shrink of the decorrelated
//! pilot observation, with closed-form weights built from the upper
//! incomplete gamma function at negative order.
//!
//! Modules, bottom-up:
//!
//! - [`specfun`]: Bessel K, incomplete gamma, adaptive quadrature.
//! - [`channel`]: geometry, path loss, channel synthesis.
//! - [`stats`]: closed-form densities and goodness-of-fit helpers.
//! - [`estimator`]: pilot model, shrinkage estimators, MSE bounds.
//! - [`mc`]: seeded Monte Carlo harness and parameter sweeps.
//! - [`csv`]: the sweep output format.
//! - [`validate`]: oracle checks behind `irs-mmse validate`.

pub mod channel;
pub mod csv;
pub mod error;
pub mod estimator;
pub mod mc;
pub mod rng;
pub mod specfun;
pub mod stats;
pub mod validate;

pub use error::{Error, Result};
pub use num_complex::Complex64;
