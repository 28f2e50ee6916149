//! Scalar special functions used by the closed-form densities and weights,
//! plus the adaptive quadrature that serves as their independent oracle.

mod bessel;
mod gamma;
pub mod quadrature;

pub use bessel::{bessel_k, log_bessel_k};
pub use gamma::{log_scaled_upper_gamma, log_upper_incomplete_gamma, upper_incomplete_gamma};
pub use quadrature::{adaptive_quadrature, integrate, integrate_half_line, Integral, QuadratureSpec};

/// `ln Γ(x)` for `x > 0`.
pub fn ln_gamma(x: f64) -> f64 {
    statrs::function::gamma::ln_gamma(x)
}
