//! Shared numerical kernels: Gaussian tail function, quadrature, 1-D
//! maximization, root finding, and log-domain arithmetic.
//!
//! Every routine here is pure and reentrant: identical inputs give
//! bit-identical outputs, and nothing holds shared mutable state.

mod logdomain;
mod optimize;
mod quadrature;
mod roots;

pub use logdomain::{log_sum_exp, sigmoid, softplus};
pub use optimize::maximize_scalar;
pub use quadrature::{QuadKind, QuadratureRule};
pub use roots::find_root;

use statrs::function::erf::erfc;

/// Standard normal density.
pub fn normal_pdf(y: f64) -> f64 {
    (-0.5 * y * y).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Standard normal CDF.
pub fn normal_cdf(y: f64) -> f64 {
    1.0 - q_function(y)
}

/// Gaussian tail probability Q(x) = integral of the standard normal density
/// over (x, infinity), computed through the complementary error integral.
pub fn q_function(x: f64) -> f64 {
    0.5 * erfc(x / std::f64::consts::SQRT_2)
}
