//! Special functions, circular distributions and sampling shared by the
//! rest of the crate.

mod bessel;
mod circular;
mod kappa;
pub mod quad;

pub use bessel::{bessel_i0_scaled, bessel_i1_scaled, bessel_ratio, inverse_bessel_ratio};
pub use circular::{sample_von_mises, von_mises_pdf, wrap_angle, wrapped_normal_pdf, VonMisesSampler};
pub use kappa::{kappa_for_sigma, kappa_for_sigma_direct, KappaLookup, KappaTable};

/// Standard normal CDF `Φ(x) = erfc(-x/√2)/2`.
pub fn std_normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

/// Binary entropy in bits.
pub fn binary_entropy(p: f64) -> f64 {
    if p <= 0.0 || p >= 1.0 {
        0.0
    } else {
        -p * p.log2() - (1.0 - p) * (1.0 - p).log2()
    }
}
