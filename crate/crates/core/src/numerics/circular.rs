//! Circular densities and the Von Mises sampler.

use std::f64::consts::{PI, TAU};

use rand::Rng;

use super::bessel::bessel_i0_scaled;
use crate::error::{domain, Result};

/// Wraps an angle to `[-π, π)`.
pub fn wrap_angle(theta: f64) -> f64 {
    let w = (theta + PI).rem_euclid(TAU) - PI;
    if w >= PI {
        -PI
    } else {
        w
    }
}

/// Von Mises density `e^{κ cos(θ-μ)} / (2π I₀(κ))`, evaluated in scaled form.
pub fn von_mises_pdf(theta: f64, mu: f64, kappa: f64) -> Result<f64> {
    if !(kappa >= 0.0) {
        return domain(format!("von_mises_pdf requires kappa >= 0, got {kappa}"));
    }
    if kappa.is_infinite() {
        return domain("von_mises_pdf is a point mass for infinite kappa");
    }
    let i0e = bessel_i0_scaled(kappa)?;
    Ok((kappa * ((theta - mu).cos() - 1.0)).exp() / (TAU * i0e))
}

/// Number of images on each side of the principal one for a wrapped normal
/// with standard deviation `sigma` and period 2π.
pub(crate) fn wrapped_normal_images(sigma: f64) -> i64 {
    (6.0 * sigma / TAU).ceil() as i64 + 2
}

/// Wrapped normal density of period 2π: the image sum of `N(μ, σ²)`.
pub fn wrapped_normal_pdf(theta: f64, mu: f64, sigma: f64) -> Result<f64> {
    if !(sigma > 0.0) || sigma.is_infinite() {
        return domain(format!("wrapped_normal_pdf requires 0 < sigma < inf, got {sigma}"));
    }
    let d = wrap_angle(theta - mu);
    let k_max = wrapped_normal_images(sigma);
    let norm = 1.0 / (sigma * TAU.sqrt());
    let sum: f64 = (-k_max..=k_max)
        .map(|k| {
            let u = (d + TAU * k as f64) / sigma;
            (-0.5 * u * u).exp()
        })
        .sum();
    Ok(norm * sum)
}

/// Concentrations above this are sampled from the Gaussian limit `N(0, 1/κ)`.
const GAUSSIAN_LIMIT: f64 = 1e10;
/// Concentrations below this use the first-order form of the envelope.
const SMALL_KAPPA: f64 = 1e-6;

/// Precomputed envelope constants of the Best-Fisher rejection sampler.
///
/// `s` is the envelope parameter `(1 + ρ²)/(2ρ)`; it is kept split as
/// `s - 1` and `s² - 1` so that large concentrations do not cancel.
#[derive(Debug, Clone, Copy)]
pub struct VonMisesSampler {
    kappa: f64,
    s: f64,
    s_minus_one: f64,
    s_sq_minus_one: f64,
}

impl VonMisesSampler {
    pub fn new(kappa: f64) -> Result<Self> {
        if !(kappa >= 0.0) {
            return domain(format!("Von Mises sampler requires kappa >= 0, got {kappa}"));
        }
        let (s_minus_one, s_plus_one) = if kappa == 0.0 || kappa >= GAUSSIAN_LIMIT {
            (f64::INFINITY, f64::INFINITY)
        } else if kappa < SMALL_KAPPA {
            let s = 1.0 / kappa + kappa;
            (s - 1.0, s + 1.0)
        } else {
            let w = (1.0 + 4.0 * kappa * kappa).sqrt();
            let tau = 1.0 + w;
            let root = (2.0 * tau).sqrt();
            let rho = 2.0 * kappa * tau / ((w + 1.0) * (tau + root));
            let one_minus_rho = if kappa > 1.0 {
                (root - 1.0 - 1.0 / (w + 2.0 * kappa)) / (2.0 * kappa)
            } else {
                1.0 - rho
            };
            let s_minus_one = one_minus_rho * one_minus_rho / (2.0 * rho);
            (s_minus_one, s_minus_one + 2.0)
        };
        Ok(Self {
            kappa,
            s: 1.0 + s_minus_one,
            s_minus_one,
            s_sq_minus_one: s_minus_one * s_plus_one,
        })
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    /// Draws one angle in `[-π, π)`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        if self.kappa == 0.0 {
            return -PI + TAU * rng.random::<f64>();
        }
        if self.kappa >= GAUSSIAN_LIMIT {
            let z: f64 = rng.sample(rand_distr::StandardNormal);
            return wrap_angle(z / self.kappa.sqrt());
        }
        let half_angle = loop {
            let u1: f64 = rng.random();
            let z = (PI * u1).cos();
            let one_minus_z = 2.0 * (0.5 * PI * u1).sin().powi(2);
            let denom = self.s + z;
            // y = κ (s - w) with w = (1 + s z)/(s + z)
            let y = self.kappa * self.s_sq_minus_one / denom;
            let u2: f64 = rng.random();
            if y * (2.0 - y) - u2 > 0.0 || (y / u2).ln() + 1.0 - y >= 0.0 {
                let one_minus_w = self.s_minus_one * one_minus_z / denom;
                break (0.5 * one_minus_w).sqrt().min(1.0).asin();
            }
        };
        let theta = 2.0 * half_angle;
        let signed = if rng.random::<f64>() < 0.5 { -theta } else { theta };
        if signed >= PI {
            -PI
        } else {
            signed
        }
    }
}

/// Draws one sample from the centred Von Mises distribution.
pub fn sample_von_mises<R: Rng + ?Sized>(kappa: f64, rng: &mut R) -> Result<f64> {
    Ok(VonMisesSampler::new(kappa)?.sample(rng))
}
