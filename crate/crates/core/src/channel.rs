//! Joint white and phase noise channel `y = e^{jφ} x + z`.
//!
//! `z` has independent real and imaginary parts of variance `σ_z²` each and
//! `φ` is drawn i.i.d. per use from a centred Von Mises distribution of
//! concentration `κ_φ`. With unit constellation power the SNR is
//! `1 / (2σ_z²)`.
//!
//! The demapper treats the radial noise as `N(0, σ_z²)` and the angular
//! noise as `N(0, σ_a²)` with `σ_a² = σ_w² + σ_p²`, where `σ_w²` comes from
//! the white noise at the given radius and `σ_p²` from the phase noise.

use std::f64::consts::TAU;
use std::str::FromStr;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{domain, parameter, Error, Result};
use crate::numerics::{bessel_i0_scaled, VonMisesSampler};

/// Gaussian approximation used for the angular noise variance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AngularModel {
    /// Curvature match with the `2π` normalisation for the white-noise term.
    PaperSaddlePoint,
    /// Curvature match with the `√(2π)` normalisation for both terms.
    #[default]
    SmoothSaddlePoint,
    /// `σ_z²/(ρ_x ρ_y)` and `1/κ_φ`.
    HighSnr,
}

impl FromStr for AngularModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "paper" => Ok(Self::PaperSaddlePoint),
            "smooth" => Ok(Self::SmoothSaddlePoint),
            "highsnr" => Ok(Self::HighSnr),
            other => Err(Error::Config(format!("unknown angular model '{other}'"))),
        }
    }
}

/// Per-quadrature white noise variance for an SNR in dB.
pub fn sigma_z2_from_snr_db(snr_db: f64) -> f64 {
    0.5 * 10f64.powf(-snr_db / 10.0)
}

pub fn snr_db_from_sigma_z2(sigma_z2: f64) -> f64 {
    -10.0 * (2.0 * sigma_z2).log10()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelParams {
    /// Per-quadrature white noise variance.
    pub sigma_z2: f64,
    /// Phase noise concentration; `f64::INFINITY` disables phase noise.
    pub kappa_phi: f64,
    pub angular_model: AngularModel,
}

impl ChannelParams {
    pub fn new(sigma_z2: f64, kappa_phi: f64, angular_model: AngularModel) -> Result<Self> {
        if !(sigma_z2 >= 0.0) || sigma_z2.is_infinite() {
            return parameter(format!("sigma_z2 must be finite and >= 0, got {sigma_z2}"));
        }
        if !(kappa_phi > 0.0) {
            return parameter(format!("kappa_phi must be > 0, got {kappa_phi}"));
        }
        Ok(Self {
            sigma_z2,
            kappa_phi,
            angular_model,
        })
    }

    pub fn from_snr_db(snr_db: f64, kappa_phi: f64, angular_model: AngularModel) -> Result<Self> {
        Self::new(sigma_z2_from_snr_db(snr_db), kappa_phi, angular_model)
    }

    pub fn sigma_z(&self) -> f64 {
        self.sigma_z2.sqrt()
    }

    pub fn snr_db(&self) -> f64 {
        snr_db_from_sigma_z2(self.sigma_z2)
    }

    pub fn has_phase_noise(&self) -> bool {
        self.kappa_phi.is_finite()
    }
}

/// A channel instance with its phase sampler prepared.
#[derive(Debug, Clone)]
pub struct Channel {
    params: ChannelParams,
    sigma_z: f64,
    phase: Option<VonMisesSampler>,
}

impl Channel {
    pub fn new(params: ChannelParams) -> Result<Self> {
        let phase = if params.has_phase_noise() {
            Some(VonMisesSampler::new(params.kappa_phi)?)
        } else {
            None
        };
        Ok(Self {
            params,
            sigma_z: params.sigma_z(),
            phase,
        })
    }

    pub fn params(&self) -> &ChannelParams {
        &self.params
    }

    /// One channel use.
    pub fn transmit<R: Rng + ?Sized>(&self, x: Complex64, rng: &mut R) -> Complex64 {
        let rotated = match &self.phase {
            Some(s) => x * Complex64::from_polar(1.0, s.sample(rng)),
            None => x,
        };
        if self.sigma_z == 0.0 {
            return rotated;
        }
        let re: f64 = rng.sample(rand_distr::StandardNormal);
        let im: f64 = rng.sample(rand_distr::StandardNormal);
        rotated + Complex64::new(re, im) * self.sigma_z
    }
}

/// One channel use with freshly prepared parameters.
pub fn transmit<R: Rng + ?Sized>(x: Complex64, p: &ChannelParams, rng: &mut R) -> Result<Complex64> {
    Ok(Channel::new(*p)?.transmit(x, rng))
}

/// Standard deviation of the radial noise, `σ_z`.
pub fn radial_noise_sigma(p: &ChannelParams) -> f64 {
    p.sigma_z()
}

/// `(κ / (c · e^{-κ} I₀(κ)))^{-2/3}`: the variance of the Gaussian whose
/// curvature at the mode matches a Von Mises density of concentration `κ`.
fn curvature_matched_variance(kappa: f64, normaliser: f64) -> Result<f64> {
    if kappa.is_infinite() {
        return Ok(0.0);
    }
    let i0e = bessel_i0_scaled(kappa)?;
    Ok((kappa / (normaliser * i0e)).powf(-2.0 / 3.0))
}

/// Angular variance caused by the white noise for a point of radius
/// `rho_x` observed at radius `rho_y`, with `κ_ρ = ρ_x ρ_y / σ_z²`.
/// Zero when there is no white noise.
pub fn angular_sigma_w2(rho_x: f64, rho_y: f64, p: &ChannelParams) -> Result<f64> {
    if !(rho_x >= 0.0 && rho_y >= 0.0) {
        return domain(format!("radii must be non-negative, got {rho_x}, {rho_y}"));
    }
    if p.sigma_z2 == 0.0 {
        return Ok(0.0);
    }
    let kappa = rho_x * rho_y / p.sigma_z2;
    if !(kappa > 0.0) {
        return domain("angular white-noise variance undefined for kappa_rho = 0");
    }
    match p.angular_model {
        AngularModel::PaperSaddlePoint => curvature_matched_variance(kappa, TAU),
        AngularModel::SmoothSaddlePoint => curvature_matched_variance(kappa, TAU.sqrt()),
        AngularModel::HighSnr => Ok(1.0 / kappa),
    }
}

/// Angular variance caused by the phase noise.
pub fn angular_sigma_p2(p: &ChannelParams) -> Result<f64> {
    if !(p.kappa_phi > 0.0) {
        return domain(format!("kappa_phi must be > 0, got {}", p.kappa_phi));
    }
    match p.angular_model {
        AngularModel::HighSnr => Ok(1.0 / p.kappa_phi),
        _ => curvature_matched_variance(p.kappa_phi, TAU.sqrt()),
    }
}

/// Total angular variance `σ_w² + σ_p²`.
pub fn angular_sigma_a2(rho_x: f64, rho_y: f64, p: &ChannelParams) -> Result<f64> {
    Ok(angular_sigma_w2(rho_x, rho_y, p)? + angular_sigma_p2(p)?)
}

/// Exact Rician density of the received magnitude `ρ_y` given `ρ_x`.
pub fn rician_pdf(rho_y: f64, rho_x: f64, sigma_z2: f64) -> Result<f64> {
    if !(sigma_z2 > 0.0) {
        return domain(format!("rician_pdf requires sigma_z2 > 0, got {sigma_z2}"));
    }
    if rho_y < 0.0 {
        return Ok(0.0);
    }
    let kappa = rho_x * rho_y / sigma_z2;
    let i0e = bessel_i0_scaled(kappa)?;
    Ok(rho_y / sigma_z2 * i0e * (-(rho_y - rho_x).powi(2) / (2.0 * sigma_z2)).exp())
}

/// Exact density of the phase error given both radii: Von Mises with
/// concentration `ρ_x ρ_y / σ_z²`.
pub fn conditional_phase_pdf(theta: f64, rho_x: f64, rho_y: f64, sigma_z2: f64) -> Result<f64> {
    if !(sigma_z2 > 0.0) {
        return domain(format!("conditional_phase_pdf requires sigma_z2 > 0, got {sigma_z2}"));
    }
    crate::numerics::von_mises_pdf(theta, 0.0, rho_x * rho_y / sigma_z2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    fn params(sigma_z2: f64, kappa_phi: f64, model: AngularModel) -> ChannelParams {
        ChannelParams::new(sigma_z2, kappa_phi, model).unwrap()
    }

    #[test]
    fn noiseless_channel_is_identity() {
        let mut rng = ChaCha12Rng::seed_from_u64(3);
        let x = Complex64::new(0.3, -0.8);
        let p = params(0.0, f64::INFINITY, AngularModel::default());
        assert_eq!(transmit(x, &p, &mut rng).unwrap(), x);
        let p = params(0.0, 50.0, AngularModel::default());
        for _ in 0..100 {
            let y = transmit(x, &p, &mut rng).unwrap();
            assert!((y.norm() - x.norm()).abs() < 1e-15);
        }
    }

    #[test]
    fn snr_conversion() {
        assert!((sigma_z2_from_snr_db(0.0) - 0.5).abs() < 1e-15);
        assert!((snr_db_from_sigma_z2(sigma_z2_from_snr_db(27.3)) - 27.3).abs() < 1e-12);
        assert!(ChannelParams::new(-1.0, 1.0, AngularModel::HighSnr).is_err());
        assert!(ChannelParams::new(0.1, 0.0, AngularModel::HighSnr).is_err());
    }

    #[test]
    fn radial_sigma() {
        assert_eq!(radial_noise_sigma(&params(0.0025, 1.0, AngularModel::HighSnr)), 0.05);
        assert_eq!(radial_noise_sigma(&params(0.0, 1.0, AngularModel::HighSnr)), 0.0);
    }

    #[test]
    fn angular_variance_models() {
        let p = params(0.01, f64::INFINITY, AngularModel::HighSnr);
        assert!((angular_sigma_w2(1.0, 1.0, &p).unwrap() - 0.01).abs() < 1e-15);

        let p = params(0.01, f64::INFINITY, AngularModel::SmoothSaddlePoint);
        let w = angular_sigma_w2(1.0, 1.0, &p).unwrap();
        assert!((w - 0.01).abs() < 0.02 * 0.01);

        let p = params(0.01, f64::INFINITY, AngularModel::PaperSaddlePoint);
        let w = angular_sigma_w2(1.0, 1.0, &p).unwrap();
        assert!((w - 0.0184).abs() < 5e-4, "{w}");
        assert!((w - TAU.cbrt() / 100.0).abs() < 0.01 * w);

        assert!(angular_sigma_w2(0.0, 1.0, &p).is_err());
    }

    #[test]
    fn phase_variance() {
        let p = params(0.01, f64::INFINITY, AngularModel::SmoothSaddlePoint);
        assert_eq!(angular_sigma_p2(&p).unwrap(), 0.0);
        let p = params(0.01, 1e4, AngularModel::SmoothSaddlePoint);
        assert!((angular_sigma_p2(&p).unwrap() - 1e-4).abs() < 1e-6);
    }

    #[test]
    fn total_angular_variance_is_additive() {
        let p = params(1e-4, 1e4, AngularModel::HighSnr);
        assert!((angular_sigma_a2(1.0, 1.0, &p).unwrap() - 2e-4).abs() < 1e-18);
        let p = params(1e-3, f64::INFINITY, AngularModel::SmoothSaddlePoint);
        assert_eq!(angular_sigma_a2(0.7, 0.8, &p).unwrap(), angular_sigma_w2(0.7, 0.8, &p).unwrap());
        let p = params(0.0, 900.0, AngularModel::SmoothSaddlePoint);
        assert_eq!(angular_sigma_a2(0.7, 0.8, &p).unwrap(), angular_sigma_p2(&p).unwrap());
        for model in [AngularModel::PaperSaddlePoint, AngularModel::SmoothSaddlePoint, AngularModel::HighSnr] {
            let p = params(2e-3, 1600.0, model);
            let a = angular_sigma_a2(0.9, 1.1, &p).unwrap();
            assert_eq!(a, angular_sigma_w2(0.9, 1.1, &p).unwrap() + angular_sigma_p2(&p).unwrap());
        }
    }

    #[test]
    fn rician_reduces_to_rayleigh() {
        let s2: f64 = 0.04;
        for rho in [0.05_f64, 0.2, 0.5] {
            let want = rho / s2 * (-rho * rho / (2.0 * s2)).exp();
            assert!((rician_pdf(rho, 0.0, s2).unwrap() - want).abs() < 1e-12);
        }
        assert!(rician_pdf(0.1, 0.0, 0.0).is_err());
    }

    #[test]
    fn model_names_parse() {
        assert_eq!("paper".parse::<AngularModel>().unwrap(), AngularModel::PaperSaddlePoint);
        assert_eq!("smooth".parse::<AngularModel>().unwrap(), AngularModel::SmoothSaddlePoint);
        assert_eq!("highsnr".parse::<AngularModel>().unwrap(), AngularModel::HighSnr);
        assert!("other".parse::<AngularModel>().is_err());
    }
}
