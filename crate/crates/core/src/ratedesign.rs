//! Per-level code rates from equivalent binary symmetric channels.
//!
//! Level `i` of a domain is modelled as a BSC whose crossover probability
//! is the mass a Von Mises density of concentration `a(σ_i)` puts on the
//! wrong half circle. Radial levels use `σ = σ_z / D`; angular levels are
//! evaluated on every ring with the nominal radius and the rates averaged.

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::channel::{angular_sigma_a2, ChannelParams};
use crate::codes::{available_rates, Rate};
use crate::constellation::RapskConstellation;
use crate::error::{domain, Error, Result};
use crate::mlcodec::{level_order, Domain};
use crate::numerics::{bessel_i0_scaled, binary_entropy, kappa_for_sigma, quad, von_mises_pdf};

pub const DEFAULT_MARGIN: f64 = 0.02;
const QUAD_TOL: f64 = 1e-10;

/// How a crossover probability becomes a rate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RateRule {
    /// `1 - p`.
    #[default]
    OneMinusP,
    /// `1 - h_b(p)`.
    BscCapacity,
}

impl RateRule {
    pub fn rate(&self, p: f64) -> f64 {
        match self {
            RateRule::OneMinusP => 1.0 - p,
            RateRule::BscCapacity => 1.0 - binary_entropy(p),
        }
    }
}

impl FromStr for RateRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "one-minus-p" => Ok(Self::OneMinusP),
            "bsc-capacity" => Ok(Self::BscCapacity),
            other => Err(Error::Config(format!("unknown rate rule '{other}'"))),
        }
    }
}

/// `2 ∫_{π/2}^{π} VM(ψ | 0, a(σ_i)) dψ`, clamped to `[0, 1/2]`.
pub fn level_error_prob(sigma_i: f64) -> Result<f64> {
    if !(sigma_i > 0.0) {
        return domain(format!("level_error_prob requires sigma_i > 0, got {sigma_i}"));
    }
    if sigma_i.is_infinite() {
        return Ok(0.5);
    }
    let kappa = kappa_for_sigma(sigma_i)?;
    let p = if kappa < 2.0 {
        // 1/2 - p = ∫_0^{π/2} sinh(κ cos ψ) / (π I₀(κ)) dψ, accurate near 1/2
        let i0 = bessel_i0_scaled(kappa)? * kappa.exp();
        let gap = quad::integrate(|psi| (kappa * psi.cos()).sinh() / (PI * i0), 0.0, FRAC_PI_2, QUAD_TOL);
        0.5 - gap
    } else {
        let density = |psi: f64| von_mises_pdf(psi, 0.0, kappa).unwrap_or(0.0);
        2.0 * quad::integrate(density, FRAC_PI_2, PI, QUAD_TOL)
    };
    Ok(p.clamp(0.0, 0.5))
}

/// Design of one level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelDesign {
    pub domain: Domain,
    pub level: u32,
    /// Label bit position fed by this level.
    pub row: usize,
    /// Radial levels: the single `σ_i`. Angular levels: one per ring.
    pub sigmas: Vec<f64>,
    /// Crossover probabilities matching `sigmas`.
    pub ring_p: Vec<f64>,
    /// Mean of `ring_p`.
    pub p: f64,
    pub proposed_rate: f64,
    pub quantized_rate: Option<Rate>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateDesign {
    pub rule: RateRule,
    /// Levels in decoding order.
    pub levels: Vec<LevelDesign>,
    /// Mean proposed rate over levels.
    pub overall_proposed: f64,
    /// Mean quantized rate, once quantized.
    pub overall_quantized: Option<f64>,
    pub margin: Option<f64>,
}

impl RateDesign {
    /// Quantized rates in decoding order, if quantized.
    pub fn quantized(&self) -> Option<Vec<Rate>> {
        self.levels.iter().map(|l| l.quantized_rate).collect()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

fn level_design(domain: Domain, level: u32, row: usize, sigmas: Vec<f64>, rule: RateRule) -> Result<LevelDesign> {
    let ring_p = sigmas
        .iter()
        .map(|&s| if s == 0.0 { Ok(0.0) } else { level_error_prob(s) })
        .collect::<Result<Vec<f64>>>()?;
    let count = ring_p.len() as f64;
    let p = ring_p.iter().sum::<f64>() / count;
    let proposed_rate = ring_p.iter().map(|&q| rule.rate(q)).sum::<f64>() / count;
    Ok(LevelDesign {
        domain,
        level,
        row,
        sigmas,
        ring_p,
        p,
        proposed_rate,
        quantized_rate: None,
    })
}

/// Proposed rate for every level of `c` over the channel `p`.
pub fn design_rates(c: &RapskConstellation, p: &ChannelParams, rule: RateRule) -> Result<RateDesign> {
    let radial_sigma = if c.rings() > 1 { p.sigma_z() / c.spacing() } else { 0.0 };
    let per_rad = c.points_per_ring() as f64 / TAU;
    let angular_sigmas = c
        .radii()
        .iter()
        .map(|&r| Ok(per_rad * angular_sigma_a2(r, r, p)?.sqrt()))
        .collect::<Result<Vec<f64>>>()?;
    let mut levels = Vec::new();
    for slot in level_order(c) {
        let shrink = (1u64 << (slot.level - 1)) as f64;
        let sigmas = match slot.domain {
            Domain::Radial => vec![radial_sigma / shrink],
            Domain::Angular => angular_sigmas.iter().map(|s| s / shrink).collect(),
        };
        levels.push(level_design(slot.domain, slot.level, slot.row, sigmas, rule)?);
    }
    let overall_proposed = levels.iter().map(|l| l.proposed_rate).sum::<f64>() / levels.len() as f64;
    Ok(RateDesign {
        rule,
        levels,
        overall_proposed,
        overall_quantized: None,
        margin: None,
    })
}

/// Largest available rate not above `proposed - margin`.
pub fn quantize_rate(proposed: f64, margin: f64) -> Rate {
    let target = proposed - margin + 1e-12;
    available_rates()
        .into_iter()
        .rev()
        .find(|r| r.value() <= target)
        .unwrap_or(Rate::ZERO)
}

/// Maps every proposed rate to an available one with the given back-off.
pub fn quantize_rates(design: &RateDesign, margin: f64) -> RateDesign {
    let mut out = design.clone();
    for level in &mut out.levels {
        level.quantized_rate = Some(quantize_rate(level.proposed_rate, margin));
    }
    let sum: f64 = out.levels.iter().filter_map(|l| l.quantized_rate).map(|r| r.value()).sum();
    out.overall_quantized = Some(sum / out.levels.len() as f64);
    out.margin = Some(margin);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::AngularModel;
    use crate::constellation::RapskParams;

    fn rapsk(n: usize, k: usize, r0: f64) -> RapskConstellation {
        RapskConstellation::new(RapskParams::new(n, k, r0).unwrap()).unwrap()
    }

    #[test]
    fn error_prob_limits() {
        assert!(level_error_prob(0.01).unwrap() < 1e-12);
        assert!((level_error_prob(5.0).unwrap() - 0.5).abs() < 1e-12);
        assert!(level_error_prob(0.0).is_err());
        assert!(level_error_prob(-1.0).is_err());
    }

    #[test]
    fn error_prob_increases() {
        let mut prev = 0.0;
        for i in 1..=300 {
            let s = i as f64 * 0.01;
            let p = level_error_prob(s).unwrap();
            assert!(p >= prev, "sigma {s}");
            if prev > 0.0 && prev < 0.5 - 1e-9 {
                assert!(p > prev, "sigma {s}");
            }
            prev = p;
        }
    }

    #[test]
    fn quantization() {
        assert_eq!(quantize_rate(0.95, DEFAULT_MARGIN), Rate::new(8, 9));
        assert_eq!(quantize_rate(0.10, DEFAULT_MARGIN), Rate::ZERO);
        assert_eq!(quantize_rate(0.51, 0.0), Rate::new(1, 2));
        assert_eq!(quantize_rate(1.0, 0.0), Rate::ONE);
        assert_eq!(quantize_rate(0.5, 0.0), Rate::new(1, 2));
    }

    #[test]
    fn zero_noise_gives_rate_one() {
        let p = ChannelParams::new(0.0, f64::INFINITY, AngularModel::SmoothSaddlePoint).unwrap();
        let d = design_rates(&rapsk(8, 32, 0.6), &p, RateRule::OneMinusP).unwrap();
        assert!(d.levels.iter().all(|l| l.proposed_rate == 1.0));
        assert_eq!(d.overall_proposed, 1.0);
    }

    #[test]
    fn single_ring_has_only_angular_levels() {
        let p = ChannelParams::from_snr_db(15.0, 1000.0, AngularModel::SmoothSaddlePoint).unwrap();
        let d = design_rates(&rapsk(1, 16, 1.0), &p, RateRule::OneMinusP).unwrap();
        assert_eq!(d.levels.len(), 4);
        assert!(d.levels.iter().all(|l| l.domain == Domain::Angular && l.ring_p.len() == 1));
    }

    #[test]
    fn deeper_levels_get_higher_rates() {
        let p = ChannelParams::from_snr_db(22.0, 1600.0, AngularModel::SmoothSaddlePoint).unwrap();
        for rule in [RateRule::OneMinusP, RateRule::BscCapacity] {
            let d = quantize_rates(&design_rates(&rapsk(8, 32, 0.6), &p, rule).unwrap(), DEFAULT_MARGIN);
            for pair in d.levels.windows(2).filter(|w| w[0].domain == w[1].domain) {
                assert!(pair[1].proposed_rate >= pair[0].proposed_rate);
                assert!(pair[1].p <= pair[0].p);
            }
            for l in &d.levels {
                assert!(l.quantized_rate.unwrap().value() <= l.proposed_rate);
                assert!(l.p >= 0.0 && l.p <= 0.5);
                assert!(1.0 - binary_entropy(l.p) <= 1.0 - l.p + 1e-15);
            }
            let q = d.overall_quantized.unwrap();
            assert!(q > 0.0 && q <= d.overall_proposed);
        }
    }
}
