//! Tabulated concentration function `a(t) = A⁻¹(exp(-t²π²/2))`.
//!
//! `a(t)` is the Von Mises concentration matched to a wrapped normal of
//! standard deviation `tπ` on the circle. It is interpolated in
//! `(ln t, ln a)` coordinates with a cubic Hermite spline whose node slopes
//! are the exact derivatives, limited with the Fritsch-Carlson condition so
//! the interpolant stays monotone.

use std::f64::consts::PI;
use std::sync::OnceLock;

use super::bessel::{inverse_bessel_ratio, ratio_derivative, ratio_unchecked};
use crate::error::{domain, Result};

pub const DEFAULT_NODES: usize = 4096;
pub const DEFAULT_T_MIN: f64 = 1e-3;
pub const DEFAULT_T_MAX: f64 = 4.0;

/// Result of a table lookup.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KappaLookup {
    pub kappa: f64,
    /// Set when `t` was below the table range and the value was clamped to
    /// `a(t_min)`.
    pub saturated: bool,
}

/// Direct evaluation of `a(t)` through the inverse Bessel ratio.
pub fn kappa_for_sigma_direct(t: f64) -> Result<f64> {
    if !(t > 0.0) {
        return domain(format!("kappa_for_sigma requires t > 0, got {t}"));
    }
    let r = (-0.5 * t * t * PI * PI).exp();
    if r >= 1.0 {
        return Ok(f64::INFINITY);
    }
    inverse_bessel_ratio(r)
}

#[derive(Debug, Clone)]
pub struct KappaTable {
    log_t_min: f64,
    step: f64,
    t_min: f64,
    t_max: f64,
    log_kappa: Vec<f64>,
    slope: Vec<f64>,
}

impl KappaTable {
    /// Builds a table with `nodes` log-spaced nodes on `[t_min, t_max]`.
    pub fn new(t_min: f64, t_max: f64, nodes: usize) -> Result<Self> {
        if !(t_min > 0.0 && t_max > t_min && nodes >= 2) {
            return domain(format!("invalid kappa table range [{t_min}, {t_max}] with {nodes} nodes"));
        }
        let log_t_min = t_min.ln();
        let step = (t_max.ln() - log_t_min) / (nodes - 1) as f64;
        let mut log_kappa = Vec::with_capacity(nodes);
        let mut slope = Vec::with_capacity(nodes);
        for j in 0..nodes {
            let t = (log_t_min + step * j as f64).exp();
            let kappa = kappa_for_sigma_direct(t)?;
            let r = (-0.5 * t * t * PI * PI).exp();
            let dkappa_dt = -PI * PI * t * r / ratio_derivative(kappa, ratio_unchecked(kappa));
            log_kappa.push(kappa.ln());
            slope.push(t / kappa * dkappa_dt);
        }
        // Fritsch-Carlson limiter on the (decreasing) data.
        for j in 0..nodes - 1 {
            let delta = (log_kappa[j + 1] - log_kappa[j]) / step;
            let alpha = slope[j] / delta;
            let beta = slope[j + 1] / delta;
            let norm = alpha * alpha + beta * beta;
            if norm > 9.0 {
                let tau = 3.0 / norm.sqrt();
                slope[j] = tau * alpha * delta;
                slope[j + 1] = tau * beta * delta;
            }
        }
        Ok(Self {
            log_t_min,
            step,
            t_min,
            t_max,
            log_kappa,
            slope,
        })
    }

    pub fn range(&self) -> (f64, f64) {
        (self.t_min, self.t_max)
    }

    pub fn nodes(&self) -> usize {
        self.log_kappa.len()
    }

    /// `a(t)`; clamps below `t_min` and evaluates directly above `t_max`.
    pub fn lookup(&self, t: f64) -> Result<KappaLookup> {
        if !(t > 0.0) {
            return domain(format!("kappa_for_sigma requires t > 0, got {t}"));
        }
        if t < self.t_min {
            return Ok(KappaLookup {
                kappa: self.log_kappa[0].exp(),
                saturated: true,
            });
        }
        if t > self.t_max {
            return Ok(KappaLookup {
                kappa: kappa_for_sigma_direct(t)?,
                saturated: false,
            });
        }
        let x = (t.ln() - self.log_t_min) / self.step;
        let j = (x.floor() as usize).min(self.log_kappa.len() - 2);
        let s = x - j as f64;
        let (y0, y1) = (self.log_kappa[j], self.log_kappa[j + 1]);
        let (m0, m1) = (self.slope[j] * self.step, self.slope[j + 1] * self.step);
        let s2 = s * s;
        let s3 = s2 * s;
        let value = (2.0 * s3 - 3.0 * s2 + 1.0) * y0
            + (s3 - 2.0 * s2 + s) * m0
            + (-2.0 * s3 + 3.0 * s2) * y1
            + (s3 - s2) * m1;
        Ok(KappaLookup {
            kappa: value.exp(),
            saturated: false,
        })
    }

    /// Process-wide table with the default resolution, built on first use.
    pub fn global() -> &'static KappaTable {
        static TABLE: OnceLock<KappaTable> = OnceLock::new();
        TABLE.get_or_init(|| {
            KappaTable::new(DEFAULT_T_MIN, DEFAULT_T_MAX, DEFAULT_NODES)
                .expect("default kappa table parameters are valid")
        })
    }
}

/// `a(t)` served from the global table.
pub fn kappa_for_sigma(t: f64) -> Result<f64> {
    Ok(KappaTable::global().lookup(t)?.kappa)
}
