//! Exponentially scaled modified Bessel functions of order 0 and 1 and the
//! ratio `A(κ) = I₁(κ)/I₀(κ)` with its inverse.

use crate::error::{domain, Result};

/// Below this argument the power series is used, above it the asymptotic
/// expansion. At 25 the smallest asymptotic term is near `e^{-50}`, so both
/// branches are accurate to working precision.
const SERIES_LIMIT: f64 = 25.0;

/// `e^{-x} I_ν(x)` by the ascending series, for `ν ∈ {0, 1}`.
fn scaled_series(order: u32, x: f64) -> f64 {
    let q = 0.25 * x * x;
    let mut term = if order == 0 { 1.0 } else { 0.5 * x };
    let mut sum = term;
    let nu = order as f64;
    let mut k = 1.0;
    loop {
        term *= q / (k * (k + nu));
        sum += term;
        if term <= sum * 1e-17 {
            break;
        }
        k += 1.0;
    }
    sum * (-x).exp()
}

/// Sum of the asymptotic series `Σ (-1)^k a_k(ν) / x^k` (without the
/// `1/sqrt(2πx)` prefactor).
fn asymptotic_sum(order: u32, x: f64) -> f64 {
    let mu = 4.0 * (order * order) as f64;
    let mut term = 1.0_f64;
    let mut sum = 1.0;
    for k in 1..200 {
        let odd = (2 * k - 1) as f64;
        let next = -term * (mu - odd * odd) / (k as f64 * 8.0 * x);
        if next.abs() >= term.abs() {
            break;
        }
        term = next;
        sum += term;
        if term.abs() <= sum.abs() * 1e-17 {
            break;
        }
    }
    sum
}

fn scaled(order: u32, x: f64) -> f64 {
    if x < SERIES_LIMIT {
        scaled_series(order, x)
    } else {
        asymptotic_sum(order, x) / (2.0 * std::f64::consts::PI * x).sqrt()
    }
}

/// `e^{-x} I₀(x)` for `x ≥ 0`. Finite for every finite argument.
pub fn bessel_i0_scaled(x: f64) -> Result<f64> {
    if !(x >= 0.0) {
        return domain(format!("bessel_i0_scaled requires x >= 0, got {x}"));
    }
    if x.is_infinite() {
        return Ok(0.0);
    }
    Ok(scaled(0, x))
}

/// `e^{-x} I₁(x)` for `x ≥ 0`.
pub fn bessel_i1_scaled(x: f64) -> Result<f64> {
    if !(x >= 0.0) {
        return domain(format!("bessel_i1_scaled requires x >= 0, got {x}"));
    }
    if x.is_infinite() {
        return Ok(0.0);
    }
    Ok(scaled(1, x))
}

/// `A(κ) = I₁(κ)/I₀(κ)`, the mean resultant length of a Von Mises
/// distribution with concentration `κ`.
pub fn bessel_ratio(kappa: f64) -> Result<f64> {
    if !(kappa >= 0.0) {
        return domain(format!("bessel_ratio requires kappa >= 0, got {kappa}"));
    }
    Ok(ratio_unchecked(kappa))
}

pub(crate) fn ratio_unchecked(kappa: f64) -> f64 {
    if kappa.is_infinite() {
        1.0
    } else if kappa < SERIES_LIMIT {
        scaled_series(1, kappa) / scaled_series(0, kappa)
    } else {
        asymptotic_sum(1, kappa) / asymptotic_sum(0, kappa)
    }
}

/// `dA/dκ = 1 - A/κ - A²`.
pub(crate) fn ratio_derivative(kappa: f64, ratio: f64) -> f64 {
    if kappa == 0.0 {
        0.5
    } else {
        1.0 - ratio / kappa - ratio * ratio
    }
}

/// Starting point for the Newton iteration (Fisher's piecewise fit).
fn initial_guess(r: f64) -> f64 {
    if r < 0.53 {
        2.0 * r + r.powi(3) + 5.0 * r.powi(5) / 6.0
    } else if r < 0.85 {
        -0.4 + 1.39 * r + 0.43 / (1.0 - r)
    } else {
        1.0 / (r.powi(3) - 4.0 * r * r + 3.0 * r)
    }
}

/// `κ = A⁻¹(r)` for `0 ≤ r < 1`, solved with a bracketed Newton iteration
/// to full double precision.
pub fn inverse_bessel_ratio(r: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&r) {
        return domain(format!("inverse_bessel_ratio requires 0 <= r < 1, got {r}"));
    }
    if r == 0.0 {
        return Ok(0.0);
    }
    let mut lo = 0.0_f64;
    let mut hi = initial_guess(r).max(f64::MIN_POSITIVE);
    while ratio_unchecked(hi) <= r {
        lo = hi;
        hi *= 2.0;
        if !hi.is_finite() {
            return domain(format!("inverse_bessel_ratio: no finite root for r = {r}"));
        }
    }
    let mut kappa = initial_guess(r).clamp(lo, hi);
    for _ in 0..200 {
        let value = ratio_unchecked(kappa);
        let residual = value - r;
        if residual == 0.0 {
            return Ok(kappa);
        }
        if residual > 0.0 {
            hi = kappa;
        } else {
            lo = kappa;
        }
        let slope = ratio_derivative(kappa, value);
        let mut next = kappa - residual / slope;
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - kappa).abs() <= 4.0 * f64::EPSILON * kappa || hi - lo <= 4.0 * f64::EPSILON * hi {
            return Ok(next);
        }
        kappa = next;
    }
    Ok(kappa)
}
