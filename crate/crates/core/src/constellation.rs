//! RAPSK and square-QAM constellations.
//!
//! A RAPSK constellation has `N` equidistant concentric rings of `K` points
//! each, aligned on `K` rays from the origin. Ring `n` has radius
//! `r_n = r_0 + nD` and ray `ℓ` has angle `2πℓ/K`. The innermost radius is
//! the free parameter; the spacing `D` is solved so the mean power is one.
//!
//! Labels are `m = log2(N) + log2(K)` bits: the ring index in plain binary
//! (MSB first) followed by the ray index in plain binary (MSB first).

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{parameter, Error, Result};

fn log2_exact(v: usize) -> Option<u32> {
    v.is_power_of_two().then(|| v.trailing_zeros())
}

/// Geometry parameters of a RAPSK constellation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RapskParams {
    /// Number of rings `N`.
    pub rings: usize,
    /// Points per ring `K`.
    pub points_per_ring: usize,
    /// Innermost radius `r_0`.
    pub r0: f64,
}

impl RapskParams {
    pub fn new(rings: usize, points_per_ring: usize, r0: f64) -> Result<Self> {
        let p = Self {
            rings,
            points_per_ring,
            r0,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if log2_exact(self.rings).is_none() {
            return parameter(format!("ring count must be a power of two, got {}", self.rings));
        }
        if self.points_per_ring < 2 || log2_exact(self.points_per_ring).is_none() {
            return parameter(format!(
                "points per ring must be a power of two >= 2, got {}",
                self.points_per_ring
            ));
        }
        if self.rings == 1 {
            if self.r0 != 1.0 {
                return parameter(format!("a single ring must have r0 = 1, got {}", self.r0));
            }
        } else if !(self.r0 > 0.0 && self.r0 < 1.0) {
            return parameter(format!("r0 must lie in (0, 1) for several rings, got {}", self.r0));
        }
        Ok(())
    }

    /// Total number of points `M = NK`.
    pub fn size(&self) -> usize {
        self.rings * self.points_per_ring
    }
}

/// Ring spacing `D` giving unit mean power for `N ≥ 2` rings and innermost
/// radius `r0 ∈ (0, 1)`: the positive root of
/// `r0² + (N-1) r0 D + (N-1)(2N-1)/6 D² = 1`.
pub fn ring_spacing(rings: usize, r0: f64) -> Result<f64> {
    if rings < 2 {
        return parameter(format!("ring spacing needs at least two rings, got {rings}"));
    }
    if !(r0 > 0.0 && r0 < 1.0) {
        return parameter(format!("no positive ring spacing for r0 = {r0}"));
    }
    let n = rings as f64;
    let x = 2.0 * (1.0 - r0 * r0) * (2.0 * n - 1.0) / (3.0 * r0 * r0 * (n - 1.0));
    // sqrt(1 + x) - 1 written without cancellation
    Ok(3.0 * r0 / (2.0 * n - 1.0) * x / ((1.0 + x).sqrt() + 1.0))
}

/// PAPR as a function of the normalized spacing `D̃ = D / r0`.
pub fn papr_from_normalized_spacing(rings: usize, d_tilde: f64) -> f64 {
    let n = rings as f64;
    let peak = 1.0 + (n - 1.0) * d_tilde;
    let sum: f64 = (0..rings).map(|i| (1.0 + i as f64 * d_tilde).powi(2)).sum();
    n * peak * peak / sum
}

/// Limit of the PAPR as `D̃ → ∞`: `6(N-1)/(2N-1)`.
pub fn papr_limit(rings: usize) -> Result<f64> {
    if rings < 2 {
        return parameter(format!("PAPR limit needs at least two rings, got {rings}"));
    }
    let n = rings as f64;
    Ok(6.0 * (n - 1.0) / (2.0 * n - 1.0))
}

/// Ring and ray indices of a RAPSK point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PointIndex {
    pub ring: usize,
    pub angle: usize,
}

#[derive(Debug, Clone)]
pub struct RapskConstellation {
    params: RapskParams,
    spacing: f64,
    radii: Vec<f64>,
    ring_bits: u32,
    angle_bits: u32,
    points: Vec<Complex64>,
}

impl RapskConstellation {
    /// Builds the unit-power constellation. A single ring yields `K`-PSK on
    /// the unit circle with zero spacing.
    pub fn new(params: RapskParams) -> Result<Self> {
        params.validate()?;
        let spacing = if params.rings == 1 { 0.0 } else { ring_spacing(params.rings, params.r0)? };
        let radii: Vec<f64> = (0..params.rings).map(|n| params.r0 + n as f64 * spacing).collect();
        let k = params.points_per_ring;
        let mut points = Vec::with_capacity(params.size());
        for &r in &radii {
            for l in 0..k {
                points.push(Complex64::from_polar(r, TAU * l as f64 / k as f64));
            }
        }
        Ok(Self {
            params,
            spacing,
            ring_bits: params.rings.trailing_zeros(),
            angle_bits: k.trailing_zeros(),
            radii,
            points,
        })
    }

    pub fn params(&self) -> RapskParams {
        self.params
    }

    pub fn rings(&self) -> usize {
        self.params.rings
    }

    pub fn points_per_ring(&self) -> usize {
        self.params.points_per_ring
    }

    pub fn r0(&self) -> f64 {
        self.params.r0
    }

    /// Ring spacing `D`.
    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn size(&self) -> usize {
        self.points.len()
    }

    /// Label length `m`.
    pub fn bits_per_symbol(&self) -> u32 {
        self.ring_bits + self.angle_bits
    }

    /// Radial label bits `n = log2(N)`.
    pub fn ring_bits(&self) -> u32 {
        self.ring_bits
    }

    /// Angular label bits `k = log2(K)`.
    pub fn angle_bits(&self) -> u32 {
        self.angle_bits
    }

    /// Points in ring-major, angle-minor order, so that the index of a point
    /// equals its label read as an integer.
    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    pub fn point(&self, index: PointIndex) -> Complex64 {
        self.points[index.ring * self.params.points_per_ring + index.angle]
    }

    /// Mean `|x|²` over all points.
    pub fn power(&self) -> f64 {
        self.points.iter().map(|p| p.norm_sqr()).sum::<f64>() / self.points.len() as f64
    }

    /// `r_{N-1}² / P` with `P` the mean squared ring radius.
    pub fn papr(&self) -> f64 {
        let mean: f64 = self.radii.iter().map(|r| r * r).sum::<f64>() / self.radii.len() as f64;
        let peak = self.radii[self.radii.len() - 1];
        peak * peak / mean
    }

    /// Splits a label into ring and ray indices.
    pub fn label_to_indices(&self, bits: &[u8]) -> Result<PointIndex> {
        let m = self.bits_per_symbol() as usize;
        if bits.len() != m {
            return Err(Error::Length {
                expected: m,
                actual: bits.len(),
            });
        }
        let read = |s: &[u8]| s.iter().fold(0usize, |acc, &b| (acc << 1) | (b & 1) as usize);
        let (ring, angle) = bits.split_at(self.ring_bits as usize);
        Ok(PointIndex {
            ring: read(ring),
            angle: read(angle),
        })
    }

    /// Label of the point with the given indices.
    pub fn indices_to_label(&self, index: PointIndex) -> Vec<u8> {
        let write = |v: usize, width: u32| (0..width).rev().map(move |b| ((v >> b) & 1) as u8);
        write(index.ring, self.ring_bits)
            .chain(write(index.angle, self.angle_bits))
            .collect()
    }

    /// Maps an `m`-bit label to its point.
    pub fn label_to_point(&self, bits: &[u8]) -> Result<Complex64> {
        Ok(self.point(self.label_to_indices(bits)?))
    }

    /// Hard detection by rounding the radial and angular coordinates
    /// separately. Ties go to the lower index; the ring is clamped to the
    /// valid range.
    pub fn point_to_indices(&self, y: Complex64) -> PointIndex {
        let round_down_ties = |v: f64| (v - 0.5).ceil();
        let ring = if self.params.rings == 1 {
            0
        } else {
            let v = round_down_ties((y.norm() - self.params.r0) / self.spacing);
            v.clamp(0.0, (self.params.rings - 1) as f64) as usize
        };
        let k = self.params.points_per_ring;
        let v = round_down_ties(y.arg() * k as f64 / TAU);
        let angle = (v as i64).rem_euclid(k as i64) as usize;
        PointIndex { ring, angle }
    }

    /// Geometry summary used by the `constellation` CLI command.
    pub fn geometry(&self) -> Geometry {
        Geometry {
            n: self.params.rings,
            k: self.params.points_per_ring,
            r0: self.params.r0,
            d: self.spacing,
            papr: self.papr(),
            points: self.points.iter().map(|p| [p.re, p.im]).collect(),
        }
    }
}

/// JSON geometry dump: points in ring-major, angle-minor order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Geometry {
    pub n: usize,
    pub k: usize,
    pub r0: f64,
    pub d: f64,
    pub papr: f64,
    pub points: Vec<[f64; 2]>,
}

/// Square QAM with per-axis Gray labeling, used as a baseline.
#[derive(Debug, Clone)]
pub struct QamConstellation {
    side: usize,
    axis_bits: u32,
    scale: f64,
    points: Vec<Complex64>,
}

fn gray(v: usize) -> usize {
    v ^ (v >> 1)
}

fn gray_inverse(mut g: usize) -> usize {
    let mut v = g;
    while g > 0 {
        g >>= 1;
        v ^= g;
    }
    v
}

impl QamConstellation {
    /// Builds unit-power square `M`-QAM; `M` must be an even power of two.
    pub fn new(size: usize) -> Result<Self> {
        let bits = match log2_exact(size) {
            Some(b) if b >= 2 && b % 2 == 0 => b,
            _ => return parameter(format!("QAM size must be an even power of two >= 4, got {size}")),
        };
        let axis_bits = bits / 2;
        let side = 1usize << axis_bits;
        // mean of (2i - side + 1)² over one axis, doubled for two axes
        let mean_power = 2.0 * ((side * side) as f64 - 1.0) / 3.0;
        let scale = 1.0 / mean_power.sqrt();
        let level = |g: usize| (2.0 * gray_inverse(g) as f64 - side as f64 + 1.0) * scale;
        let points = (0..size)
            .map(|label| Complex64::new(level(label >> axis_bits), level(label & (side - 1))))
            .collect();
        Ok(Self {
            side,
            axis_bits,
            scale,
            points,
        })
    }

    pub fn size(&self) -> usize {
        self.points.len()
    }

    /// Points indexed by label.
    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    pub fn power(&self) -> f64 {
        self.points.iter().map(|p| p.norm_sqr()).sum::<f64>() / self.points.len() as f64
    }

    /// `max |x|² / mean |x|²` over the points.
    pub fn papr(&self) -> f64 {
        let peak = self.points.iter().map(|p| p.norm_sqr()).fold(0.0, f64::max);
        peak / self.power()
    }

    /// Nearest-point detection, returning the label.
    pub fn detect(&self, y: Complex64) -> usize {
        let axis = |v: f64| {
            let i = ((v / self.scale + self.side as f64 - 1.0) / 2.0).round();
            gray(i.clamp(0.0, (self.side - 1) as f64) as usize)
        };
        (axis(y.re) << self.axis_bits) | axis(y.im)
    }
}

/// Either constellation family, for the uncoded simulator.
#[derive(Debug, Clone)]
pub enum Family {
    Rapsk(RapskConstellation),
    Qam(QamConstellation),
}

impl Family {
    pub fn size(&self) -> usize {
        match self {
            Family::Rapsk(c) => c.size(),
            Family::Qam(c) => c.size(),
        }
    }

    pub fn bits_per_symbol(&self) -> u32 {
        self.size().trailing_zeros()
    }

    pub fn point(&self, label: usize) -> Complex64 {
        match self {
            Family::Rapsk(c) => c.points()[label],
            Family::Qam(c) => c.points()[label],
        }
    }

    /// Hard decision on the label.
    pub fn detect(&self, y: Complex64) -> usize {
        match self {
            Family::Rapsk(c) => {
                let idx = c.point_to_indices(y);
                idx.ring * c.points_per_ring() + idx.angle
            }
            Family::Qam(c) => c.detect(y),
        }
    }

    pub fn papr(&self) -> f64 {
        match self {
            Family::Rapsk(c) => c.papr(),
            Family::Qam(c) => c.papr(),
        }
    }
}
