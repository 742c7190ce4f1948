//! Multilevel coding and multistage decoding over a RAPSK constellation.
//!
//! Each of the `m` label bits gets its own component code of length `T`.
//! Row `r` of the `m × T` code matrix holds the codeword for label bit `r`
//! (MSB-first label order) and every column is mapped to one symbol.
//!
//! Decoding runs level by level: first the radial domain, then the angular
//! domain, each starting from the least significant bit of the ring or ray
//! index. Level `i` of a domain sees the coordinate shifted by the decided
//! lower bits and scaled by `2^(i-1)`, so candidates sit on the integers
//! with bit `i` alternating; the soft value is the wrapped-cosine LLR
//! `2 a(σ_i) cos(π y_i)`.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::channel::{angular_sigma_a2, Channel, ChannelParams};
use crate::codes::{ComponentCode, Rate};
use crate::constellation::RapskConstellation;
use crate::error::{domain, parameter, Error, Result};
use crate::numerics::kappa_for_sigma;

/// Smallest noise standard deviation used by the demapper, in normalized
/// units. Keeps the noiseless channel well defined.
const SIGMA_FLOOR: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Domain {
    Radial,
    Angular,
}

/// Shape of the coordinate axis a level lives on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Axis {
    /// Periodic axis; the cosine LLR is used everywhere.
    Circular,
    /// Finite axis whose candidates occupy `[0, span]` in level units.
    /// Outside that range the LLR continues linearly with the slope of the
    /// Gaussian log-ratio instead of wrapping back.
    Linear { span: f64 },
}

/// Normalized observation for one level of one symbol.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevelContext {
    /// 1-based level within its domain.
    pub level: u32,
    /// Integer formed by the decided lower bits.
    pub prefix: u64,
    /// Base noise standard deviation of the domain.
    pub sigma: f64,
    /// `(y - prefix) / 2^(level-1)`.
    pub y: f64,
    /// `sigma / 2^(level-1)`.
    pub sigma_i: f64,
    pub axis: Axis,
}

impl LevelContext {
    /// Restricts the context to a finite axis of `bits` levels
    /// (`2^bits` candidates before normalization).
    pub fn on_linear_axis(mut self, bits: u32) -> Self {
        let remaining = bits.saturating_sub(self.level - 1);
        self.axis = Axis::Linear {
            span: ((1u64 << remaining) - 1) as f64,
        };
        self
    }

    /// The original coordinate, `y · 2^(level-1) + prefix`.
    pub fn coordinate(&self) -> f64 {
        self.y * scale(self.level) + self.prefix as f64
    }
}

fn scale(level: u32) -> f64 {
    (1u64 << (level - 1)) as f64
}

/// Normalizes a coordinate for level `level` given the decided prefix.
/// The returned context uses a circular axis.
pub fn normalize_level(y_coord: f64, prefix: u64, level: u32, sigma: f64) -> Result<LevelContext> {
    if level == 0 || level > 63 {
        return domain(format!("level must lie in 1..=63, got {level}"));
    }
    if !(sigma > 0.0) {
        return domain(format!("sigma must be > 0, got {sigma}"));
    }
    let s = scale(level);
    Ok(LevelContext {
        level,
        prefix,
        sigma,
        y: (y_coord - prefix as f64) / s,
        sigma_i: sigma / s,
        axis: Axis::Circular,
    })
}

/// Fast LLR `2 a(σ_i) cos(π y_i)`; positive favours bit 0.
pub fn llr_fast(ctx: &LevelContext) -> f64 {
    let amplitude = 2.0 * kappa_for_sigma(ctx.sigma_i).unwrap_or(0.0);
    match ctx.axis {
        Axis::Linear { .. } if ctx.y < 0.0 => amplitude - ctx.y / (ctx.sigma_i * ctx.sigma_i),
        Axis::Linear { span } if ctx.y > span => -amplitude - (ctx.y - span) / (ctx.sigma_i * ctx.sigma_i),
        _ => amplitude * (std::f64::consts::PI * ctx.y).cos(),
    }
}

/// Exact LLR for bit `level` of a `bits`-bit integer observed in Gaussian
/// noise, summing over every candidate consistent with `prefix`.
pub fn llr_exact(y_coord: f64, prefix: u64, level: u32, bits: u32, sigma: f64) -> Result<f64> {
    if level == 0 || level > bits || bits > 24 {
        return domain(format!("need 1 <= level <= bits <= 24, got level {level}, bits {bits}"));
    }
    if prefix >> (level - 1) != 0 {
        return domain(format!("prefix {prefix} has more than {} bits", level - 1));
    }
    if !(sigma > 0.0) {
        return domain(format!("sigma must be > 0, got {sigma}"));
    }
    let step = 1u64 << (level - 1);
    let mut terms = [Vec::new(), Vec::new()];
    let mut c = prefix;
    while c < 1u64 << bits {
        let bit = ((c >> (level - 1)) & 1) as usize;
        terms[bit].push(-(y_coord - c as f64).powi(2) / (2.0 * sigma * sigma));
        c += step;
    }
    Ok(log_sum_exp(&terms[0]) - log_sum_exp(&terms[1]))
}

fn log_sum_exp(v: &[f64]) -> f64 {
    let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    max + v.iter().map(|x| (x - max).exp()).sum::<f64>().ln()
}

/// One decoding step of the multistage decoder.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelSlot {
    pub domain: Domain,
    /// 1-based level within the domain.
    pub level: u32,
    /// Label bit position (0 = MSB) fed by this level.
    pub row: usize,
}

/// Decoding order: radial levels LSB-first, then angular levels LSB-first.
pub fn level_order(c: &RapskConstellation) -> Vec<LevelSlot> {
    let n = c.ring_bits() as usize;
    let k = c.angle_bits() as usize;
    let radial = (1..=n).map(|i| LevelSlot {
        domain: Domain::Radial,
        level: i as u32,
        row: n - i,
    });
    let angular = (1..=k).map(|i| LevelSlot {
        domain: Domain::Angular,
        level: i as u32,
        row: n + k - i,
    });
    radial.chain(angular).collect()
}

/// Constellation plus one component code per label bit.
#[derive(Debug, Clone)]
pub struct MlcScheme {
    constellation: RapskConstellation,
    /// Indexed by label row.
    codes: Vec<ComponentCode>,
    order: Vec<LevelSlot>,
}

impl MlcScheme {
    /// `codes[r]` protects label bit `r` (MSB-first).
    pub fn new(constellation: RapskConstellation, codes: Vec<ComponentCode>) -> Result<Self> {
        let m = constellation.bits_per_symbol() as usize;
        if codes.len() != m {
            return parameter(format!("scheme needs {m} codes, got {}", codes.len()));
        }
        let t = codes[0].length();
        if t == 0 || codes.iter().any(|c| c.length() != t) {
            return parameter("all component codes must share one non-zero length");
        }
        let order = level_order(&constellation);
        Ok(Self {
            constellation,
            codes,
            order,
        })
    }

    /// Every level uncoded.
    pub fn uncoded(constellation: RapskConstellation, block_len: usize) -> Result<Self> {
        let m = constellation.bits_per_symbol() as usize;
        Self::new(constellation, vec![ComponentCode::uncoded(block_len); m])
    }

    /// Builds codes from rates given in decoding order (see [`level_order`]).
    /// LDPC seeds are derived from `seed` and the label row.
    pub fn from_level_rates(
        constellation: RapskConstellation,
        rates: &[Rate],
        block_len: usize,
        seed: u64,
    ) -> Result<Self> {
        let order = level_order(&constellation);
        if rates.len() != order.len() {
            return parameter(format!("expected {} level rates, got {}", order.len(), rates.len()));
        }
        let mut codes = vec![ComponentCode::uncoded(block_len); order.len()];
        for (slot, &rate) in order.iter().zip(rates) {
            codes[slot.row] = ComponentCode::for_rate(rate, block_len, seed.wrapping_add(slot.row as u64))?;
        }
        Self::new(constellation, codes)
    }

    pub fn constellation(&self) -> &RapskConstellation {
        &self.constellation
    }

    /// Codes by label row.
    pub fn codes(&self) -> &[ComponentCode] {
        &self.codes
    }

    pub fn order(&self) -> &[LevelSlot] {
        &self.order
    }

    /// Symbols per block `T`.
    pub fn block_len(&self) -> usize {
        self.codes[0].length()
    }

    /// Information bits per block, `Σ H_r`.
    pub fn info_len(&self) -> usize {
        self.codes.iter().map(ComponentCode::dimension).sum()
    }

    /// Information bits per symbol divided by `m`.
    pub fn rate(&self) -> f64 {
        self.info_len() as f64 / (self.block_len() * self.codes.len()) as f64
    }

    /// Splits a block of information bits into per-row pieces.
    pub fn split_info<'a>(&self, info: &'a [u8]) -> Result<Vec<&'a [u8]>> {
        if info.len() != self.info_len() {
            return Err(Error::Length {
                expected: self.info_len(),
                actual: info.len(),
            });
        }
        let mut rest = info;
        Ok(self
            .codes
            .iter()
            .map(|c| {
                let (head, tail) = rest.split_at(c.dimension());
                rest = tail;
                head
            })
            .collect())
    }
}

/// Encodes `info` row by row and maps each column of the code matrix to a
/// symbol.
pub fn mlc_encode(info: &[u8], scheme: &MlcScheme) -> Result<Vec<Complex64>> {
    let rows = scheme
        .split_info(info)?
        .into_iter()
        .zip(&scheme.codes)
        .map(|(u, code)| code.encode(u))
        .collect::<Result<Vec<_>>>()?;
    let points = scheme.constellation.points();
    Ok((0..scheme.block_len())
        .map(|t| {
            let label = rows.iter().fold(0usize, |acc, row| (acc << 1) | row[t] as usize);
            points[label]
        })
        .collect())
}

/// Output of [`msd_decode`].
#[derive(Debug, Clone, PartialEq)]
pub struct MsdDecoded {
    /// Decoded information bits, rows concatenated in label order.
    pub info: Vec<u8>,
    /// Label rows whose component decoder did not converge.
    pub unconverged_rows: Vec<usize>,
}

/// Per-symbol coordinate and noise of one domain.
struct DomainObservation {
    coords: Vec<f64>,
    sigmas: Vec<f64>,
    axis_bits: Option<u32>,
}

impl DomainObservation {
    fn context(&self, t: usize, prefix: u64, level: u32) -> LevelContext {
        let ctx = normalize_level(self.coords[t], prefix, level, self.sigmas[t].max(SIGMA_FLOOR))
            .expect("level and sigma are valid by construction");
        match self.axis_bits {
            Some(bits) => ctx.on_linear_axis(bits),
            None => ctx,
        }
    }
}

fn radial_observation(ys: &[Complex64], c: &RapskConstellation, p: &ChannelParams) -> DomainObservation {
    let d = c.spacing();
    DomainObservation {
        coords: ys.iter().map(|y| (y.norm() - c.r0()) / d).collect(),
        sigmas: vec![p.sigma_z() / d; ys.len()],
        axis_bits: Some(c.ring_bits()),
    }
}

/// Angular coordinate `arg(y) K / 2π` in `[0, K)`.
fn angular_coordinate(y: Complex64, k: usize) -> f64 {
    let v = y.arg().rem_euclid(TAU) * k as f64 / TAU;
    if v >= k as f64 {
        0.0
    } else {
        v
    }
}

fn angular_observation(
    ys: &[Complex64],
    rings: &[usize],
    c: &RapskConstellation,
    p: &ChannelParams,
) -> Result<DomainObservation> {
    let k = c.points_per_ring();
    let per_rad = k as f64 / TAU;
    let mut sigmas = Vec::with_capacity(ys.len());
    for (y, &ring) in ys.iter().zip(rings) {
        let rho_y = y.norm().max(f64::MIN_POSITIVE);
        sigmas.push(per_rad * angular_sigma_a2(c.radii()[ring], rho_y, p)?.sqrt());
    }
    Ok(DomainObservation {
        coords: ys.iter().map(|&y| angular_coordinate(y, k)).collect(),
        sigmas,
        axis_bits: None,
    })
}

/// Multistage decoding of one block. Decoder failures are reported in
/// `unconverged_rows`; their hard decisions are used for later levels.
pub fn msd_decode(ys: &[Complex64], scheme: &MlcScheme, p: &ChannelParams) -> Result<MsdDecoded> {
    let t_len = scheme.block_len();
    if ys.len() != t_len {
        return Err(Error::Length {
            expected: t_len,
            actual: ys.len(),
        });
    }
    let c = &scheme.constellation;
    let mut decided: Vec<Vec<u8>> = vec![Vec::new(); scheme.codes.len()];
    let mut unconverged_rows = Vec::new();
    let mut prefixes = vec![0u64; t_len];
    let mut observation = radial_observation(ys, c, p);
    let mut current = Domain::Radial;
    let mut llrs = vec![0.0; t_len];

    for slot in &scheme.order {
        if slot.domain != current {
            let rings: Vec<usize> = prefixes.iter().map(|&r| r as usize).collect();
            observation = angular_observation(ys, &rings, c, p)?;
            prefixes.fill(0);
            current = slot.domain;
        }
        for (t, llr) in llrs.iter_mut().enumerate() {
            *llr = llr_fast(&observation.context(t, prefixes[t], slot.level));
        }
        let code = &scheme.codes[slot.row];
        let out = code.decode_soft(&llrs)?;
        if !out.converged {
            unconverged_rows.push(slot.row);
        }
        let word = code.encode(&out.info)?;
        for (prefix, &bit) in prefixes.iter_mut().zip(&word) {
            *prefix |= (bit as u64) << (slot.level - 1);
        }
        decided[slot.row] = out.info;
    }
    unconverged_rows.sort_unstable();
    Ok(MsdDecoded {
        info: decided.concat(),
        unconverged_rows,
    })
}

/// Empirical error rate of one level under genie-aided decoding.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenieLevel {
    pub domain: Domain,
    pub level: u32,
    pub errors: u64,
    pub trials: u64,
    pub rate: f64,
    /// Angular levels: error rate split by transmitted ring. Empty for
    /// radial levels.
    pub per_ring: Vec<f64>,
}

/// Sends `trials` uniformly random symbols and, at every level, compares
/// the sign of the fast LLR computed with the true prefix against the true
/// bit. Levels are returned in decoding order.
pub fn genie_level_errors<R: Rng + ?Sized>(
    c: &RapskConstellation,
    p: &ChannelParams,
    trials: u64,
    rng: &mut R,
) -> Result<Vec<GenieLevel>> {
    let channel = Channel::new(*p)?;
    let order = level_order(c);
    let rings = c.rings();
    let k = c.points_per_ring();
    let mut errors = vec![0u64; order.len()];
    let mut ring_errors = vec![vec![0u64; rings]; order.len()];
    let mut ring_counts = vec![0u64; rings];
    for _ in 0..trials {
        let ring = rng.random_range(0..rings);
        let angle = rng.random_range(0..k);
        ring_counts[ring] += 1;
        let y = channel.transmit(c.points()[ring * k + angle], rng);
        let single = [y];
        let radial = radial_observation(&single, c, p);
        let angular = angular_observation(&single, &[ring], c, p)?;
        for (j, slot) in order.iter().enumerate() {
            let (obs, value) = match slot.domain {
                Domain::Radial => (&radial, ring as u64),
                Domain::Angular => (&angular, angle as u64),
            };
            let mask = (1u64 << (slot.level - 1)) - 1;
            let bit = (value >> (slot.level - 1)) & 1;
            let llr = llr_fast(&obs.context(0, value & mask, slot.level));
            if u64::from(llr < 0.0) != bit {
                errors[j] += 1;
                ring_errors[j][ring] += 1;
            }
        }
    }
    Ok(order
        .iter()
        .enumerate()
        .map(|(j, slot)| GenieLevel {
            domain: slot.domain,
            level: slot.level,
            errors: errors[j],
            trials,
            rate: if trials == 0 { 0.0 } else { errors[j] as f64 / trials as f64 },
            per_ring: match slot.domain {
                Domain::Radial => Vec::new(),
                Domain::Angular => ring_errors[j]
                    .iter()
                    .zip(&ring_counts)
                    .map(|(&e, &n)| if n == 0 { 0.0 } else { e as f64 / n as f64 })
                    .collect(),
            },
        })
        .collect())
}
