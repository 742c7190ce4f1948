//! Binary component codes for the multilevel scheme.
//!
//! Every code maps `H` information bits to a length-`T` codeword and decodes
//! from `T` LLRs (positive favours bit 0). The LDPC family is a systematic
//! irregular repeat-accumulate construction: a sparse random information
//! part of column weight 3 followed by a dual-diagonal accumulator, decoded
//! with layered normalized min-sum.

use std::collections::HashSet;
use std::fmt;
use std::fmt::Write as _;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{parameter, Error, Result};

/// A code rate `num/den`, kept exact.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub struct Rate {
    pub num: u32,
    pub den: u32,
}

impl Rate {
    pub const ZERO: Rate = Rate { num: 0, den: 1 };
    pub const ONE: Rate = Rate { num: 1, den: 1 };

    pub const fn new(num: u32, den: u32) -> Self {
        Self { num, den }
    }

    pub fn value(&self) -> f64 {
        self.num as f64 / self.den as f64
    }

    /// `round(rate · length)`.
    pub fn dimension(&self, length: usize) -> usize {
        let (num, den) = (self.num as u64, self.den as u64);
        ((length as u64 * num + den / 2) / den) as usize
    }
}

impl fmt::Display for Rate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.num, self.den) {
            (0, _) => write!(f, "0"),
            (n, d) if n == d => write!(f, "1"),
            (n, d) => write!(f, "{n}/{d}"),
        }
    }
}

impl FromStr for Rate {
    type Err = Error;

    /// Accepts `num/den`, `0` or `1`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let parsed = match s.split_once('/') {
            Some((n, d)) => n.trim().parse().ok().zip(d.trim().parse().ok()),
            None => s.parse().ok().map(|n| (n, 1)),
        };
        match parsed {
            Some((num, den)) if den > 0 && num <= den => Ok(Rate::new(num, den)),
            _ => Err(Error::Config(format!("invalid rate '{s}'"))),
        }
    }
}

impl From<Rate> for String {
    fn from(r: Rate) -> String {
        r.to_string()
    }
}

impl TryFrom<String> for Rate {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

const CODED_RATES: [Rate; 10] = [
    Rate::new(1, 4),
    Rate::new(1, 3),
    Rate::new(2, 5),
    Rate::new(1, 2),
    Rate::new(3, 5),
    Rate::new(2, 3),
    Rate::new(3, 4),
    Rate::new(4, 5),
    Rate::new(5, 6),
    Rate::new(8, 9),
];

/// The LDPC rates, in increasing order.
pub fn coded_rates() -> &'static [Rate] {
    &CODED_RATES
}

/// Every rate a level can be assigned, in increasing order: 0 (level
/// frozen to zero), the ten LDPC rates, and 1 (uncoded).
pub fn available_rates() -> Vec<Rate> {
    std::iter::once(Rate::ZERO)
        .chain(CODED_RATES)
        .chain(std::iter::once(Rate::ONE))
        .collect()
}

pub const DEFAULT_MAX_ITERS: usize = 50;
pub const MIN_SUM_SCALE: f64 = 0.75;
const INFO_COLUMN_WEIGHT: usize = 3;
const FOUR_CYCLE_RETRIES: usize = 200;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum CodeKind {
    /// All bits fixed to zero; carries no information.
    Frozen,
    Uncoded,
    /// Each information bit repeated `factor` times consecutively.
    Repetition { factor: usize },
    IraLdpc { rate: Rate, seed: u64, max_iters: usize },
}

/// Parity-check structure of an IRA code. Codeword layout is
/// `[information | parity]`; check `r` involves parity bits `r-1` and `r`.
#[derive(Debug, Clone, PartialEq)]
pub struct IraStructure {
    info_len: usize,
    /// Information columns attached to each check.
    check_info: Vec<Vec<u32>>,
}

impl IraStructure {
    fn build(info_len: usize, parity_len: usize, seed: u64) -> Result<Self> {
        if parity_len == 0 {
            return parameter("IRA code needs at least one parity bit");
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let weight = INFO_COLUMN_WEIGHT.min(parity_len);
        let cap = (weight * info_len).div_ceil(parity_len).max(1);
        let mut degree = vec![0usize; parity_len];
        let mut open: Vec<u32> = (0..parity_len as u32).collect();
        let mut pairs: HashSet<(u32, u32)> = (1..parity_len as u32).map(|r| (r - 1, r)).collect();
        let mut check_info = vec![Vec::new(); parity_len];
        let key = |a: u32, b: u32| if a < b { (a, b) } else { (b, a) };

        for col in 0..info_len as u32 {
            let mut chosen: Vec<u32> = Vec::with_capacity(weight);
            let mut attempts = 0;
            while chosen.len() < weight {
                let pool_exhausted = open.len() <= chosen.len();
                let row = if pool_exhausted {
                    rng.random_range(0..parity_len as u32)
                } else {
                    open[rng.random_range(0..open.len())]
                };
                if chosen.contains(&row) {
                    continue;
                }
                attempts += 1;
                let cycle = chosen.iter().any(|&c| pairs.contains(&key(c, row)));
                if cycle && attempts < FOUR_CYCLE_RETRIES {
                    continue;
                }
                chosen.push(row);
            }
            for (i, &a) in chosen.iter().enumerate() {
                for &b in &chosen[i + 1..] {
                    pairs.insert(key(a, b));
                }
                check_info[a as usize].push(col);
                degree[a as usize] += 1;
                if degree[a as usize] == cap {
                    if let Some(pos) = open.iter().position(|&r| r == a) {
                        open.swap_remove(pos);
                    }
                }
            }
        }
        for row in &mut check_info {
            row.sort_unstable();
        }
        Ok(Self { info_len, check_info })
    }

    pub fn checks(&self) -> usize {
        self.check_info.len()
    }

    /// Variable indices of check `r` in codeword coordinates.
    pub fn check_vars(&self, r: usize) -> impl Iterator<Item = usize> + '_ {
        let k = self.info_len;
        let parity = if r == 0 { r..r + 1 } else { r - 1..r + 1 };
        self.check_info[r].iter().map(|&c| c as usize).chain(parity.map(move |p| k + p))
    }

    fn encode_parity(&self, info: &[u8], parity: &mut [u8]) {
        let mut acc = 0u8;
        for (r, out) in parity.iter_mut().enumerate() {
            let s = self.check_info[r].iter().fold(0u8, |a, &c| a ^ info[c as usize]);
            acc ^= s;
            *out = acc;
        }
    }

    pub fn syndrome_ok(&self, word: &[u8]) -> bool {
        (0..self.checks()).all(|r| self.check_vars(r).fold(0u8, |a, v| a ^ word[v]) == 0)
    }
}

/// A binary code of length `T` and dimension `H`.
#[derive(Debug, Clone)]
pub struct ComponentCode {
    kind: CodeKind,
    length: usize,
    dimension: usize,
    ira: Option<IraStructure>,
}

/// Result of a soft decision decode.
#[derive(Debug, Clone, PartialEq)]
pub struct Decoded {
    pub info: Vec<u8>,
    /// False when an LDPC decoder stopped at `max_iters` with a non-zero
    /// syndrome; the hard decision is still returned.
    pub converged: bool,
    pub iterations: usize,
}

impl ComponentCode {
    pub fn frozen(length: usize) -> Self {
        Self {
            kind: CodeKind::Frozen,
            length,
            dimension: 0,
            ira: None,
        }
    }

    pub fn uncoded(length: usize) -> Self {
        Self {
            kind: CodeKind::Uncoded,
            length,
            dimension: length,
            ira: None,
        }
    }

    pub fn repetition(length: usize, factor: usize) -> Result<Self> {
        if factor == 0 || length % factor != 0 {
            return parameter(format!("repetition factor {factor} must divide length {length}"));
        }
        Ok(Self {
            kind: CodeKind::Repetition { factor },
            length,
            dimension: length / factor,
            ira: None,
        })
    }

    /// Systematic IRA-style LDPC code; deterministic in `(rate, length, seed)`.
    pub fn ira_ldpc(rate: Rate, length: usize, seed: u64) -> Result<Self> {
        if !CODED_RATES.contains(&rate) {
            return parameter(format!("unsupported LDPC rate {rate}"));
        }
        if length < 256 {
            return parameter(format!("LDPC length must be at least 256, got {length}"));
        }
        let dimension = rate.dimension(length);
        let mixed = seed ^ (length as u64).rotate_left(32) ^ ((rate.num as u64) << 16 | rate.den as u64);
        let ira = IraStructure::build(dimension, length - dimension, mixed)?;
        Ok(Self {
            kind: CodeKind::IraLdpc {
                rate,
                seed,
                max_iters: DEFAULT_MAX_ITERS,
            },
            length,
            dimension,
            ira: Some(ira),
        })
    }

    /// Code for a level of the given rate: frozen for 0, uncoded for 1,
    /// LDPC otherwise.
    pub fn for_rate(rate: Rate, length: usize, seed: u64) -> Result<Self> {
        if rate.num == 0 {
            Ok(Self::frozen(length))
        } else if rate.num == rate.den {
            Ok(Self::uncoded(length))
        } else {
            Self::ira_ldpc(rate, length, seed)
        }
    }

    pub fn with_max_iters(mut self, iters: usize) -> Self {
        if let CodeKind::IraLdpc { max_iters, .. } = &mut self.kind {
            *max_iters = iters;
        }
        self
    }

    pub fn kind(&self) -> &CodeKind {
        &self.kind
    }

    /// Codeword length `T`.
    pub fn length(&self) -> usize {
        self.length
    }

    /// Information bits `H`.
    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn rate(&self) -> f64 {
        self.dimension as f64 / self.length as f64
    }

    pub fn ira(&self) -> Option<&IraStructure> {
        self.ira.as_ref()
    }

    pub fn encode(&self, info: &[u8]) -> Result<Vec<u8>> {
        if info.len() != self.dimension {
            return Err(Error::Length {
                expected: self.dimension,
                actual: info.len(),
            });
        }
        Ok(match &self.kind {
            CodeKind::Frozen => vec![0; self.length],
            CodeKind::Uncoded => info.to_vec(),
            CodeKind::Repetition { factor } => info.iter().flat_map(|&b| std::iter::repeat_n(b, *factor)).collect(),
            CodeKind::IraLdpc { .. } => {
                let ira = self.ira.as_ref().expect("LDPC code carries its structure");
                let mut word = vec![0u8; self.length];
                word[..self.dimension].copy_from_slice(info);
                let (head, parity) = word.split_at_mut(self.dimension);
                ira.encode_parity(head, parity);
                word
            }
        })
    }

    pub fn decode_soft(&self, llrs: &[f64]) -> Result<Decoded> {
        if llrs.len() != self.length {
            return Err(Error::Length {
                expected: self.length,
                actual: llrs.len(),
            });
        }
        let hard = |l: f64| u8::from(l < 0.0);
        Ok(match &self.kind {
            CodeKind::Frozen => Decoded {
                info: Vec::new(),
                converged: true,
                iterations: 0,
            },
            CodeKind::Uncoded => Decoded {
                info: llrs.iter().map(|&l| hard(l)).collect(),
                converged: true,
                iterations: 0,
            },
            CodeKind::Repetition { factor } => Decoded {
                info: llrs.chunks(*factor).map(|c| hard(c.iter().sum())).collect(),
                converged: true,
                iterations: 0,
            },
            CodeKind::IraLdpc { max_iters, .. } => {
                let ira = self.ira.as_ref().expect("LDPC code carries its structure");
                let (word, converged, iterations) = min_sum(ira, llrs, *max_iters);
                Decoded {
                    info: word[..self.dimension].to_vec(),
                    converged,
                    iterations,
                }
            }
        })
    }

    /// Parity-check matrix in alist format (1-based indices, zero padded).
    pub fn to_alist(&self) -> Option<String> {
        let ira = self.ira.as_ref()?;
        let n = self.length;
        let m = ira.checks();
        let rows: Vec<Vec<usize>> = (0..m).map(|r| ira.check_vars(r).collect()).collect();
        let mut cols = vec![Vec::new(); n];
        for (r, row) in rows.iter().enumerate() {
            for &v in row {
                cols[v].push(r);
            }
        }
        let max_col = cols.iter().map(Vec::len).max().unwrap_or(0);
        let max_row = rows.iter().map(Vec::len).max().unwrap_or(0);
        let join = |v: &mut dyn Iterator<Item = usize>| v.map(|x| x.to_string()).collect::<Vec<_>>().join(" ");
        let padded = |v: &[usize], width: usize| {
            let mut items: Vec<usize> = v.iter().map(|x| x + 1).collect();
            items.resize(width, 0);
            join(&mut items.into_iter())
        };
        let mut out = String::new();
        let _ = writeln!(out, "{n} {m}");
        let _ = writeln!(out, "{max_col} {max_row}");
        let _ = writeln!(out, "{}", join(&mut cols.iter().map(Vec::len)));
        let _ = writeln!(out, "{}", join(&mut rows.iter().map(Vec::len)));
        for c in &cols {
            let _ = writeln!(out, "{}", padded(c, max_col));
        }
        for r in &rows {
            let _ = writeln!(out, "{}", padded(r, max_row));
        }
        Some(out)
    }
}

/// Layered normalized min-sum. Returns the hard decision, whether the
/// syndrome is zero, and the number of iterations run.
fn min_sum(ira: &IraStructure, llrs: &[f64], max_iters: usize) -> (Vec<u8>, bool, usize) {
    let hard = |post: &[f64]| post.iter().map(|&l| u8::from(l < 0.0)).collect::<Vec<u8>>();
    let mut word = hard(llrs);
    if ira.syndrome_ok(&word) {
        return (word, true, 0);
    }
    let rows: Vec<Vec<usize>> = (0..ira.checks()).map(|r| ira.check_vars(r).collect()).collect();
    let mut offsets = Vec::with_capacity(rows.len() + 1);
    offsets.push(0);
    for r in &rows {
        offsets.push(offsets.last().unwrap() + r.len());
    }
    let mut messages = vec![0.0f64; *offsets.last().unwrap()];
    let mut post = llrs.to_vec();
    let mut scratch: Vec<f64> = Vec::new();

    for iter in 1..=max_iters {
        for (r, vars) in rows.iter().enumerate() {
            let msgs = &mut messages[offsets[r]..offsets[r + 1]];
            scratch.clear();
            let mut min1 = f64::INFINITY;
            let mut min2 = f64::INFINITY;
            let mut min_pos = 0;
            let mut sign_negative = false;
            for (e, &v) in vars.iter().enumerate() {
                let q = post[v] - msgs[e];
                scratch.push(q);
                let mag = q.abs();
                sign_negative ^= q < 0.0;
                if mag < min1 {
                    min2 = min1;
                    min1 = mag;
                    min_pos = e;
                } else if mag < min2 {
                    min2 = mag;
                }
            }
            for (e, &v) in vars.iter().enumerate() {
                let q = scratch[e];
                let mag = if e == min_pos { min2 } else { min1 };
                let negative = sign_negative ^ (q < 0.0);
                let m = MIN_SUM_SCALE * if negative { -mag } else { mag };
                msgs[e] = m;
                post[v] = q + m;
            }
        }
        word = hard(&post);
        if ira.syndrome_ok(&word) {
            return (word, true, iter);
        }
    }
    (word, false, max_iters)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn random_bits(len: usize, seed: u64) -> Vec<u8> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..len).map(|_| rng.random_range(0..2u8)).collect()
    }

    fn to_llrs(word: &[u8], mag: f64) -> Vec<f64> {
        word.iter().map(|&b| if b == 0 { mag } else { -mag }).collect()
    }

    #[test]
    fn rate_set() {
        let rates = available_rates();
        assert_eq!(rates.len(), 12);
        assert!(rates.contains(&Rate::new(8, 9)));
        assert!(rates.contains(&Rate::ONE));
        assert_eq!(coded_rates().len(), 10);
        assert!(rates.windows(2).all(|w| w[0].value() < w[1].value()));
        assert_eq!(Rate::new(8, 9).dimension(16200), 14400);
        assert_eq!("3/4".parse::<Rate>().unwrap(), Rate::new(3, 4));
        assert_eq!("1".parse::<Rate>().unwrap(), Rate::ONE);
        assert!("5/4".parse::<Rate>().is_err());
        assert!("x".parse::<Rate>().is_err());
    }

    #[test]
    fn simple_codes() {
        let c = ComponentCode::uncoded(4);
        assert_eq!(c.encode(&[1, 0, 1, 1]).unwrap(), vec![1, 0, 1, 1]);
        let c = ComponentCode::repetition(6, 3).unwrap();
        assert_eq!(c.encode(&[1, 0]).unwrap(), vec![1, 1, 1, 0, 0, 0]);
        let d = c.decode_soft(&[1.0, 1.0, -5.0, 2.0, 2.0, 2.0]).unwrap();
        assert_eq!(d.info, vec![1, 0]);
        assert!(ComponentCode::repetition(7, 3).is_err());
        let f = ComponentCode::frozen(5);
        assert_eq!(f.encode(&[]).unwrap(), vec![0; 5]);
        assert!(f.decode_soft(&[1.0; 5]).unwrap().info.is_empty());
        assert!(c.encode(&[1]).is_err());
        assert!(c.decode_soft(&[1.0; 5]).is_err());
    }

    #[test]
    fn strong_positive_llrs_decode_to_zero() {
        for code in [
            ComponentCode::uncoded(512),
            ComponentCode::repetition(512, 4).unwrap(),
            ComponentCode::ira_ldpc(Rate::new(1, 2), 512, 3).unwrap(),
        ] {
            let d = code.decode_soft(&vec![10.0; 512]).unwrap();
            assert!(d.info.iter().all(|&b| b == 0));
        }
    }

    #[test]
    fn ldpc_is_deterministic_and_systematic() {
        let a = ComponentCode::ira_ldpc(Rate::new(1, 2), 512, 7).unwrap();
        let b = ComponentCode::ira_ldpc(Rate::new(1, 2), 512, 7).unwrap();
        assert_eq!(a.ira(), b.ira());
        assert_eq!(a.to_alist(), b.to_alist());
        let c = ComponentCode::ira_ldpc(Rate::new(1, 2), 512, 8).unwrap();
        assert_ne!(a.ira(), c.ira());
        let info = random_bits(a.dimension(), 1);
        let word = a.encode(&info).unwrap();
        assert_eq!(&word[..a.dimension()], &info[..]);
        assert!(a.ira().unwrap().syndrome_ok(&word));
    }

    #[test]
    fn ldpc_rejects_bad_parameters() {
        assert!(ComponentCode::ira_ldpc(Rate::new(7, 8), 1024, 1).is_err());
        assert!(ComponentCode::ira_ldpc(Rate::new(1, 2), 128, 1).is_err());
    }

    #[test]
    fn every_rate_encodes_valid_codewords() {
        for (i, &rate) in coded_rates().iter().enumerate() {
            let code = ComponentCode::ira_ldpc(rate, 1024, i as u64).unwrap();
            let info = random_bits(code.dimension(), 10 + i as u64);
            let word = code.encode(&info).unwrap();
            assert!(code.ira().unwrap().syndrome_ok(&word), "rate {rate}");
            let d = code.decode_soft(&to_llrs(&word, 8.0)).unwrap();
            assert_eq!(d.info, info);
            assert!(d.converged);
            assert!(d.iterations <= 1);
        }
    }

    #[test]
    fn ldpc_corrects_a_few_flips() {
        let code = ComponentCode::ira_ldpc(Rate::new(1, 2), 1024, 5).unwrap();
        let info = random_bits(code.dimension(), 2);
        let word = code.encode(&info).unwrap();
        let mut llrs = to_llrs(&word, 2.0);
        for i in (0..1024).step_by(97) {
            llrs[i] = -0.5 * llrs[i];
        }
        let d = code.decode_soft(&llrs).unwrap();
        assert!(d.converged);
        assert_eq!(d.info, info);
    }

    #[test]
    fn alist_shape() {
        let code = ComponentCode::ira_ldpc(Rate::new(3, 4), 256, 1).unwrap();
        let text = code.to_alist().unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "256 64");
        assert_eq!(text.lines().count(), 4 + 256 + 64);
        assert!(ComponentCode::uncoded(8).to_alist().is_none());
    }
}
