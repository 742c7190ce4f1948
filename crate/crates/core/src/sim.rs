//! Monte Carlo sweeps over SNR: uncoded symbol error rate for RAPSK and
//! QAM, and coded bit error rate for RAPSK with multilevel coding.
//!
//! Every `(point, batch)` pair draws from its own ChaCha stream derived from
//! the master seed, and batches are reduced in index order, so results do
//! not depend on the number of worker threads.

use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;
use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::channel::{AngularModel, Channel, ChannelParams};
use crate::codes::Rate;
use crate::constellation::{Family, QamConstellation, RapskConstellation, RapskParams};
use crate::error::{Error, Result};
use crate::mlcodec::{mlc_encode, msd_decode, MlcScheme};
use crate::ratedesign::{design_rates, quantize_rates, RateRule, DEFAULT_MARGIN};

pub const CSV_HEADER: &str = "snr_db,kappa_phi,trials,symbol_errors,ser,bit_errors,ber,wall_seconds,seed";

/// Batches evaluated together before the stopping rule is checked. Fixed so
/// that the amount of work done never depends on the thread count.
const WAVE: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    #[default]
    Uncoded,
    Coded,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum FamilySpec {
    Rapsk { n: usize, k: usize, r0: f64 },
    Qam { m: usize },
}

impl FamilySpec {
    pub fn build(&self) -> Result<Family> {
        Ok(match *self {
            FamilySpec::Rapsk { n, k, r0 } => Family::Rapsk(RapskConstellation::new(RapskParams::new(n, k, r0)?)?),
            FamilySpec::Qam { m } => Family::Qam(QamConstellation::new(m)?),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

/// A fully resolved sweep definition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub mode: Mode,
    pub family: FamilySpec,
    pub snr_start: f64,
    pub snr_stop: f64,
    pub snr_step: f64,
    #[serde(with = "kappa_format")]
    pub kappa_phi: f64,
    /// Symbol cap per SNR point.
    pub trials: u64,
    /// Stop a point once this many errors were seen (symbol errors in
    /// uncoded mode, information bit errors in coded mode).
    pub target_errors: u64,
    /// Symbols per coded block `T`.
    pub block_len: usize,
    pub seed: u64,
    pub angular_model: AngularModel,
    pub rate_rule: RateRule,
    pub margin: f64,
    /// SNR at which coded-mode rates are designed; the sweep midpoint when
    /// absent.
    pub design_snr_db: Option<f64>,
    /// Coded-mode rates in decoding order, replacing the design.
    pub rates: Option<Vec<Rate>>,
    /// Symbols per uncoded batch.
    pub batch_size: u64,
    /// Record wall-clock time per point. Off by default so that output is
    /// byte-for-byte reproducible.
    pub record_timing: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            mode: Mode::Uncoded,
            family: FamilySpec::Rapsk { n: 8, k: 32, r0: 0.6 },
            snr_start: 20.0,
            snr_stop: 30.0,
            snr_step: 2.0,
            kappa_phi: f64::INFINITY,
            trials: 1_000_000,
            target_errors: 200,
            block_len: 4096,
            seed: 1,
            angular_model: AngularModel::default(),
            rate_rule: RateRule::default(),
            margin: DEFAULT_MARGIN,
            design_snr_db: None,
            rates: None,
            batch_size: 10_000,
            record_timing: false,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if !(self.snr_step > 0.0) {
            return bad(format!("snr_step must be > 0, got {}", self.snr_step));
        }
        if !(self.snr_start.is_finite() && self.snr_stop.is_finite()) || self.snr_stop < self.snr_start {
            return bad(format!("invalid SNR range {}..{}", self.snr_start, self.snr_stop));
        }
        if !(self.kappa_phi > 0.0) {
            return bad(format!("kappa_phi must be > 0 or inf, got {}", self.kappa_phi));
        }
        if self.trials == 0 || self.batch_size == 0 {
            return bad("trials and batch_size must be >= 1".into());
        }
        if !(0.0..1.0).contains(&self.margin) {
            return bad(format!("margin must lie in [0, 1), got {}", self.margin));
        }
        if self.mode == Mode::Coded {
            if matches!(self.family, FamilySpec::Qam { .. }) {
                return bad("coded mode supports RAPSK only".into());
            }
            if self.block_len == 0 {
                return bad("block length must be >= 1".into());
            }
        }
        self.family.build().map_err(|e| Error::Config(e.to_string()))?;
        Ok(())
    }

    /// SNR points from start to stop inclusive.
    pub fn snr_grid(&self) -> Vec<f64> {
        let count = ((self.snr_stop - self.snr_start) / self.snr_step + 1e-9).floor() as usize + 1;
        (0..count).map(|i| self.snr_start + i as f64 * self.snr_step).collect()
    }
}

/// Same as [`SimConfig`] with every field optional; used to layer a config
/// file under command-line flags.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct PartialSimConfig {
    pub mode: Option<Mode>,
    pub family: Option<String>,
    pub n: Option<usize>,
    pub k: Option<usize>,
    pub r0: Option<f64>,
    pub m: Option<usize>,
    pub snr_start: Option<f64>,
    pub snr_stop: Option<f64>,
    pub snr_step: Option<f64>,
    #[serde(deserialize_with = "kappa_format::deserialize_option")]
    pub kappa_phi: Option<f64>,
    pub trials: Option<u64>,
    pub target_errors: Option<u64>,
    pub t: Option<usize>,
    pub seed: Option<u64>,
    pub angular_model: Option<String>,
    pub rule: Option<String>,
    pub margin: Option<f64>,
    pub design_snr_db: Option<f64>,
    pub rates: Option<String>,
    pub batch_size: Option<u64>,
    pub record_timing: Option<bool>,
    pub workers: Option<usize>,
    pub out: Option<String>,
    pub format: Option<OutputFormat>,
}

macro_rules! layer {
    ($self:ident, $other:ident, $($f:ident),*) => {
        $( if $other.$f.is_some() { $self.$f = $other.$f; } )*
    };
}

impl PartialSimConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    /// Fields set in `other` replace those in `self`.
    pub fn overlay(mut self, other: PartialSimConfig) -> Self {
        layer!(
            self,
            other,
            mode,
            family,
            n,
            k,
            r0,
            m,
            snr_start,
            snr_stop,
            snr_step,
            kappa_phi,
            trials,
            target_errors,
            t,
            seed,
            angular_model,
            rule,
            margin,
            design_snr_db,
            rates,
            batch_size,
            record_timing,
            workers,
            out,
            format
        );
        self
    }

    /// Fills unset fields with defaults and validates the result.
    pub fn resolve(&self) -> Result<SimConfig> {
        let d = SimConfig::default();
        let family = match self.family.as_deref().unwrap_or("rapsk") {
            "rapsk" => FamilySpec::Rapsk {
                n: self.n.unwrap_or(8),
                k: self.k.unwrap_or(32),
                r0: self.r0.unwrap_or(0.6),
            },
            "qam" => FamilySpec::Qam {
                m: self.m.unwrap_or(256),
            },
            other => return Err(Error::Config(format!("unknown family '{other}'"))),
        };
        let rates = match &self.rates {
            Some(list) => Some(list.split(',').map(str::parse).collect::<Result<Vec<Rate>>>()?),
            None => None,
        };
        let cfg = SimConfig {
            mode: self.mode.unwrap_or(d.mode),
            family,
            snr_start: self.snr_start.unwrap_or(d.snr_start),
            snr_stop: self.snr_stop.unwrap_or(d.snr_stop),
            snr_step: self.snr_step.unwrap_or(d.snr_step),
            kappa_phi: self.kappa_phi.unwrap_or(d.kappa_phi),
            trials: self.trials.unwrap_or(d.trials),
            target_errors: self.target_errors.unwrap_or(d.target_errors),
            block_len: self.t.unwrap_or(d.block_len),
            seed: self.seed.unwrap_or(d.seed),
            angular_model: match &self.angular_model {
                Some(s) => s.parse()?,
                None => d.angular_model,
            },
            rate_rule: match &self.rule {
                Some(s) => s.parse()?,
                None => d.rate_rule,
            },
            margin: self.margin.unwrap_or(d.margin),
            design_snr_db: self.design_snr_db,
            rates,
            batch_size: self.batch_size.unwrap_or(d.batch_size),
            record_timing: self.record_timing.unwrap_or(d.record_timing),
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Parses a phase-noise concentration, accepting `inf` for none.
pub fn parse_kappa(s: &str) -> Result<f64> {
    match s.trim() {
        "inf" | "infinity" | "none" => Ok(f64::INFINITY),
        v => v
            .parse()
            .map_err(|_| Error::Config(format!("invalid kappa_phi '{v}'"))),
    }
}

mod kappa_format {
    use super::*;

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Number(f64),
        Text(String),
    }

    fn convert<E: serde::de::Error>(r: Repr) -> std::result::Result<f64, E> {
        match r {
            Repr::Number(v) => Ok(v),
            Repr::Text(s) => parse_kappa(&s).map_err(E::custom),
        }
    }

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_str("inf")
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
        convert(Repr::deserialize(d)?)
    }

    pub fn deserialize_option<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Option<f64>, D::Error> {
        Option::<Repr>::deserialize(d)?.map(convert).transpose()
    }
}

/// One operating point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub snr_db: f64,
    #[serde(with = "kappa_format")]
    pub kappa_phi: f64,
    /// Symbols transmitted.
    pub trials: u64,
    pub symbol_errors: u64,
    pub ser: f64,
    pub bit_errors: u64,
    pub ber: f64,
    /// Coded mode: information bit errors per label row.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub per_level_errors: Option<Vec<u64>>,
    pub wall_seconds: f64,
    pub seed: u64,
}

impl ResultRow {
    fn csv_line(&self) -> String {
        let kappa = if self.kappa_phi.is_finite() {
            self.kappa_phi.to_string()
        } else {
            "inf".to_string()
        };
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.snr_db,
            kappa,
            self.trials,
            self.symbol_errors,
            self.ser,
            self.bit_errors,
            self.ber,
            self.wall_seconds,
            self.seed
        )
    }
}

pub fn to_csv(rows: &[ResultRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(out, "{}", r.csv_line());
    }
    out
}

pub fn to_json(rows: &[ResultRow]) -> Result<String> {
    Ok(serde_json::to_string_pretty(rows)? + "\n")
}

/// Writes rows to `path`, or to stdout when `path` is `None`.
pub fn emit_results(rows: &[ResultRow], format: OutputFormat, path: Option<&Path>) -> Result<()> {
    let text = match format {
        OutputFormat::Csv => to_csv(rows),
        OutputFormat::Json => to_json(rows)?,
    };
    match path {
        Some(p) => std::fs::write(p, text)?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

/// Independent random stream for batch `batch` of point `point`.
pub fn seed_stream(master_seed: u64, point: u64, batch: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream((point << 40) ^ batch);
    rng
}

#[derive(Debug, Clone, Default)]
struct Tally {
    symbols: u64,
    symbol_errors: u64,
    bits: u64,
    bit_errors: u64,
    per_row: Vec<u64>,
}

impl Tally {
    fn add(&mut self, other: &Tally) {
        self.symbols += other.symbols;
        self.symbol_errors += other.symbol_errors;
        self.bits += other.bits;
        self.bit_errors += other.bit_errors;
        if self.per_row.len() < other.per_row.len() {
            self.per_row.resize(other.per_row.len(), 0);
        }
        for (a, b) in self.per_row.iter_mut().zip(&other.per_row) {
            *a += b;
        }
    }
}

/// Runs batches in fixed-size waves until `done` holds or `cap` batches ran.
fn run_point<F, D>(batch: F, cap: u64, done: D) -> Result<Tally>
where
    F: Fn(u64) -> Result<Tally> + Sync,
    D: Fn(&Tally) -> bool,
{
    let mut total = Tally::default();
    let mut next = 0u64;
    while next < cap && !done(&total) {
        let end = (next + WAVE as u64).min(cap);
        let results: Vec<Result<Tally>> = (next..end).into_par_iter().map(&batch).collect();
        for r in results {
            total.add(&r?);
            if done(&total) {
                break;
            }
        }
        next = end;
    }
    Ok(total)
}

fn row(snr_db: f64, cfg: &SimConfig, t: Tally, started: Instant, per_level: bool) -> ResultRow {
    let ratio = |a: u64, b: u64| if b == 0 { 0.0 } else { a as f64 / b as f64 };
    ResultRow {
        snr_db,
        kappa_phi: cfg.kappa_phi,
        trials: t.symbols,
        symbol_errors: t.symbol_errors,
        ser: ratio(t.symbol_errors, t.symbols),
        bit_errors: t.bit_errors,
        ber: ratio(t.bit_errors, t.bits),
        per_level_errors: per_level.then_some(t.per_row),
        wall_seconds: if cfg.record_timing { started.elapsed().as_secs_f64() } else { 0.0 },
        seed: cfg.seed,
    }
}

/// Uncoded SER sweep with hard detection.
pub fn run_uncoded_ser(cfg: &SimConfig) -> Result<Vec<ResultRow>> {
    cfg.validate()?;
    let family = cfg.family.build()?;
    let size = family.size();
    let bits = family.bits_per_symbol() as u64;
    let mut rows = Vec::new();
    for (point, snr) in cfg.snr_grid().into_iter().enumerate() {
        let started = Instant::now();
        let channel = Channel::new(ChannelParams::from_snr_db(snr, cfg.kappa_phi, cfg.angular_model)?)?;
        let batches = cfg.trials.div_ceil(cfg.batch_size);
        let batch = |b: u64| -> Result<Tally> {
            let mut rng = seed_stream(cfg.seed, point as u64, b);
            let count = cfg.batch_size.min(cfg.trials - b * cfg.batch_size);
            let mut t = Tally {
                symbols: count,
                bits: count * bits,
                ..Tally::default()
            };
            for _ in 0..count {
                let label = rng.random_range(0..size);
                let y = channel.transmit(family.point(label), &mut rng);
                let got = family.detect(y);
                if got != label {
                    t.symbol_errors += 1;
                    t.bit_errors += (got ^ label).count_ones() as u64;
                }
            }
            Ok(t)
        };
        let tally = run_point(batch, batches, |t| t.symbol_errors >= cfg.target_errors)?;
        rows.push(row(snr, cfg, tally, started, false));
    }
    Ok(rows)
}

/// Builds the coded scheme: explicit rates if given, otherwise quantized
/// design rates at the design SNR.
pub fn build_coded_scheme(cfg: &SimConfig) -> Result<MlcScheme> {
    let c = match cfg.family.build()? {
        Family::Rapsk(c) => c,
        Family::Qam(_) => return Err(Error::Config("coded mode supports RAPSK only".into())),
    };
    let rates = match &cfg.rates {
        Some(r) => r.clone(),
        None => {
            let snr = cfg.design_snr_db.unwrap_or(0.5 * (cfg.snr_start + cfg.snr_stop));
            let p = ChannelParams::from_snr_db(snr, cfg.kappa_phi, cfg.angular_model)?;
            let design = quantize_rates(&design_rates(&c, &p, cfg.rate_rule)?, cfg.margin);
            design.quantized().expect("rates were quantized")
        }
    };
    MlcScheme::from_level_rates(c, &rates, cfg.block_len, cfg.seed)
}

/// Coded BER sweep: random information blocks through encoding, the
/// channel and multistage decoding.
pub fn run_coded_ber(cfg: &SimConfig) -> Result<Vec<ResultRow>> {
    cfg.validate()?;
    let scheme = build_coded_scheme(cfg)?;
    run_coded_ber_with(cfg, &scheme)
}

/// [`run_coded_ber`] with a prepared scheme.
pub fn run_coded_ber_with(cfg: &SimConfig, scheme: &MlcScheme) -> Result<Vec<ResultRow>> {
    let t_len = scheme.block_len() as u64;
    let k = scheme.info_len();
    let rows_count = scheme.codes().len();
    let mut rows = Vec::new();
    for (point, snr) in cfg.snr_grid().into_iter().enumerate() {
        let started = Instant::now();
        let p = ChannelParams::from_snr_db(snr, cfg.kappa_phi, cfg.angular_model)?;
        let channel = Channel::new(p)?;
        let blocks = cfg.trials.div_ceil(t_len).max(1);
        let batch = |b: u64| -> Result<Tally> {
            let mut rng = seed_stream(cfg.seed, point as u64, b);
            let info: Vec<u8> = (0..k).map(|_| rng.random_range(0..2u8)).collect();
            let xs = mlc_encode(&info, scheme)?;
            let ys: Vec<Complex64> = xs.iter().map(|&x| channel.transmit(x, &mut rng)).collect();
            let decoded = msd_decode(&ys, scheme, &p)?;
            let sent = scheme.split_info(&info)?;
            let got = scheme.split_info(&decoded.info)?;
            let mut tally = Tally {
                symbols: t_len,
                bits: k as u64,
                per_row: vec![0; rows_count],
                ..Tally::default()
            };
            for (r, (a, b)) in sent.iter().zip(&got).enumerate() {
                let e = a.iter().zip(b.iter()).filter(|(x, y)| x != y).count() as u64;
                tally.per_row[r] = e;
                tally.bit_errors += e;
            }
            let xs_hat = mlc_encode(&decoded.info, scheme)?;
            tally.symbol_errors = xs.iter().zip(&xs_hat).filter(|(a, b)| a != b).count() as u64;
            Ok(tally)
        };
        let tally = run_point(batch, blocks, |t| t.bit_errors >= cfg.target_errors)?;
        rows.push(row(snr, cfg, tally, started, true));
    }
    Ok(rows)
}

/// Dispatches on the configured mode.
pub fn run(cfg: &SimConfig) -> Result<Vec<ResultRow>> {
    match cfg.mode {
        Mode::Uncoded => run_uncoded_ser(cfg),
        Mode::Coded => run_coded_ber(cfg),
    }
}
