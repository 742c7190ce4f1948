use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use rapsk::channel::{AngularModel, ChannelParams};
use rapsk::constellation::{QamConstellation, RapskConstellation, RapskParams};
use rapsk::ratedesign::{design_rates, quantize_rates, RateRule, DEFAULT_MARGIN};
use rapsk::sim::{self, Mode, OutputFormat, PartialSimConfig};
use rapsk::Error;

#[derive(Parser)]
#[command(name = "rapsk", version, about = "RAPSK constellations, rate design and Monte Carlo sweeps")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print ring geometry and PAPR.
    Constellation {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        r0: f64,
        /// Write the point list as JSON.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Per-level error probabilities and code rates.
    RateDesign {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        r0: f64,
        #[arg(long)]
        snr_db: f64,
        #[arg(long, default_value = "inf")]
        kappa_phi: String,
        #[arg(long, default_value = "one-minus-p")]
        rule: String,
        #[arg(long, default_value_t = DEFAULT_MARGIN)]
        margin: f64,
        #[arg(long, default_value = "smooth")]
        angular_model: String,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Monte Carlo SER or BER sweep.
    Simulate(SimulateArgs),
}

#[derive(Args)]
struct SimulateArgs {
    /// TOML file with any of the options below; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_parser = ["uncoded", "coded"])]
    mode: Option<String>,
    #[arg(long, value_parser = ["rapsk", "qam"])]
    family: Option<String>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    r0: Option<f64>,
    /// QAM size.
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    snr_start: Option<f64>,
    #[arg(long)]
    snr_stop: Option<f64>,
    #[arg(long)]
    snr_step: Option<f64>,
    /// Phase-noise concentration, or `inf`.
    #[arg(long)]
    kappa_phi: Option<String>,
    /// Symbol cap per point.
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long)]
    target_errors: Option<u64>,
    /// Coded block length in symbols.
    #[arg(long)]
    t: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_parser = ["paper", "smooth", "highsnr"])]
    angular_model: Option<String>,
    #[arg(long, value_parser = ["one-minus-p", "bsc-capacity"])]
    rule: Option<String>,
    #[arg(long)]
    margin: Option<f64>,
    /// SNR used for the coded rate design.
    #[arg(long)]
    design_snr_db: Option<f64>,
    /// Comma-separated rates in decoding order, e.g. `1/2,8/9,...`.
    #[arg(long)]
    rates: Option<String>,
    #[arg(long)]
    batch_size: Option<u64>,
    /// Fill the wall_seconds column.
    #[arg(long)]
    record_timing: bool,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    out: Option<String>,
    #[arg(long, value_parser = ["csv", "json"])]
    format: Option<String>,
}

enum Failure {
    Config(String),
    Runtime(String),
}

impl Failure {
    fn config(e: impl ToString) -> Self {
        Failure::Config(e.to_string())
    }

    fn runtime(e: impl ToString) -> Self {
        Failure::Runtime(e.to_string())
    }
}

fn classify(e: Error) -> Failure {
    match e {
        Error::Io(_) | Error::Json(_) => Failure::runtime(e),
        other => Failure::config(other),
    }
}

fn rapsk_constellation(n: usize, k: usize, r0: f64) -> Result<RapskConstellation, Failure> {
    RapskParams::new(n, k, r0)
        .and_then(RapskConstellation::new)
        .map_err(Failure::config)
}

fn write_or_print(path: Option<&PathBuf>, text: &str) -> Result<(), Failure> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(Failure::runtime),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn constellation(n: usize, k: usize, r0: f64, json: Option<PathBuf>) -> Result<(), Failure> {
    let c = rapsk_constellation(n, k, r0)?;
    let qam_papr = QamConstellation::new(c.size()).ok().map(|q| q.papr());
    println!("rings {n}, points per ring {k}, r0 {r0}");
    println!("spacing D = {}", c.spacing());
    let radii: Vec<String> = c.radii().iter().map(|r| format!("{r:.6}")).collect();
    println!("radii [{}]", radii.join(", "));
    println!("power {}", c.power());
    println!("papr {} ({:.4} dB)", c.papr(), 10.0 * c.papr().log10());
    if let Some(q) = qam_papr {
        println!("papr of {}-QAM {q}, ratio {:.4}", c.size(), c.papr() / q);
    }
    if let Some(path) = json {
        let text = serde_json::to_string_pretty(&c.geometry()).map_err(Failure::runtime)?;
        std::fs::write(path, text).map_err(Failure::runtime)?;
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn rate_design(
    n: usize,
    k: usize,
    r0: f64,
    snr_db: f64,
    kappa_phi: &str,
    rule: &str,
    margin: f64,
    angular_model: &str,
    json: Option<PathBuf>,
) -> Result<(), Failure> {
    let c = rapsk_constellation(n, k, r0)?;
    let kappa = sim::parse_kappa(kappa_phi).map_err(classify)?;
    let model: AngularModel = angular_model.parse().map_err(classify)?;
    let rule: RateRule = rule.parse().map_err(classify)?;
    if !(0.0..1.0).contains(&margin) {
        return Err(Failure::Config(format!("margin must lie in [0, 1), got {margin}")));
    }
    let p = ChannelParams::from_snr_db(snr_db, kappa, model).map_err(classify)?;
    let design = design_rates(&c, &p, rule).map_err(Failure::runtime)?;
    let text = quantize_rates(&design, margin).to_json().map_err(Failure::runtime)?;
    write_or_print(json.as_ref(), &text)
}

fn simulate(args: SimulateArgs) -> Result<(), Failure> {
    let file = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Failure::Config(format!("cannot read {}: {e}", path.display())))?;
            PartialSimConfig::from_toml(&text).map_err(classify)?
        }
        None => PartialSimConfig::default(),
    };
    let kappa_phi = args
        .kappa_phi
        .as_deref()
        .map(sim::parse_kappa)
        .transpose()
        .map_err(classify)?;
    let flags = PartialSimConfig {
        mode: args.mode.as_deref().map(|m| if m == "coded" { Mode::Coded } else { Mode::Uncoded }),
        family: args.family,
        n: args.n,
        k: args.k,
        r0: args.r0,
        m: args.m,
        snr_start: args.snr_start,
        snr_stop: args.snr_stop,
        snr_step: args.snr_step,
        kappa_phi,
        trials: args.trials,
        target_errors: args.target_errors,
        t: args.t,
        seed: args.seed,
        angular_model: args.angular_model,
        rule: args.rule,
        margin: args.margin,
        design_snr_db: args.design_snr_db,
        rates: args.rates,
        batch_size: args.batch_size,
        record_timing: args.record_timing.then_some(true),
        workers: args.workers,
        out: args.out,
        format: args
            .format
            .as_deref()
            .map(|f| if f == "json" { OutputFormat::Json } else { OutputFormat::Csv }),
    };
    let merged = file.overlay(flags);
    let cfg = merged.resolve().map_err(classify)?;
    let scheme = match cfg.mode {
        Mode::Coded => Some(sim::build_coded_scheme(&cfg).map_err(Failure::config)?),
        Mode::Uncoded => None,
    };
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(w) = merged.workers {
        if w == 0 {
            return Err(Failure::Config("workers must be >= 1".into()));
        }
        pool = pool.num_threads(w);
    }
    let pool = pool.build().map_err(Failure::runtime)?;
    let started = Instant::now();
    let rows = pool
        .install(|| match &scheme {
            Some(s) => sim::run_coded_ber_with(&cfg, s),
            None => sim::run_uncoded_ser(&cfg),
        })
        .map_err(Failure::runtime)?;
    eprintln!("{} points in {:.2} s", rows.len(), started.elapsed().as_secs_f64());
    let out = merged.out.as_deref().filter(|p| *p != "-").map(std::path::Path::new);
    sim::emit_results(&rows, merged.format.unwrap_or_default(), out).map_err(Failure::runtime)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Constellation { n, k, r0, json } => constellation(n, k, r0, json),
        Command::RateDesign {
            n,
            k,
            r0,
            snr_db,
            kappa_phi,
            rule,
            margin,
            angular_model,
            json,
        } => rate_design(n, k, r0, snr_db, &kappa_phi, &rule, margin, &angular_model, json),
        Command::Simulate(args) => simulate(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}
