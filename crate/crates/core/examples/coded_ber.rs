//! Multilevel coded BER around the waterfall with rates designed at 20 dB.

use rapsk::sim::{build_coded_scheme, run_coded_ber_with, Mode, SimConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = SimConfig {
        mode: Mode::Coded,
        snr_start: 25.5,
        snr_stop: 28.0,
        snr_step: 0.5,
        kappa_phi: 1600.0,
        design_snr_db: Some(20.0),
        trials: 40 * 4096,
        target_errors: 1000,
        ..SimConfig::default()
    };
    let scheme = build_coded_scheme(&cfg)?;
    let rates: Vec<String> = scheme.codes().iter().map(|c| format!("{:.3}", c.rate())).collect();
    println!("rates by label row: [{}], overall {:.3}", rates.join(" "), scheme.rate());
    for row in run_coded_ber_with(&cfg, &scheme)? {
        println!("{:>5.2} dB  BER {:.3e}  levels {:?}", row.snr_db, row.ber, row.per_level_errors.unwrap_or_default());
    }
    Ok(())
}
