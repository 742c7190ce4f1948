//! Per-level error probabilities and code rates for a few operating points.

use rapsk::channel::{AngularModel, ChannelParams};
use rapsk::constellation::{RapskConstellation, RapskParams};
use rapsk::ratedesign::{design_rates, quantize_rates, RateRule, DEFAULT_MARGIN};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let c = RapskConstellation::new(RapskParams::new(8, 32, 0.6)?)?;
    for snr_db in [20.0, 24.0, 28.0] {
        let p = ChannelParams::from_snr_db(snr_db, 1600.0, AngularModel::default())?;
        for rule in [RateRule::OneMinusP, RateRule::BscCapacity] {
            let d = quantize_rates(&design_rates(&c, &p, rule)?, DEFAULT_MARGIN);
            let rates: Vec<String> = d
                .levels
                .iter()
                .map(|l| l.quantized_rate.map_or("-".into(), |r| r.to_string()))
                .collect();
            println!(
                "{snr_db} dB {rule:?}: [{}] overall {:.3}",
                rates.join(" "),
                d.overall_quantized.unwrap_or(f64::NAN)
            );
        }
    }
    Ok(())
}
