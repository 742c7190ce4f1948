//! Uncoded symbol error rate of the ring constellation and 256-QAM under
//! strong phase noise.

use rapsk::sim::{run, FamilySpec, SimConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for family in [FamilySpec::Rapsk { n: 8, k: 32, r0: 0.6 }, FamilySpec::Qam { m: 256 }] {
        let cfg = SimConfig {
            family,
            snr_start: 20.0,
            snr_stop: 36.0,
            snr_step: 4.0,
            kappa_phi: 2500.0,
            trials: 400_000,
            target_errors: 200,
            ..SimConfig::default()
        };
        println!("{family:?}");
        for row in run(&cfg)? {
            println!("  {:>5.1} dB  SER {:.3e}  ({} errors)", row.snr_db, row.ser, row.symbol_errors);
        }
    }
    Ok(())
}
