use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use rapsk::channel::{AngularModel, ChannelParams};
use rapsk::constellation::{RapskConstellation, RapskParams};
use rapsk::numerics::{kappa_for_sigma, sample_von_mises};
use rapsk::ratedesign::{design_rates, level_error_prob, quantize_rates, RateRule};

#[test]
fn error_prob_reference_value() {
    // 40-digit quadrature of the Von Mises tail at kappa = a(0.3)
    let p = level_error_prob(0.3).unwrap();
    assert!((p - 0.105_281_128_918_776_16).abs() < 1e-9, "{p}");
}

#[test]
fn error_prob_against_von_mises_samples() {
    let kappa = kappa_for_sigma(0.3).unwrap();
    let n = 1_000_000;
    let mut rng = ChaCha8Rng::seed_from_u64(30);
    let hits = (0..n)
        .filter(|_| sample_von_mises(kappa, &mut rng).unwrap().abs() > PI / 2.0)
        .count();
    let emp = hits as f64 / n as f64;
    let p = level_error_prob(0.3).unwrap();
    let se = (p * (1.0 - p) / n as f64).sqrt();
    assert!((emp - p).abs() < 3.0 * se, "empirical {emp}, analytic {p}");
}

#[test]
fn halving_sigma_never_increases_p() {
    for i in 1..200 {
        let s = 0.02 * i as f64;
        assert!(level_error_prob(s / 2.0).unwrap() <= level_error_prob(s).unwrap());
    }
}

#[test]
fn report_serializes() {
    let c = RapskConstellation::new(RapskParams::new(8, 32, 0.6).unwrap()).unwrap();
    let p = ChannelParams::from_snr_db(24.0, 1600.0, AngularModel::SmoothSaddlePoint).unwrap();
    let design = quantize_rates(&design_rates(&c, &p, RateRule::BscCapacity).unwrap(), 0.02);
    let json: serde_json::Value = serde_json::from_str(&design.to_json().unwrap()).unwrap();
    let levels = json["levels"].as_array().unwrap();
    assert_eq!(levels.len(), 8);
    assert_eq!(levels[0]["domain"], "radial");
    assert_eq!(levels[3]["domain"], "angular");
    assert_eq!(levels[3]["sigmas"].as_array().unwrap().len(), 8);
    assert!(levels.iter().all(|l| l["quantized_rate"].is_string()));
    assert!(json["overall_quantized"].as_f64().unwrap() <= json["overall_proposed"].as_f64().unwrap());
}
