use std::time::Instant;

use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use rapsk::channel::{AngularModel, ChannelParams};
use rapsk::codes::{ComponentCode, Rate};
use rapsk::constellation::{RapskConstellation, RapskParams};
use rapsk::mlcodec::{llr_exact, llr_fast, mlc_encode, msd_decode, normalize_level, MlcScheme};

fn rapsk(n: usize, k: usize, r0: f64) -> RapskConstellation {
    RapskConstellation::new(RapskParams::new(n, k, r0).unwrap()).unwrap()
}

fn quiet() -> ChannelParams {
    ChannelParams::new(0.0, f64::INFINITY, AngularModel::SmoothSaddlePoint).unwrap()
}

#[test]
fn exact_llr_reference_value() {
    // direct summation over the 8 candidates, computed independently
    let v = llr_exact(2.7, 0, 1, 3, 0.3).unwrap();
    assert!((v - -2.220_950_573_045_654_1).abs() < 1e-12, "{v}");
}

#[test]
fn coded_noiseless_round_trip() {
    let c = rapsk(8, 32, 0.6);
    let rates = [
        Rate::new(1, 2),
        Rate::new(5, 6),
        Rate::ONE,
        Rate::new(3, 4),
        Rate::new(8, 9),
        Rate::ZERO,
        Rate::ONE,
        Rate::ONE,
    ];
    let scheme = MlcScheme::from_level_rates(c, &rates, 512, 3).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let info: Vec<u8> = (0..scheme.info_len()).map(|_| rng.random_range(0..2)).collect();
    let ys = mlc_encode(&info, &scheme).unwrap();
    let out = msd_decode(&ys, &scheme, &quiet()).unwrap();
    assert_eq!(out.info, info);
    assert!(out.unconverged_rows.is_empty());
}

#[test]
fn zero_information_maps_to_first_point() {
    let c = rapsk(4, 16, 0.5);
    let r0 = c.r0();
    let scheme = MlcScheme::from_level_rates(c, &[Rate::new(1, 2); 6], 256, 1).unwrap();
    let ys = mlc_encode(&vec![0; scheme.info_len()], &scheme).unwrap();
    assert!(ys.iter().all(|&y| y == Complex64::new(r0, 0.0)));
}

#[test]
fn long_frame_maps_every_bit() {
    let scheme = MlcScheme::uncoded(rapsk(8, 32, 0.6), 16200).unwrap();
    assert_eq!(scheme.info_len(), 8 * 16200);
    let ys = mlc_encode(&vec![1; 8 * 16200], &scheme).unwrap();
    assert_eq!(ys.len(), 16200);
}

#[test]
fn rejects_mismatched_codes() {
    let c = rapsk(2, 4, 0.5);
    let codes = vec![ComponentCode::uncoded(8), ComponentCode::uncoded(8), ComponentCode::uncoded(4)];
    assert!(MlcScheme::new(c.clone(), codes).is_err());
    assert!(MlcScheme::new(c, vec![ComponentCode::uncoded(8); 2]).is_err());
}

#[test]
fn llr_cost_does_not_grow_with_size() {
    let mut per_bit = Vec::new();
    for (n, k) in [(4, 16), (8, 32), (16, 64), (16, 256)] {
        let c = rapsk(n, k, 0.5);
        let scheme = MlcScheme::uncoded(c, 4096).unwrap();
        let p = ChannelParams::from_snr_db(30.0, 1000.0, AngularModel::SmoothSaddlePoint).unwrap();
        let ys = mlc_encode(&vec![0; scheme.info_len()], &scheme).unwrap();
        msd_decode(&ys, &scheme, &p).unwrap();
        let start = Instant::now();
        for _ in 0..5 {
            msd_decode(&ys, &scheme, &p).unwrap();
        }
        per_bit.push(start.elapsed().as_secs_f64() / scheme.info_len() as f64);
    }
    let max = per_bit.iter().copied().fold(0.0, f64::max);
    let min = per_bit.iter().copied().fold(f64::INFINITY, f64::min);
    assert!(max / min < 4.0, "per-bit cost {per_bit:?}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn noiseless_round_trip(n_bits in 0u32..=4, k_bits in 1u32..=8, seed in any::<u64>(), t in 1usize..40) {
        prop_assume!(n_bits + k_bits <= 12);
        let n = 1usize << n_bits;
        let r0 = if n == 1 { 1.0 } else { 0.4 };
        let scheme = MlcScheme::uncoded(rapsk(n, 1 << k_bits, r0), t).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let info: Vec<u8> = (0..scheme.info_len()).map(|_| rng.random_range(0..2)).collect();
        let ys = mlc_encode(&info, &scheme).unwrap();
        prop_assert_eq!(msd_decode(&ys, &scheme, &quiet()).unwrap().info, info);
    }

    #[test]
    fn cosine_symmetries(y in -8.0f64..8.0, sigma in 0.01f64..2.0, shift in -5i32..5) {
        let at = |v: f64| llr_fast(&normalize_level(v, 0, 1, sigma).unwrap());
        prop_assert!((at(y) + at(y + 1.0)).abs() < 1e-9 * (1.0 + at(y).abs()));
        let m = shift as f64;
        prop_assert!((at(m + y) - at(m - y)).abs() < 1e-9 * (1.0 + at(y).abs()));
    }

    #[test]
    fn angular_wrap_invariance(y in 0.0f64..32.0, prefix in 0u64..4, turns in -3i32..3) {
        // K = 32, level 3: adding K to the coordinate leaves the LLR unchanged
        let a = llr_fast(&normalize_level(y, prefix, 3, 0.4).unwrap());
        let b = llr_fast(&normalize_level(y + 32.0 * turns as f64, prefix, 3, 0.4).unwrap());
        prop_assert!((a - b).abs() < 1e-9 * (1.0 + a.abs()));
    }

    #[test]
    fn normalization_inverts(y in -50.0f64..50.0, level in 1u32..8, sigma in 0.01f64..3.0, raw in any::<u64>()) {
        let prefix = raw % (1u64 << (level - 1));
        let ctx = normalize_level(y, prefix, level, sigma).unwrap();
        prop_assert!((ctx.coordinate() - y).abs() < 1e-12 * (1.0 + y.abs()));
        prop_assert!((ctx.sigma_i * (1u64 << (level - 1)) as f64 - sigma).abs() < 1e-12 * sigma);
    }
}
