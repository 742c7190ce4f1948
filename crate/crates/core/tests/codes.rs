use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use rapsk::codes::{coded_rates, ComponentCode, Rate};

/// BER of a code over BPSK-AWGN at the given Eb/N0, using at least
/// `min_bits` information bits.
fn bpsk_ber(code: &ComponentCode, ebn0_db: f64, min_bits: usize, seed: u64) -> (u64, u64) {
    let rate = code.rate();
    let sigma2 = 1.0 / (2.0 * rate * 10f64.powf(ebn0_db / 10.0));
    let sigma = sigma2.sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut errors, mut bits) = (0u64, 0u64);
    while (bits as usize) < min_bits {
        let info: Vec<u8> = (0..code.dimension()).map(|_| rng.random_range(0..2)).collect();
        let word = code.encode(&info).unwrap();
        let llrs: Vec<f64> = word
            .iter()
            .map(|&b| {
                let x = if b == 0 { 1.0 } else { -1.0 };
                let n: f64 = rng.sample(StandardNormal);
                2.0 * (x + sigma * n) / sigma2
            })
            .collect();
        let out = code.decode_soft(&llrs).unwrap();
        errors += out.info.iter().zip(&info).filter(|(a, b)| a != b).count() as u64;
        bits += info.len() as u64;
    }
    (errors, bits)
}

#[test]
fn half_rate_code_clears_three_db() {
    let code = ComponentCode::ira_ldpc(Rate::new(1, 2), 1024, 11).unwrap();
    let (errors, bits) = bpsk_ber(&code, 3.0, 100_000, 1);
    let ber = errors as f64 / bits as f64;
    assert!(ber < 1e-3, "BER {ber} ({errors}/{bits})");
}

#[test]
fn ber_does_not_increase_with_snr() {
    let code = ComponentCode::ira_ldpc(Rate::new(1, 2), 1024, 3).unwrap();
    let mut prev: Option<(f64, f64)> = None;
    for (i, snr) in [1.0, 1.75, 2.5].into_iter().enumerate() {
        let (e, n) = bpsk_ber(&code, snr, 100_000, 10 + i as u64);
        let p = e as f64 / n as f64;
        let se = (p * (1.0 - p) / n as f64).sqrt();
        if let Some((q, qse)) = prev {
            assert!(p <= q + 2.0 * (se + qse), "BER rose from {q} to {p} at {snr} dB");
        }
        prev = Some((p, se));
    }
}

#[test]
fn construction_meets_structure_rules() {
    for &rate in coded_rates() {
        let code = ComponentCode::ira_ldpc(rate, 2048, 1).unwrap();
        let ira = code.ira().unwrap();
        assert_eq!(ira.checks(), code.length() - code.dimension());
        // column weights: information 3, parity 2 except the last
        let mut col = vec![0usize; code.length()];
        for r in 0..ira.checks() {
            for v in ira.check_vars(r) {
                col[v] += 1;
            }
        }
        assert!(col[..code.dimension()].iter().all(|&w| w == 3), "rate {rate}");
        assert!(col[code.dimension()..code.length() - 1].iter().all(|&w| w == 2));
        assert_eq!(col[code.length() - 1], 1);
    }
    assert_eq!(ComponentCode::ira_ldpc(Rate::new(8, 9), 16200, 1).unwrap().dimension(), 14400);
}

#[test]
fn alist_lists_every_edge_twice() {
    let code = ComponentCode::ira_ldpc(Rate::new(2, 3), 600, 4).unwrap();
    let text = code.to_alist().unwrap();
    let lines: Vec<Vec<usize>> = text
        .lines()
        .map(|l| l.split_whitespace().map(|t| t.parse().unwrap()).collect())
        .collect();
    let (n, m) = (lines[0][0], lines[0][1]);
    let col_edges: usize = lines[2].iter().sum();
    let row_edges: usize = lines[3].iter().sum();
    assert_eq!(col_edges, row_edges);
    let listed: usize = lines[4..4 + n].iter().map(|l| l.iter().filter(|&&x| x > 0).count()).sum();
    assert_eq!(listed, col_edges);
    assert_eq!(lines.len(), 4 + n + m);
}
