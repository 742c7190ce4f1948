//! Encode and decode with a rate-1/2 IRA code over BPSK at a few Eb/N0 values.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use rapsk::codes::{ComponentCode, Rate};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let code = ComponentCode::ira_ldpc(Rate::new(1, 2), 2048, 1)?;
    println!("n {} k {} rate {}", code.length(), code.dimension(), code.rate());
    let mut rng = ChaCha8Rng::seed_from_u64(3);

    for ebn0_db in [1.0, 1.5, 2.0, 2.5] {
        let sigma2 = 1.0 / (2.0 * code.rate() * 10f64.powf(ebn0_db / 10.0));
        let (mut errors, mut bits, mut iters) = (0usize, 0usize, 0usize);
        let blocks = 50;
        for _ in 0..blocks {
            let info: Vec<u8> = (0..code.dimension()).map(|_| rng.random_range(0..2)).collect();
            let word = code.encode(&info)?;
            let llrs: Vec<f64> = word
                .iter()
                .map(|&b| {
                    let x = 1.0 - 2.0 * b as f64;
                    let n: f64 = rng.sample(StandardNormal);
                    2.0 * (x + sigma2.sqrt() * n) / sigma2
                })
                .collect();
            let out = code.decode_soft(&llrs)?;
            errors += out.info.iter().zip(&info).filter(|(a, b)| a != b).count();
            bits += info.len();
            iters += out.iterations;
        }
        println!(
            "Eb/N0 {ebn0_db:.1} dB: BER {:.2e}, mean iterations {:.1}",
            errors as f64 / bits as f64,
            iters as f64 / blocks as f64
        );
    }
    Ok(())
}
