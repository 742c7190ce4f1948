//! Fast cosine LLRs against the exact log-sum-exp values for one received
//! coordinate, level by level.

use rapsk::mlcodec::{llr_exact, llr_fast, normalize_level};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let bits = 5;
    let sigma = 0.35;
    let y = 13.4;
    let mut prefix = 0u64;
    // decide bit by bit, LSB first
    for level in 1..=bits {
        let ctx = normalize_level(y, prefix, level, sigma)?;
        let fast = llr_fast(&ctx);
        let exact = llr_exact(y, prefix, level, bits, sigma)?;
        let bit = u64::from(fast < 0.0);
        println!("level {level}: y_i {:+.3} fast {fast:+.4} exact {exact:+.4} -> {bit}", ctx.y);
        prefix |= bit << (level - 1);
    }
    println!("decided index {prefix}");
    Ok(())
}
