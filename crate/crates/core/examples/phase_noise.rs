//! Send a single point through the channel and compare the measured angular
//! spread with the Gaussian models.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use rapsk::channel::{angular_sigma_a2, AngularModel, Channel, ChannelParams};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let x = Complex64::new(1.0, 0.0);
    let n = 200_000;
    for model in [AngularModel::PaperSaddlePoint, AngularModel::SmoothSaddlePoint, AngularModel::HighSnr] {
        let p = ChannelParams::from_snr_db(25.0, 1600.0, model)?;
        let ch = Channel::new(p)?;
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let (mut s1, mut s2) = (0.0, 0.0);
        for _ in 0..n {
            let y = ch.transmit(x, &mut rng);
            let a = y.arg();
            s1 += a;
            s2 += a * a;
        }
        let mean = s1 / n as f64;
        let var = s2 / n as f64 - mean * mean;
        let model_var = angular_sigma_a2(1.0, 1.0, &p)?;
        println!("{model:?}: measured {var:.4e}, model {model_var:.4e}");
    }
    Ok(())
}
