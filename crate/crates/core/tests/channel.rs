use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use rapsk::channel::{
    angular_sigma_a2, angular_sigma_p2, angular_sigma_w2, conditional_phase_pdf, rician_pdf, AngularModel, Channel,
    ChannelParams,
};
use rapsk::numerics::{quad, sample_von_mises};

fn params(sigma_z2: f64, kappa_phi: f64, model: AngularModel) -> ChannelParams {
    ChannelParams::new(sigma_z2, kappa_phi, model).unwrap()
}

#[test]
fn pure_rotation_keeps_magnitude() {
    let ch = Channel::new(params(0.0, 50.0, AngularModel::SmoothSaddlePoint)).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let x = Complex64::new(0.3, -0.9);
    for _ in 0..1000 {
        assert!((ch.transmit(x, &mut rng).norm() - x.norm()).abs() < 1e-14);
    }
}

#[test]
fn transmit_is_reproducible() {
    let ch = Channel::new(params(0.01, 300.0, AngularModel::SmoothSaddlePoint)).unwrap();
    let draw = || {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        (0..50).map(|_| ch.transmit(Complex64::new(1.0, 0.0), &mut rng)).collect::<Vec<_>>()
    };
    assert_eq!(draw(), draw());
}

#[test]
fn radial_variance_matches() {
    let ch = Channel::new(params(0.0025, f64::INFINITY, AngularModel::SmoothSaddlePoint)).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let n = 100_000;
    let d: Vec<f64> = (0..n).map(|_| ch.transmit(Complex64::new(1.0, 0.0), &mut rng).norm() - 1.0).collect();
    let m = d.iter().sum::<f64>() / n as f64;
    let v = d.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1) as f64;
    assert!((v / 0.0025 - 1.0).abs() < 0.05, "{v}");
}

#[test]
fn phase_noise_variance_against_samples() {
    let kappa = 1600.0;
    let p = params(0.0, kappa, AngularModel::SmoothSaddlePoint);
    let model = angular_sigma_p2(&p).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let n = 1_000_000;
    let xs: Vec<f64> = (0..n).map(|_| sample_von_mises(kappa, &mut rng).unwrap()).collect();
    let m = xs.iter().sum::<f64>() / n as f64;
    let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1) as f64;
    assert!((v / model - 1.0).abs() < 0.05, "model {model}, empirical {v}");
}

#[test]
fn exact_saddle_point_form_is_within_a_factor_of_two() {
    for kappa_rho in [100.0, 1000.0] {
        let s2 = 1.0 / kappa_rho;
        let exact = angular_sigma_w2(1.0, 1.0, &params(s2, f64::INFINITY, AngularModel::PaperSaddlePoint)).unwrap();
        let ratio = exact / s2;
        assert!(ratio > 1.0 && ratio < 2.0, "{ratio}");
    }
}

#[test]
fn variances_add() {
    let p = params(0.004, 900.0, AngularModel::SmoothSaddlePoint);
    let total = angular_sigma_a2(0.8, 0.85, &p).unwrap();
    assert_eq!(total, angular_sigma_w2(0.8, 0.85, &p).unwrap() + angular_sigma_p2(&p).unwrap());
}

#[test]
fn rician_is_close_to_gaussian_at_high_snr() {
    let (rho_x, sigma) = (1.0_f64, 0.05_f64);
    let gauss = |r: f64| (-(r - rho_x).powi(2) / (2.0 * sigma * sigma)).exp() / (sigma * (std::f64::consts::TAU).sqrt());
    let tv = 0.5
        * quad::integrate(
            |r| (rician_pdf(r, rho_x, sigma * sigma).unwrap() - gauss(r)).abs(),
            0.0,
            2.0,
            1e-10,
        );
    assert!(tv < 0.01, "{tv}");
}

#[test]
fn rayleigh_limit_and_phase_normalisation() {
    let s2 = 0.3_f64;
    for r in [0.1_f64, 0.5, 1.2] {
        let rayleigh = r / s2 * (-r * r / (2.0 * s2)).exp();
        assert!((rician_pdf(r, 0.0, s2).unwrap() - rayleigh).abs() < 1e-14);
    }
    let total = quad::integrate(
        |t| conditional_phase_pdf(t, 1.0, 1.0, 1.0 / 50.0).unwrap(),
        -std::f64::consts::PI,
        std::f64::consts::PI,
        1e-12,
    );
    assert!((total - 1.0).abs() < 1e-8);
}
