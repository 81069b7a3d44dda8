#![allow(dead_code)]

use metacladding::{Complex64, Polarization, Scene};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Valid scene with randomized geometry, illumination and polarization.
pub fn random_scene(rng: &mut ChaCha8Rng) -> Scene {
    loop {
        let wavelength = rng.gen_range(0.05..0.2);
        let radius = rng.gen_range(0.1..0.8) * wavelength;
        let scene = Scene {
            wavelength,
            radius,
            source_distance: radius * rng.gen_range(3.0..25.0),
            aperture_halfwidth: wavelength * rng.gen_range(0.0..0.3),
            misalignment: rng.gen_range(-0.6..0.6),
            source_angle: rng.gen_range(-3.1..3.1),
            admittance_re: 0.0,
            admittance_im: 0.0,
            polarization: if rng.gen_bool(0.5) {
                Polarization::TM
            } else {
                Polarization::TE
            },
            aperture_samples: rng.gen_range(1..12),
        };
        if scene.validate().is_ok() {
            return scene;
        }
    }
}

pub fn random_admittance(rng: &mut ChaCha8Rng) -> Complex64 {
    Complex64::new(rng.gen_range(-2.0..2.0), rng.gen_range(-5.0..5.0))
}

/// Nodes and weights on [−1, 1].
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    (0..n)
        .map(|i| {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            loop {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
                let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    return (x, 2.0 / ((1.0 - x * x) * dp * dp));
                }
            }
        })
        .collect()
}
