//! Incident expansion, boundary solution and power bookkeeping against
//! direct summation, quadrature and conservation laws.

mod common;

use common::{gauss_legendre, random_admittance, random_scene, rng};
use metacladding::mode_matching::{
    absorbed_power, boundary_residuals, field_and_radial_derivative, field_at, interior_power,
    inward_flux, solve,
};
use metacladding::scene::incident_coefficients;
use metacladding::{Complex64, Polarization, PowerMetric, Scene, ETA0};
use proptest::prelude::*;
use std::f64::consts::{FRAC_PI_2, TAU};

#[test]
fn expansion_matches_direct_sum_inside() {
    let mut r = rng(11);
    for _ in 0..10 {
        let scene = random_scene(&mut r);
        let sol = solve(&scene).unwrap();
        for k in 0..24 {
            let rad = scene.radius * (k as f64 + 0.5) / 24.0;
            let phi = 0.37 + TAU * k as f64 / 24.0;
            let direct = scene
                .incident_field(rad * phi.cos(), rad * phi.sin())
                .unwrap();
            let series = field_at(&sol, rad, phi).unwrap();
            assert!(
                (direct - series).norm() <= 1e-10 * direct.norm().max(1e-3),
                "{direct} vs {series}"
            );
        }
    }
}

#[test]
fn transparent_sheet_leaves_exterior_untouched() {
    let scene = Scene::reference_geometry(Polarization::TE);
    let sol = solve(&scene).unwrap();
    for k in 0..16 {
        let phi = TAU * k as f64 / 16.0;
        let rad = 2.5 * scene.radius;
        let direct = scene
            .incident_field(rad * phi.cos(), rad * phi.sin())
            .unwrap();
        assert_eq!(field_at(&sol, rad, phi).unwrap(), direct);
    }
}

#[test]
fn mirror_symmetry_of_incident_coefficients() {
    // source on the negative y axis: x → −x maps e^{inφ} to (−1)^n e^{−inφ},
    // and with J_{−n} = (−1)^n J_n an even field needs B_{−n} = B_n
    let b = incident_coefficients(&Scene::reference_geometry(Polarization::TM)).unwrap();
    let scale = b.values().iter().map(|v| v.norm()).fold(0.0, f64::max);
    for n in b.orders() {
        assert!((b.get(-n) - b.get(n)).norm() < 1e-12 * scale, "n = {n}");
    }
}

#[test]
fn rotating_the_source_rotates_the_coefficients() {
    let base = Scene::reference_geometry(Polarization::TM);
    let delta = 0.8;
    let b = incident_coefficients(&base).unwrap();
    let rotated =
        incident_coefficients(&base.with_source_angle(base.source_angle + delta)).unwrap();
    let scale = b.values().iter().map(|v| v.norm()).fold(0.0, f64::max);
    for n in b.orders() {
        let expected = b.get(n) * Complex64::from_polar(1.0, -(n as f64) * delta);
        assert!(
            (rotated.get(n) - expected).norm() < 1e-11 * scale,
            "n = {n}"
        );
    }
}

#[test]
fn area_metric_matches_disc_quadrature() {
    let nodes = gauss_legendre(48);
    for (pol, y) in [
        (Polarization::TM, Complex64::new(-0.4, 1.1)),
        (Polarization::TE, Complex64::new(0.2, -0.7)),
        (Polarization::TM, Complex64::new(0.0, 0.0)),
    ] {
        let scene = Scene::reference_geometry(pol).with_admittance(y);
        let sol = solve(&scene).unwrap();
        let a = scene.radius;
        let nphi = 96;
        let mut integral = 0.0;
        for &(x, w) in &nodes {
            let rad = 0.5 * a * (x + 1.0);
            let ring: f64 = (0..nphi)
                .map(|k| {
                    field_at(&sol, rad, TAU * k as f64 / nphi as f64)
                        .unwrap()
                        .norm_sqr()
                })
                .sum::<f64>()
                * TAU
                / nphi as f64;
            integral += 0.5 * a * w * ring * rad;
        }
        let oracle = integral / ETA0;
        let p = interior_power(&sol, PowerMetric::AreaIntegral).unwrap();
        assert!(
            (p - oracle).abs() < 1e-9 * oracle,
            "{pol:?}: {p} vs {oracle}"
        );
    }
}

#[test]
fn field_is_continuous_across_the_sheet() {
    let scene =
        Scene::reference_geometry(Polarization::TM).with_admittance(Complex64::new(0.3, -1.4));
    let sol = solve(&scene).unwrap();
    let a = scene.radius;
    for k in 0..12 {
        let phi = TAU * k as f64 / 12.0;
        let inside = field_at(&sol, a * (1.0 - 1e-9), phi).unwrap();
        let outside = field_at(&sol, a, phi).unwrap();
        assert!((inside - outside).norm() < 1e-6 * outside.norm().max(1e-6));
    }
}

/// Gross radial power through the circle, `∮ |S_r| r dφ`.
fn gross_flux(sol: &metacladding::ScatteringSolution, r: f64, samples: usize) -> f64 {
    let k = sol.scene.wavenumber();
    (0..samples)
        .map(|i| {
            let phi = TAU * i as f64 / samples as f64;
            let (f, d) = field_and_radial_derivative(sol, r, phi).unwrap();
            ((Complex64::new(0.0, 1.0) * f * d.conj()).re / (2.0 * k * ETA0)).abs()
        })
        .sum::<f64>()
        * TAU
        / samples as f64
        * r
}

#[test]
fn lossless_sheets_conserve_power() {
    let mut r = rng(5);
    for _ in 0..8 {
        let y = Complex64::new(0.0, random_admittance(&mut r).im);
        let scene = random_scene(&mut r).with_admittance(y);
        let sol = solve(&scene).unwrap();
        let rad = 2.0 * scene.radius;
        let net = inward_flux(&sol, rad, 512).unwrap();
        let gross = gross_flux(&sol, rad, 512);
        assert!(net.abs() < 1e-6 * gross, "net {net:e} gross {gross:e}");
    }
}

#[test]
fn flux_balances_absorption() {
    let mut r = rng(6);
    for _ in 0..8 {
        let mut y = random_admittance(&mut r);
        y.re = y.re.abs() + 0.05;
        let scene = random_scene(&mut r).with_admittance(y);
        let sol = solve(&scene).unwrap();
        let absorbed = absorbed_power(&sol).unwrap();
        assert!(absorbed > 0.0);
        let flux = inward_flux(&sol, 2.0 * scene.radius, 512).unwrap();
        let gross = gross_flux(&sol, 2.0 * scene.radius, 512);
        assert!(
            (flux - absorbed).abs() < 1e-6 * gross.max(absorbed),
            "{:?}: flux {flux:e} absorbed {absorbed:e}",
            scene.polarization
        );
    }
}

#[test]
fn active_sheet_emits() {
    let scene =
        Scene::reference_geometry(Polarization::TE).with_admittance(Complex64::new(-0.5, 0.4));
    let sol = solve(&scene).unwrap();
    assert!(absorbed_power(&sol).unwrap() < 0.0);
    assert!(inward_flux(&sol, 1.5 * scene.radius, 512).unwrap() < 0.0);
}

#[test]
fn source_on_the_axis_sees_symmetric_interior() {
    let scene =
        Scene::reference_geometry(Polarization::TM).with_admittance(Complex64::new(-0.2, 0.9));
    let sol = solve(&scene).unwrap();
    for k in 1..8 {
        let rad = scene.radius * k as f64 / 8.0;
        let left = field_at(&sol, rad, -FRAC_PI_2 - 0.4).unwrap().norm();
        let right = field_at(&sol, rad, -FRAC_PI_2 + 0.4).unwrap().norm();
        assert!((left - right).abs() < 1e-10 * left);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn boundary_conditions_hold(seed in any::<u64>()) {
        let mut r = rng(seed);
        let scene = random_scene(&mut r).with_admittance(random_admittance(&mut r));
        let sol = solve(&scene).unwrap();
        let (cont, jump) = boundary_residuals(&sol, 90).unwrap();
        prop_assert!(cont < 1e-9 && jump < 1e-9, "{} {}", cont, jump);
    }

    #[test]
    fn enhancement_is_positive_and_scale_free(seed in any::<u64>()) {
        let mut r = rng(seed);
        let scene = random_scene(&mut r).with_admittance(random_admittance(&mut r));
        let e = metacladding::mode_matching::enhancement(&scene, PowerMetric::AreaIntegral).unwrap();
        prop_assert!(e > 0.0 && e.is_finite());
        let b = metacladding::mode_matching::enhancement(&scene, PowerMetric::Eq3Boundary).unwrap();
        prop_assert!(b > 0.0 && b.is_finite());
    }

    #[test]
    fn transparent_is_identity(seed in any::<u64>()) {
        let mut r = rng(seed);
        let scene = random_scene(&mut r);
        let sol = solve(&scene).unwrap();
        prop_assert_eq!(sol.interior.values(), sol.incident.values());
        prop_assert!(sol.scattered.values().iter().all(|c| c.norm() == 0.0));
    }
}
