//! Field-map geometry, coating gain patterns, secrecy outage and the
//! harvesting budget.

mod common;

use metacladding::eh::{chain_energy_budget, harvested_power, link_received_power, ChainNode};
use metacladding::field_map::{intensity_map, Region};
use metacladding::pls::{
    coating_gain_pattern, max_distance_ratio, sop_closed_form, sop_monte_carlo, LinkModel,
    SecrecyLink, SopGeometry, SopMapConfig,
};
use metacladding::presets::optimal_2;
use metacladding::{Complex64, Polarization, Scene};
use proptest::prelude::*;
use rand::Rng;
use std::f64::consts::{FRAC_PI_2, PI, TAU};

#[test]
fn map_rotates_with_the_source() {
    let scene =
        Scene::reference_geometry(Polarization::TM).with_admittance(Complex64::new(-0.6, 0.9));
    let rotated = scene.with_source_angle(scene.source_angle + FRAC_PI_2);
    let n = 41;
    let a = intensity_map(&scene, &Region::default(), [n, n]).unwrap();
    let b = intensity_map(&rotated, &Region::default(), [n, n]).unwrap();
    // a quarter turn sends pixel (i, j) to (n − 1 − j, i)
    for j in 0..n {
        for i in 0..n {
            let (u, v) = (a.get(i, j), b.get(n - 1 - j, i));
            assert!((u - v).abs() < 1e-8, "{i},{j}: {u} {v}");
        }
    }
}

#[test]
fn gain_pattern_is_covariant_in_feed_azimuth() {
    let scene = Scene::reference_geometry(Polarization::TM).with_admittance(optimal_2());
    let n = 72;
    let p = coating_gain_pattern(&scene, (0.025, 0.0), n).unwrap();
    let shift = 5;
    let delta = TAU * shift as f64 / n as f64;
    let q = coating_gain_pattern(&scene, (0.025, delta), n).unwrap();
    for k in 0..n {
        let (u, v) = (q.gains[(k + shift) % n], p.gains[k]);
        assert!((u - v).abs() < 1e-9 * v, "{k}: {u} {v}");
    }
}

#[test]
fn optimal_two_pattern_has_lobes() {
    let scene = Scene::reference_geometry(Polarization::TM).with_admittance(optimal_2());
    let p = coating_gain_pattern(&scene, (0.025, 0.0), 360).unwrap();
    assert!(p.local_maxima().len() >= 4, "{}", p.local_maxima().len());
}

#[test]
fn closed_form_is_monotone() {
    let mut r = common::rng(3);
    for _ in 0..200 {
        let b = 10f64.powf(r.gen_range(-1.0..3.0));
        let e = 10f64.powf(r.gen_range(-1.0..3.0));
        let rs = r.gen_range(0.0..3.0);
        let base = sop_closed_form(&SecrecyLink::new(b, e, rs));
        assert!(sop_closed_form(&SecrecyLink::new(b * 1.5, e, rs)) <= base);
        assert!(sop_closed_form(&SecrecyLink::new(b, e * 1.5, rs)) >= base);
        assert!(sop_closed_form(&SecrecyLink::new(b, e, rs + 0.3)) >= base);
    }
}

#[test]
fn symmetric_link_monte_carlo() {
    let (p, se) = sop_monte_carlo(&SecrecyLink::new(4.0, 4.0, 0.0), 1_000_000, 17).unwrap();
    assert!((p - 0.5).abs() < 3.0 * se, "{p} ± {se}");
}

#[test]
fn monte_carlo_does_not_depend_on_worker_count() {
    let link = SecrecyLink::new(20.0, 3.0, 1.0);
    let one = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap()
        .install(|| sop_monte_carlo(&link, 300_000, 42).unwrap());
    let three = rayon::ThreadPoolBuilder::new()
        .num_threads(3)
        .build()
        .unwrap()
        .install(|| sop_monte_carlo(&link, 300_000, 42).unwrap());
    assert_eq!(one.0.to_bits(), three.0.to_bits());
}

#[test]
fn distance_ratio_orderings() {
    let model = LinkModel::default();
    let mut prev = 0.0;
    for g in (0..=60).step_by(5) {
        let rho = max_distance_ratio(&model.with_gain_db(g as f64), 1e-3, 0.5).unwrap();
        assert!(rho >= prev);
        prev = rho;
    }
    let m = model.with_gain_db(30.0);
    assert!(
        max_distance_ratio(&m, 1e-2, 0.0).unwrap() >= max_distance_ratio(&m, 1e-3, 0.0).unwrap()
    );
    assert!(
        max_distance_ratio(&m, 1e-3, 1.0).unwrap() <= max_distance_ratio(&m, 1e-3, 0.0).unwrap()
    );
}

#[test]
fn eve_far_away_is_harmless() {
    // transparent coating: S ≡ 1, so outage falls with Eve's distance
    let scene = Scene::reference_geometry(Polarization::TM);
    let geo = SopGeometry::new(
        &scene,
        1.0,
        SopMapConfig {
            path_loss_exponent: 4.0,
            ..Default::default()
        },
    )
    .unwrap();
    let mut prev = 1.0;
    for k in 1..20 {
        let d = 1.0 + k as f64;
        let sop = geo.sop(geo.eve_snr(1.0, d));
        assert!(sop < prev);
        prev = sop;
    }
    assert!(prev < 1e-3);
}

fn node(id: u32, x: f64, y: f64, boresight: f64) -> ChainNode {
    ChainNode {
        id,
        position: [x, y],
        boresight,
        tx_power: 0.5,
        capture_area: 2e-3,
        collector_enhancement: 1.0,
        conversion_efficiency: 0.7,
        uplink: None,
        uplink_information_bearing: true,
    }
}

#[test]
fn three_node_hand_computation() {
    let n0 = node(0, 0.0, 0.0, PI);
    let n1 = node(1, 3.0, 0.0, PI);
    let n2 = node(2, 0.0, 4.0, -FRAC_PI_2);
    // node 0 at the origin sees node 1 head-on from 3 m and node 2 from 4 m
    let area = 2e-3;
    let hand = 0.7 * (0.5 * area / (4.0 * PI * 9.0) + 0.5 * area / (4.0 * PI * 16.0));
    let got = harvested_power(&n0, &[&n1, &n2]).unwrap();
    assert!((got - hand).abs() < 1e-15 * hand);
    let report = chain_energy_budget(&[n0, n1, n2]).unwrap();
    assert!((report.nodes[0].harvested_w - hand).abs() < 1e-15 * hand);
}

#[test]
fn enhancement_of_25_db_lifts_harvest_by_25_db() {
    let chain = |e: f64| {
        (0..4u32)
            .map(|i| ChainNode {
                collector_enhancement: e,
                uplink: i.checked_sub(1),
                ..node(i, 5.0 * i as f64, 0.0, 0.0)
            })
            .collect::<Vec<_>>()
    };
    let base = chain_energy_budget(&chain(1.0)).unwrap();
    let boosted = chain_energy_budget(&chain(10f64.powf(2.5))).unwrap();
    assert!(boosted.saturated_sources.is_empty());
    for (b, h) in base.nodes.iter().zip(&boosted.nodes) {
        if b.harvested_w > 0.0 {
            let db = 10.0 * (h.harvested_w / b.harvested_w).log10();
            assert!((db - 25.0).abs() < 1e-9, "{db}");
        }
    }
}

#[test]
fn point_link_checks() {
    let tx = node(0, 1.0, 1.0, 0.0);
    assert_eq!(link_received_power(&tx, [1.0, 3.0], 1.0).unwrap(), 0.0);
    assert!(link_received_power(&tx, [1.0, 1.0], 1.0).is_err());
}

fn random_chain(seed: u64) -> Vec<ChainNode> {
    let mut r = common::rng(seed);
    (0..5u32)
        .map(|i| ChainNode {
            id: i,
            position: [r.gen_range(-5.0..5.0), r.gen_range(-5.0..5.0)],
            boresight: r.gen_range(-PI..PI),
            tx_power: r.gen_range(0.0..2.0),
            capture_area: r.gen_range(0.0..0.5),
            collector_enhancement: r.gen_range(0.0..1000.0),
            conversion_efficiency: r.gen_range(0.0..1.0),
            uplink: i.checked_sub(1),
            uplink_information_bearing: r.gen_bool(0.5),
        })
        .collect()
}

proptest! {
    #[test]
    fn chains_conserve_power(seed in any::<u64>()) {
        let report = chain_energy_budget(&random_chain(seed)).unwrap();
        prop_assert!(report.nodes.iter().all(|n| n.harvested_w >= 0.0));
        prop_assert!(report.total_harvested_w <= report.total_transmitted_w * (1.0 + 1e-12));
    }

    #[test]
    fn chains_are_linear(seed in any::<u64>(), c in 0.01f64..100.0) {
        let chain = random_chain(seed);
        let scaled: Vec<_> = chain.iter().map(|n| ChainNode { tx_power: n.tx_power * c, ..n.clone() }).collect();
        let a = chain_energy_budget(&chain).unwrap();
        let b = chain_energy_budget(&scaled).unwrap();
        for (x, y) in a.nodes.iter().zip(&b.nodes) {
            prop_assert!((y.harvested_w - c * x.harvested_w).abs() <= 1e-12 * (c * x.harvested_w).max(1e-300));
        }
    }

    #[test]
    fn zero_rate_closed_form_is_exact(b in 1e-3f64..1e6, e in 1e-3f64..1e6) {
        prop_assert_eq!(sop_closed_form(&SecrecyLink::new(b, e, 0.0)), e / (b + e));
    }
}
