//! Recovered resonant admittances and the built-in run configurations.

use num_complex::Complex;

use crate::cli::{
    Command, FieldMapParams, GainRange, RunConfig, SopCurveParams, SopMapParams, SweepParams,
};
use crate::field_map::Region;
use crate::pls::{LinkModel, SopMapConfig};
use crate::scene::{Polarization, Scene};
use crate::sweep::SweepSpec;

/// Strongest order-0 TM resonance of the default sweep after refinement,
/// normalized admittance `[Re, Im]`.
pub const OPTIMAL_1_TM: [f64; 2] = [-1.0116666666666667, 1.0899999999999996];

/// Strongest order-3 TM resonance of the default sweep after refinement.
pub const OPTIMAL_2_TM: [f64; 2] = [-0.5833333333333335, 0.8500000000000004];

pub fn optimal_1() -> Complex<f64> {
    Complex::new(OPTIMAL_1_TM[0], OPTIMAL_1_TM[1])
}

pub fn optimal_2() -> Complex<f64> {
    Complex::new(OPTIMAL_2_TM[0], OPTIMAL_2_TM[1])
}

pub const NAMES: [&str; 7] = [
    "paper-fig4-tm",
    "paper-fig4-te",
    "paper-fig5a",
    "paper-fig5b",
    "paper-fig5c",
    "paper-fig7a",
    "paper-fig7b",
];

fn field_map(y: Complex<f64>) -> Command {
    Command::Fieldmap(FieldMapParams {
        scene: Scene::reference_geometry(Polarization::TM).with_admittance(y),
        region: Region::default(),
        resolution: [601, 601],
        pgm: true,
    })
}

fn sweep(polarization: Polarization) -> Command {
    Command::Sweep(SweepParams {
        scene: Scene::reference_geometry(polarization),
        spec: SweepSpec::default().with_polarization(polarization),
        top_k: 10,
    })
}

/// Built-in configuration by name.
pub fn preset(name: &str) -> Option<RunConfig> {
    let command = match name {
        "paper-fig4-tm" => sweep(Polarization::TM),
        "paper-fig4-te" => sweep(Polarization::TE),
        "paper-fig5a" => field_map(Complex::new(0.0, 0.0)),
        "paper-fig5b" => field_map(optimal_1()),
        "paper-fig5c" => field_map(optimal_2()),
        "paper-fig7a" => Command::SopCurve(SopCurveParams {
            model: LinkModel::default(),
            sop_targets: vec![1e-4],
            secrecy_rates: vec![0.0, 1.0, 2.0],
            gains_db: GainRange {
                start: 0.0,
                stop: 60.0,
                step: 1.0,
            },
            mc_samples: 0,
        }),
        "paper-fig7b" => Command::SopMap(SopMapParams {
            scene: Scene::reference_geometry(Polarization::TM).with_admittance(optimal_2()),
            config: SopMapConfig::default(),
            region: Region::default(),
            resolution: [301, 301],
            feed_radius_frac: 0.5,
            steering_samples: 720,
            ring_radius_frac: 2.0,
            ring_samples: 720,
        }),
        _ => return None,
    };
    Some(RunConfig::new(command))
}
