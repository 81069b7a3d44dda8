//! Semi-analytic solver and link-analysis toolkit for circular
//! impedance-metasurface claddings.
//!
//! The electromagnetic core ([`specfun`], [`scene`], [`mode_matching`],
//! [`sweep`], [`field_map`]) is generic over the scalar type through
//! [`Real`]; the aliases below pin the common `f64` and `f32` instances.
//! Link-level analyses ([`pls`], [`eh`]) work in `f64`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod eh;
pub mod error;
pub mod export;
pub mod field_map;
pub mod mode_matching;
pub mod pls;
pub mod presets;
pub mod real;
pub mod scene;
pub mod specfun;
pub mod sweep;

pub use error::{Error, Result};
pub use mode_matching::PowerMetric;
pub use real::Real;
pub use scene::{AdmittanceClass, Polarization};

/// Free-space wave impedance `μ₀c` in ohms.
pub const ETA0: f64 = 376.730_313_668;

pub type Complex64 = num_complex::Complex<f64>;
pub type Complex32 = num_complex::Complex<f32>;

pub type Scene = scene::Scene<f64>;
pub type Scene32 = scene::Scene<f32>;
pub type ModalCoefficients = scene::ModalCoefficients<f64>;
pub type ModalCoefficients32 = scene::ModalCoefficients<f32>;
pub type ScatteringSolution = mode_matching::ScatteringSolution<f64>;
pub type ScatteringSolution32 = mode_matching::ScatteringSolution<f32>;
pub type Solver = mode_matching::Solver<f64>;
pub type Solver32 = mode_matching::Solver<f32>;
pub type SweepSpec = sweep::SweepSpec<f64>;
pub type SweepGrid = sweep::SweepGrid<f64>;
pub type Resonance = sweep::Resonance<f64>;
pub type FieldMap = field_map::FieldMap<f64>;
pub type CylinderTable = specfun::CylinderTable<f64>;
