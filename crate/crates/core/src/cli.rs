//! Command-line front end.
//!
//! Every run resolves a [`RunConfig`] from a preset, a config file or the
//! subcommand defaults, applies flag overrides, validates it, and writes
//! its outputs plus a `meta.json` sidecar carrying the resolved config.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};
use num_complex::Complex;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::eh::{chain_energy_budget, ChainNode};
use crate::error::{Error, Result};
use crate::export::{self, csv_table, write_json, write_text};
use crate::field_map::{angular_profile, circular_maxima, intensity_map, Region};
use crate::mode_matching::solve;
use crate::pls::{
    coating_gain_pattern, secure_fraction, sop_closed_form, sop_curve, sop_curve_csv,
    sop_monte_carlo, sop_spatial_map, steered_feed_azimuth, LinkModel, SecrecyLink, SopGeometry,
    SopMapConfig,
};
use crate::presets;
use crate::scene::{classify_admittance, equivalent_slab_permittivity, Polarization, Scene};
use crate::sweep::{find_maxima, sweep, Resonance, SweepSpec};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

fn default_out() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: Command,
    #[serde(default = "default_out")]
    pub out: PathBuf,
    #[serde(default)]
    pub seed: u64,
    /// Worker threads; all cores when absent.
    #[serde(default)]
    pub workers: Option<usize>,
}

impl RunConfig {
    pub fn new(command: Command) -> Self {
        Self {
            command,
            out: default_out(),
            seed: 0,
            workers: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.workers == Some(0) {
            return Err(Error::Config("workers must be at least 1".into()));
        }
        self.command.validate()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "kebab-case")]
pub enum Command {
    Sweep(SweepParams),
    Fieldmap(FieldMapParams),
    Resonances(SweepParams),
    GainPattern(GainPatternParams),
    SopCurve(SopCurveParams),
    SopMap(SopMapParams),
    EhChain(EhChainParams),
    SlabEq(SlabEqParams),
}

impl Command {
    pub fn kind(&self) -> &'static str {
        match self {
            Command::Sweep(_) => "sweep",
            Command::Fieldmap(_) => "fieldmap",
            Command::Resonances(_) => "resonances",
            Command::GainPattern(_) => "gain-pattern",
            Command::SopCurve(_) => "sop-curve",
            Command::SopMap(_) => "sop-map",
            Command::EhChain(_) => "eh-chain",
            Command::SlabEq(_) => "slab-eq",
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Command::Sweep(p) | Command::Resonances(p) => {
                p.scene.validate()?;
                p.spec.validate()
            }
            Command::Fieldmap(p) => {
                p.scene.validate()?;
                p.region.validate(p.resolution)
            }
            Command::GainPattern(p) => {
                p.scene.validate()?;
                check_fraction("feed_radius_frac", p.feed_radius_frac)?;
                if p.n_angles < 3 || p.steering_samples == 0 {
                    return Err(Error::Config(
                        "n_angles >= 3 and steering_samples >= 1 required".into(),
                    ));
                }
                Ok(())
            }
            Command::SopCurve(p) => {
                p.model.validate().map_err(as_config)?;
                if p.sop_targets.is_empty() || p.secrecy_rates.is_empty() {
                    return Err(Error::Config(
                        "at least one SOP target and secrecy rate required".into(),
                    ));
                }
                for &t in &p.sop_targets {
                    if !(t > 0.0 && t < 1.0) {
                        return Err(Error::Config(format!("SOP target {t} outside (0, 1)")));
                    }
                }
                for &r in &p.secrecy_rates {
                    if !(r >= 0.0 && r.is_finite()) {
                        return Err(Error::Config(format!("secrecy rate {r} must be >= 0")));
                    }
                }
                if p.mc_samples != 0 && p.mc_samples < crate::pls::MC_MIN_SAMPLES {
                    return Err(Error::Config(format!(
                        "mc_samples must be 0 or at least {}",
                        crate::pls::MC_MIN_SAMPLES
                    )));
                }
                p.gains_db.values().map(|_| ())
            }
            Command::SopMap(p) => {
                p.scene.validate()?;
                p.region.validate(p.resolution)?;
                check_fraction("feed_radius_frac", p.feed_radius_frac)?;
                if !(p.ring_radius_frac > 1.0) {
                    return Err(Error::Config("ring must lie outside the cylinder".into()));
                }
                if p.ring_samples == 0 || p.steering_samples == 0 {
                    return Err(Error::Config("sample counts must be positive".into()));
                }
                if !(p.config.path_loss_exponent > 0.0) {
                    return Err(Error::Config("path-loss exponent must be positive".into()));
                }
                Ok(())
            }
            Command::EhChain(p) => {
                if p.nodes.is_empty() {
                    return Err(Error::Config("chain needs at least one node".into()));
                }
                p.nodes.iter().try_for_each(ChainNode::validate)
            }
            Command::SlabEq(p) => {
                if !(p.thickness_m > 0.0 && p.wavelength_m > 0.0) {
                    return Err(Error::Config(
                        "thickness and wavelength must be positive".into(),
                    ));
                }
                Ok(())
            }
        }
    }
}

fn check_fraction(name: &str, v: f64) -> Result<()> {
    if !(0.0..1.0).contains(&v) {
        return Err(Error::Config(format!("{name} must lie in [0, 1)")));
    }
    Ok(())
}

fn as_config(e: Error) -> Error {
    Error::Config(e.to_string())
}

fn ten() -> usize {
    10
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepParams {
    pub scene: Scene<f64>,
    pub spec: SweepSpec<f64>,
    /// Number of refined maxima reported.
    #[serde(default = "ten")]
    pub top_k: usize,
}

fn default_resolution() -> [usize; 2] {
    [601, 601]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldMapParams {
    pub scene: Scene<f64>,
    #[serde(default)]
    pub region: Region<f64>,
    #[serde(default = "default_resolution")]
    pub resolution: [usize; 2],
    #[serde(default)]
    pub pgm: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GainPatternParams {
    pub scene: Scene<f64>,
    /// Feed radius in units of `a`.
    pub feed_radius_frac: f64,
    /// Fixed feed azimuth; steered toward the source when absent.
    #[serde(default)]
    pub feed_azimuth_rad: Option<f64>,
    pub n_angles: usize,
    pub steering_samples: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GainRange {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl GainRange {
    /// Parses `start:stop:step` in dB.
    pub fn parse(s: &str) -> Result<Self> {
        let parts: Vec<_> = s.split(':').map(str::trim).collect();
        let bad = || Error::Config(format!("gain range '{s}' is not start:stop:step"));
        if parts.len() != 3 {
            return Err(bad());
        }
        let v: Vec<f64> = parts
            .iter()
            .map(|p| p.parse::<f64>().map_err(|_| bad()))
            .collect::<Result<_>>()?;
        let r = Self {
            start: v[0],
            stop: v[1],
            step: v[2],
        };
        r.values()?;
        Ok(r)
    }

    /// `start, start + step, …` up to `stop` inclusive.
    pub fn values(&self) -> Result<Vec<f64>> {
        if !(self.step > 0.0 && self.start.is_finite() && self.stop >= self.start) {
            return Err(Error::Config(
                "gain range needs step > 0 and stop >= start".into(),
            ));
        }
        let n = ((self.stop - self.start) / self.step + 1e-9).floor() as usize;
        if n > 1_000_000 {
            return Err(Error::Config("gain range has too many points".into()));
        }
        Ok((0..=n).map(|k| self.start + self.step * k as f64).collect())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SopCurveParams {
    pub model: LinkModel,
    pub sop_targets: Vec<f64>,
    pub secrecy_rates: Vec<f64>,
    pub gains_db: GainRange,
    /// Monte Carlo samples per check point; 0 disables the check.
    #[serde(default)]
    pub mc_samples: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SopMapParams {
    pub scene: Scene<f64>,
    pub config: SopMapConfig,
    pub region: Region<f64>,
    pub resolution: [usize; 2],
    pub feed_radius_frac: f64,
    pub steering_samples: usize,
    /// Radius of the equal-distance ring around Bob, units of `a`.
    pub ring_radius_frac: f64,
    pub ring_samples: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EhChainParams {
    pub nodes: Vec<ChainNode>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlabEqParams {
    /// Normalized admittance `[Re, Im]`.
    pub admittance: [f64; 2],
    pub thickness_m: f64,
    pub wavelength_m: f64,
}

/// Defaults used when neither a preset nor a config file is given.
pub fn default_command(kind: &str) -> Option<Command> {
    let from = |name| presets::preset(name).map(|c| c.command);
    Some(match kind {
        "sweep" => from("paper-fig4-tm")?,
        "fieldmap" => from("paper-fig5a")?,
        "resonances" => match from("paper-fig4-tm")? {
            Command::Sweep(p) => Command::Resonances(p),
            _ => return None,
        },
        "gain-pattern" => Command::GainPattern(GainPatternParams {
            scene: Scene::reference_geometry(Polarization::TM)
                .with_admittance(presets::optimal_2()),
            feed_radius_frac: 0.5,
            feed_azimuth_rad: None,
            n_angles: 360,
            steering_samples: 720,
        }),
        "sop-curve" => from("paper-fig7a")?,
        "sop-map" => from("paper-fig7b")?,
        "eh-chain" => Command::EhChain(EhChainParams {
            nodes: default_chain(),
        }),
        "slab-eq" => Command::SlabEq(SlabEqParams {
            admittance: presets::OPTIMAL_1_TM,
            thickness_m: 0.001,
            wavelength_m: 0.1,
        }),
        _ => return None,
    })
}

/// Three nodes on a line 2 m apart, each fed by the previous one.
fn default_chain() -> Vec<ChainNode> {
    (0..3u32)
        .map(|i| ChainNode {
            id: i,
            position: [2.0 * i as f64, 0.0],
            boresight: 0.0,
            tx_power: 0.1,
            capture_area: 0.01,
            collector_enhancement: 10f64.powf(2.5),
            conversion_efficiency: 0.5,
            uplink: i.checked_sub(1),
            uplink_information_bearing: true,
        })
        .collect()
}

#[derive(Parser, Debug)]
#[command(
    name = "metacladding",
    version,
    about = "Metasurface cladding solver and link analysis"
)]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Args, Debug, Clone, Default)]
struct Common {
    /// Parameter JSON for this subcommand, a full run config, or a previous meta.json.
    #[arg(long, value_name = "PATH", conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Built-in configuration.
    #[arg(long, value_name = "NAME")]
    preset: Option<String>,
    /// Output directory.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Worker threads.
    #[arg(long, value_name = "N")]
    workers: Option<usize>,
    /// Seed for Monte Carlo draws.
    #[arg(long, value_name = "N")]
    seed: Option<u64>,
}

#[derive(Subcommand, Debug)]
enum Sub {
    /// Enhancement over the complex admittance plane.
    Sweep {
        #[command(flatten)]
        common: Common,
    },
    /// Normalized |E|^2 map around the cylinder.
    Fieldmap {
        #[command(flatten)]
        common: Common,
        /// Also write map.pgm.
        #[arg(long)]
        pgm: bool,
    },
    /// Refined local maxima of an admittance sweep with their orders.
    Resonances {
        #[command(flatten)]
        common: Common,
        /// Number of maxima to report.
        #[arg(long)]
        k: Option<usize>,
    },
    /// Coating gain versus illumination angle at a feed point.
    GainPattern {
        #[command(flatten)]
        common: Common,
    },
    /// Maximum distance ratio versus gain ratio.
    SopCurve {
        #[command(flatten)]
        common: Common,
        /// Secrecy rates in bit/s/Hz, comma separated.
        #[arg(long, value_delimiter = ',')]
        rs: Option<Vec<f64>>,
        /// SOP targets, comma separated.
        #[arg(long, value_delimiter = ',')]
        sop: Option<Vec<f64>>,
        /// Path-loss exponent.
        #[arg(long)]
        alpha: Option<f64>,
        /// Gain ratios in dB as start:stop:step.
        #[arg(long)]
        gains: Option<String>,
        /// Monte Carlo samples per curve point, 0 to skip.
        #[arg(long)]
        mc_samples: Option<usize>,
    },
    /// log10 SOP around a coated receiver.
    SopMap {
        #[command(flatten)]
        common: Common,
    },
    /// Harvested power along a node chain.
    EhChain {
        #[command(flatten)]
        common: Common,
    },
    /// Slab permittivity equivalent to a sheet admittance.
    SlabEq {
        #[command(flatten)]
        common: Common,
        /// Real part of the normalized admittance.
        #[arg(long, allow_hyphen_values = true)]
        re: Option<f64>,
        /// Imaginary part of the normalized admittance.
        #[arg(long, allow_hyphen_values = true)]
        im: Option<f64>,
        /// Slab thickness in metres.
        #[arg(long)]
        thickness: Option<f64>,
    },
}

impl Sub {
    fn kind(&self) -> &'static str {
        match self {
            Sub::Sweep { .. } => "sweep",
            Sub::Fieldmap { .. } => "fieldmap",
            Sub::Resonances { .. } => "resonances",
            Sub::GainPattern { .. } => "gain-pattern",
            Sub::SopCurve { .. } => "sop-curve",
            Sub::SopMap { .. } => "sop-map",
            Sub::EhChain { .. } => "eh-chain",
            Sub::SlabEq { .. } => "slab-eq",
        }
    }

    fn common(&self) -> &Common {
        match self {
            Sub::Sweep { common }
            | Sub::Fieldmap { common, .. }
            | Sub::Resonances { common, .. }
            | Sub::GainPattern { common }
            | Sub::SopCurve { common, .. }
            | Sub::SopMap { common }
            | Sub::EhChain { common }
            | Sub::SlabEq { common, .. } => common,
        }
    }
}

/// Reads a config file: a full [`RunConfig`], a sidecar holding one under
/// `"config"`, or bare parameters for `kind`.
pub fn load_config(path: &Path, kind: &str) -> Result<RunConfig> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
    let value: Value = serde_json::from_str(&text)
        .map_err(|e| Error::Config(format!("config {} is not valid JSON: {e}", path.display())))?;
    let parsed = if let Some(inner) = value.get("config") {
        serde_json::from_value::<RunConfig>(inner.clone())
    } else if value.get("command").is_some() {
        serde_json::from_value::<RunConfig>(value)
    } else {
        serde_json::from_value::<Command>(json!({ "kind": kind, "params": value }))
            .map(RunConfig::new)
    };
    let cfg = parsed.map_err(|e| Error::Config(format!("config {}: {e}", path.display())))?;
    if cfg.command.kind() != kind {
        return Err(Error::Config(format!(
            "config {} is for '{}', not '{kind}'",
            path.display(),
            cfg.command.kind()
        )));
    }
    Ok(cfg)
}

fn resolve(sub: &Sub) -> Result<RunConfig> {
    let kind = sub.kind();
    let common = sub.common();
    let mut cfg = if let Some(name) = &common.preset {
        let cfg = presets::preset(name).ok_or_else(|| {
            Error::Config(format!(
                "unknown preset '{name}'; available: {}",
                presets::NAMES.join(", ")
            ))
        })?;
        if cfg.command.kind() != kind {
            return Err(Error::Config(format!(
                "preset '{name}' is for '{}', not '{kind}'",
                cfg.command.kind()
            )));
        }
        cfg
    } else if let Some(path) = &common.config {
        load_config(path, kind)?
    } else {
        RunConfig::new(default_command(kind).expect("every subcommand has defaults"))
    };
    if let Some(out) = &common.out {
        cfg.out = out.clone();
    }
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    if common.workers.is_some() {
        cfg.workers = common.workers;
    }
    match (&mut cfg.command, sub) {
        (Command::Fieldmap(p), Sub::Fieldmap { pgm, .. }) => p.pgm |= *pgm,
        (Command::Resonances(p), Sub::Resonances { k: Some(k), .. }) => p.top_k = *k,
        (
            Command::SopCurve(p),
            Sub::SopCurve {
                rs,
                sop,
                alpha,
                gains,
                mc_samples,
                ..
            },
        ) => {
            if let Some(rs) = rs {
                p.secrecy_rates = rs.clone();
            }
            if let Some(sop) = sop {
                p.sop_targets = sop.clone();
            }
            if let Some(alpha) = alpha {
                p.model.path_loss_exponent = *alpha;
            }
            if let Some(g) = gains {
                p.gains_db = GainRange::parse(g)?;
            }
            if let Some(n) = mc_samples {
                p.mc_samples = *n;
            }
        }
        (
            Command::SlabEq(p),
            Sub::SlabEq {
                re, im, thickness, ..
            },
        ) => {
            if let Some(re) = re {
                p.admittance[0] = *re;
            }
            if let Some(im) = im {
                p.admittance[1] = *im;
            }
            if let Some(t) = thickness {
                p.thickness_m = *t;
            }
        }
        _ => {}
    }
    cfg.validate()?;
    Ok(cfg)
}

fn resonance_json(r: &Resonance<f64>) -> Value {
    json!({
        "admittance": [r.admittance.re, r.admittance.im],
        "enhancement": r.enhancement,
        "enhancement_db": 10.0 * r.enhancement.log10(),
        "dominant_order": r.dominant_order,
        "coarse_index": r.coarse_index,
        "coarse_enhancement": r.coarse_enhancement,
    })
}

/// Runs the resolved configuration, writing into `cfg.out`. Returns the
/// summary stored in the sidecar.
pub fn execute(cfg: &RunConfig) -> Result<Value> {
    let out = &cfg.out;
    fs::create_dir_all(out)?;
    let summary = match &cfg.command {
        Command::Sweep(p) => {
            let grid = sweep(&p.scene, &p.spec)?;
            write_text(&out.join("grid.csv"), &grid.to_csv())?;
            let found = find_maxima(&grid, p.top_k)?;
            let (coarse_max, _) = grid.max().unwrap_or((f64::NAN, (0, 0)));
            let refined = found.first().map(|r| r.enhancement).unwrap_or(coarse_max);
            json!({
                "max_enhancement": coarse_max,
                "max_refined_enhancement": refined,
                "max_refined_enhancement_db": 10.0 * refined.log10(),
                "failures": grid.failures.len(),
                "resonances": found.iter().map(resonance_json).collect::<Vec<_>>(),
            })
        }
        Command::Resonances(p) => {
            let grid = sweep(&p.scene, &p.spec)?;
            let found = find_maxima(&grid, p.top_k)?;
            let rows = found.iter().enumerate().map(|(k, r)| {
                vec![
                    (k + 1) as f64,
                    r.admittance.re,
                    r.admittance.im,
                    r.enhancement,
                    r.dominant_order as f64,
                ]
            });
            write_text(
                &out.join("resonances.csv"),
                &csv_table(
                    &["rank", "re_y", "im_y", "enhancement", "dominant_order"],
                    rows,
                ),
            )?;
            json!({ "resonances": found.iter().map(resonance_json).collect::<Vec<_>>() })
        }
        Command::Fieldmap(p) => {
            let map = intensity_map(&p.scene, &p.region, p.resolution)?;
            write_text(&out.join("map.csv"), &map.to_csv())?;
            if p.pgm {
                write_text(&out.join("map.pgm"), &map.to_pgm())?;
            }
            let sol = solve(&p.scene)?;
            let profile = angular_profile(&sol, 0.95 * p.scene.radius, 360)?;
            json!({
                "peak_intensity": map.peak_intensity,
                "interior_mean_ratio": map.interior_mean_ratio,
                "boundary_profile_lobes": circular_maxima(&profile).len(),
                "db_floor": export::DB_FLOOR,
            })
        }
        Command::GainPattern(p) => {
            let r_fp = p.feed_radius_frac * p.scene.radius;
            let (azimuth, steered) = match p.feed_azimuth_rad {
                Some(az) => (az, false),
                None => (
                    steered_feed_azimuth(&p.scene, r_fp, p.steering_samples)?.0,
                    true,
                ),
            };
            let pattern = coating_gain_pattern(&p.scene, (r_fp, azimuth), p.n_angles)?;
            write_text(
                &out.join("pattern.csv"),
                &csv_table(
                    &["angle_rad", "gain"],
                    pattern
                        .angles
                        .iter()
                        .zip(&pattern.gains)
                        .map(|(a, g)| vec![*a, *g]),
                ),
            )?;
            let (peak_angle, peak_gain) = pattern.peak();
            json!({
                "feed_radius_m": r_fp,
                "feed_azimuth_rad": azimuth,
                "steered": steered,
                "lobes": pattern.local_maxima().len(),
                "peak_angle_rad": peak_angle,
                "peak_gain": peak_gain,
                "gain_toward_source": pattern.gain_at(p.scene.source_angle),
            })
        }
        Command::SopCurve(p) => {
            let gains = p.gains_db.values()?;
            let mut series = Vec::new();
            for &target in &p.sop_targets {
                for &rs in &p.secrecy_rates {
                    let curve = sop_curve(&p.model, &gains, target, rs)?;
                    let name = format!(
                        "sop_curve_sop{}_rs{}.csv",
                        export::fmt_float(target),
                        export::fmt_float(rs)
                    );
                    write_text(&out.join(&name), &sop_curve_csv(&curve))?;
                    if p.mc_samples > 0 {
                        let rows = curve
                            .iter()
                            .map(|&(g, rho)| {
                                let m = p.model.with_gain_db(g);
                                let bob = m.reference_snr
                                    * m.gain_ratio
                                    * rho.powf(-m.path_loss_exponent);
                                let link = SecrecyLink::new(bob, m.reference_snr, rs);
                                let (mc, se) = sop_monte_carlo(&link, p.mc_samples, cfg.seed)?;
                                Ok(vec![g, rho, sop_closed_form(&link), mc, se])
                            })
                            .collect::<Result<Vec<_>>>()?;
                        write_text(
                            &out.join(format!("mc_{name}")),
                            &csv_table(
                                &[
                                    "gain_ratio_db",
                                    "max_distance_ratio",
                                    "sop_closed_form",
                                    "sop_monte_carlo",
                                    "stderr",
                                ],
                                rows,
                            ),
                        )?;
                    }
                    series.push(json!({ "sop_target": target, "secrecy_rate": rs, "file": name }));
                }
            }
            json!({ "series": series })
        }
        Command::SopMap(p) => {
            let r_fp = p.feed_radius_frac * p.scene.radius;
            let (azimuth, bob_gain) = steered_feed_azimuth(&p.scene, r_fp, p.steering_samples)?;
            let geometry = SopGeometry::new(&p.scene, bob_gain, p.config)?;
            let map = sop_spatial_map(&geometry, &p.region, p.resolution)?;
            write_text(&out.join("sop_map.csv"), &map.to_csv())?;
            let ring =
                geometry.ring_profile(p.ring_radius_frac * p.scene.radius, p.ring_samples)?;
            write_text(
                &out.join("ring.csv"),
                &csv_table(
                    &["angle_rad", "sop"],
                    ring.iter().enumerate().map(|(k, s)| {
                        vec![std::f64::consts::TAU * k as f64 / p.ring_samples as f64, *s]
                    }),
                ),
            )?;
            json!({
                "feed_azimuth_rad": azimuth,
                "bob_gain": bob_gain,
                "tx_power_dbm": geometry.tx_power_dbm,
                "ring_secure_fraction_1e-4": secure_fraction(&ring, 1e-4),
                "flagged_pixels": map.flagged.len(),
            })
        }
        Command::EhChain(p) => {
            let report = chain_energy_budget(&p.nodes)?;
            write_json(&out.join("report.json"), &report)?;
            write_text(
                &out.join("harvest.csv"),
                &csv_table(
                    &["id", "harvested_w", "main_link_leak_w", "interference_w"],
                    report.nodes.iter().map(|n| {
                        vec![
                            n.id as f64,
                            n.harvested_w,
                            n.main_link_leak_w,
                            n.interference_w,
                        ]
                    }),
                ),
            )?;
            json!({
                "total_harvested_w": report.total_harvested_w,
                "total_transmitted_w": report.total_transmitted_w,
                "saturated_sources": report.saturated_sources,
            })
        }
        Command::SlabEq(p) => {
            let y = Complex::new(p.admittance[0], p.admittance[1]);
            let eps = equivalent_slab_permittivity(y, p.thickness_m, p.wavelength_m)?;
            let class = classify_admittance(y);
            write_text(
                &out.join("slab.csv"),
                &csv_table(
                    &["re_y", "im_y", "thickness_m", "re_eps", "im_eps"],
                    [vec![y.re, y.im, p.thickness_m, eps.re, eps.im]],
                ),
            )?;
            println!(
                "eps = {} {:+}i ({:?}, {:?})",
                eps.re, eps.im, class.energy, class.character
            );
            json!({ "permittivity": [eps.re, eps.im], "class": class })
        }
    };
    Ok(summary)
}

fn write_sidecar(cfg: &RunConfig, summary: &Value) -> Result<()> {
    let stamp = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    write_json(
        &cfg.out.join("meta.json"),
        &json!({
            "config": cfg,
            "summary": summary,
            "generated_unix_s": stamp,
            "tool_version": env!("CARGO_PKG_VERSION"),
        }),
    )
}

fn run_config(cfg: &RunConfig) -> Result<()> {
    let work = || -> Result<()> {
        let summary = execute(cfg)?;
        write_sidecar(cfg, &summary)
    };
    match cfg.workers {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::Config(format!("cannot start {n} workers: {e}")))?
            .install(work),
        None => work(),
    }
}

fn exit_code(e: &Error) -> i32 {
    if e.is_numerical() {
        EXIT_NUMERICAL
    } else {
        EXIT_CONFIG
    }
}

/// Parses `argv` (program name first), runs, and returns the exit status.
pub fn run<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    let result = resolve(&cli.command).and_then(|cfg| {
        run_config(&cfg)?;
        Ok(cfg)
    });
    match result {
        Ok(cfg) => {
            println!("{} -> {}", cfg.command.kind(), cfg.out.display());
            EXIT_OK
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
