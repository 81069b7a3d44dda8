//! Secrecy outage under Rayleigh fading and its coupling to the coating's
//! angular gain.
//!
//! Outage is `Pr[log₂((1+γ_B)/(1+γ_E)) < r_s]` with the capacity difference
//! left unclipped, so `r_s = 0` gives the nontrivial `γ̄_E/(γ̄_B+γ̄_E)`.

use num_complex::Complex;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::export;
use crate::field_map::{circular_maxima, Region};
use crate::mode_matching::{field_at, solve, ScatteringSolution};
use crate::scene::Scene;

/// Samples drawn from one counter-based stream in [`sop_monte_carlo`].
pub const MC_BATCH: usize = 1 << 16;

/// Smallest Monte Carlo sample count accepted.
pub const MC_MIN_SAMPLES: usize = 10_000;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SecrecyLink {
    pub mean_snr_bob: f64,
    pub mean_snr_eve: f64,
    /// bit/s/Hz.
    pub secrecy_rate: f64,
}

impl SecrecyLink {
    pub fn new(mean_snr_bob: f64, mean_snr_eve: f64, secrecy_rate: f64) -> Self {
        Self {
            mean_snr_bob,
            mean_snr_eve,
            secrecy_rate,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mean_snr_bob > 0.0 && self.mean_snr_eve > 0.0) {
            return Err(Error::Domain("mean SNRs must be positive".into()));
        }
        if !(self.secrecy_rate >= 0.0 && self.secrecy_rate.is_finite()) {
            return Err(Error::Domain("secrecy rate must be finite and >= 0".into()));
        }
        Ok(())
    }
}

/// `1 − γ̄_B/(γ̄_B + 2^{r_s}γ̄_E) · exp(−(2^{r_s}−1)/γ̄_B)`, evaluated as
/// `(2^{r_s}γ̄_E − γ̄_B·expm1(−(2^{r_s}−1)/γ̄_B)) / (γ̄_B + 2^{r_s}γ̄_E)` so
/// that `r_s = 0` reduces to `γ̄_E/(γ̄_B + γ̄_E)` bit for bit.
pub fn sop_closed_form(link: &SecrecyLink) -> f64 {
    let t = link.secrecy_rate.exp2();
    let scaled_eve = t * link.mean_snr_eve;
    let tail = -(-(t - 1.0) / link.mean_snr_bob).exp_m1();
    let sop = (scaled_eve + link.mean_snr_bob * tail) / (link.mean_snr_bob + scaled_eve);
    sop.clamp(0.0, 1.0)
}

/// Empirical outage over `samples` independent Rayleigh draws, with its
/// binomial standard error. Batch `b` draws from ChaCha8 stream `b` of
/// `seed`, so the result is independent of the thread count.
pub fn sop_monte_carlo(link: &SecrecyLink, samples: usize, seed: u64) -> Result<(f64, f64)> {
    link.validate()?;
    if samples < MC_MIN_SAMPLES {
        return Err(Error::Domain(format!(
            "at least {MC_MIN_SAMPLES} samples required, got {samples}"
        )));
    }
    let t = link.secrecy_rate.exp2();
    let batches = samples.div_ceil(MC_BATCH);
    let outages: u64 = (0..batches)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(b as u64);
            let count = MC_BATCH.min(samples - b * MC_BATCH);
            let mut hits = 0u64;
            for _ in 0..count {
                let xb: f64 = Exp1.sample(&mut rng);
                let xe: f64 = Exp1.sample(&mut rng);
                if 1.0 + link.mean_snr_bob * xb < t * (1.0 + link.mean_snr_eve * xe) {
                    hits += 1;
                }
            }
            hits
        })
        .sum();
    let p = outages as f64 / samples as f64;
    Ok((p, (p * (1.0 - p) / samples as f64).sqrt()))
}

/// Distance-ratio model: `γ̄_B = γ₀ (G_B/G_E) ρ^{−α}` and `γ̄_E = γ₀`
/// with `ρ = d_B/d_E`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinkModel {
    /// `G_B/G_E`, linear.
    pub gain_ratio: f64,
    pub path_loss_exponent: f64,
    /// `γ₀`, linear.
    pub reference_snr: f64,
}

impl Default for LinkModel {
    fn default() -> Self {
        Self {
            gain_ratio: 1.0,
            path_loss_exponent: 3.0,
            reference_snr: 1e6,
        }
    }
}

impl LinkModel {
    pub fn with_gain_db(self, db: f64) -> Self {
        Self {
            gain_ratio: db_to_linear(db),
            ..self
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gain_ratio > 0.0 && self.gain_ratio.is_finite()) {
            return Err(Error::Domain("gain ratio must be positive".into()));
        }
        if !(self.path_loss_exponent > 0.0 && self.path_loss_exponent.is_finite()) {
            return Err(Error::Domain("path-loss exponent must be positive".into()));
        }
        if !(self.reference_snr > 0.0 && self.reference_snr.is_finite()) {
            return Err(Error::Domain("reference SNR must be positive".into()));
        }
        Ok(())
    }

    /// Outage at `ρ = exp(ln_rho)`.
    pub fn sop_at(&self, ln_rho: f64, secrecy_rate: f64) -> f64 {
        let ln_bob =
            self.reference_snr.ln() + self.gain_ratio.ln() - self.path_loss_exponent * ln_rho;
        sop_closed_form(&SecrecyLink::new(
            ln_bob.exp(),
            self.reference_snr,
            secrecy_rate,
        ))
    }
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Bracket for the bisection in `ln ρ`.
const LN_RHO_BRACKET: f64 = 60.0;

/// Largest `ρ = d_B/d_E` with outage at most `sop_target`. Outage grows
/// with `ρ`, so the boundary is found by bisection in `ln ρ`.
pub fn max_distance_ratio(model: &LinkModel, sop_target: f64, secrecy_rate: f64) -> Result<f64> {
    model.validate()?;
    if !(sop_target > 0.0 && sop_target < 1.0) {
        return Err(Error::Domain("SOP target must lie in (0, 1)".into()));
    }
    if !(secrecy_rate >= 0.0 && secrecy_rate.is_finite()) {
        return Err(Error::Domain("secrecy rate must be finite and >= 0".into()));
    }
    let (mut lo, mut hi) = (-LN_RHO_BRACKET, LN_RHO_BRACKET);
    if model.sop_at(lo, secrecy_rate) > sop_target {
        return Err(Error::Infeasible(format!(
            "SOP target {sop_target} not reachable for rho >= e^-{LN_RHO_BRACKET}"
        )));
    }
    if model.sop_at(hi, secrecy_rate) <= sop_target {
        return Ok(hi.exp());
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if model.sop_at(mid, secrecy_rate) <= sop_target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-14 {
            break;
        }
    }
    Ok(lo.exp())
}

/// `(gain_ratio_db, max_distance_ratio)` for each gain in `gains_db`.
pub fn sop_curve(
    model: &LinkModel,
    gains_db: &[f64],
    sop_target: f64,
    secrecy_rate: f64,
) -> Result<Vec<(f64, f64)>> {
    gains_db
        .iter()
        .map(|&g| {
            Ok((
                g,
                max_distance_ratio(&model.with_gain_db(g), sop_target, secrecy_rate)?,
            ))
        })
        .collect()
}

pub fn sop_curve_csv(curve: &[(f64, f64)]) -> String {
    export::csv_table(
        &["gain_ratio_db", "max_distance_ratio"],
        curve.iter().map(|&(g, r)| vec![g, r]),
    )
}

/// Coating gain versus illumination angle, sampled uniformly on `[0, 2π)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GainPattern {
    pub angles: Vec<f64>,
    pub gains: Vec<f64>,
}

impl GainPattern {
    /// Periodic linear interpolation.
    pub fn gain_at(&self, psi: f64) -> f64 {
        let n = self.gains.len();
        let u = psi.rem_euclid(std::f64::consts::TAU) / std::f64::consts::TAU * n as f64;
        let k = (u.floor() as usize).min(n - 1);
        let f = u - k as f64;
        self.gains[k] * (1.0 - f) + self.gains[(k + 1) % n] * f
    }

    pub fn local_maxima(&self) -> Vec<usize> {
        circular_maxima(&self.gains)
    }

    /// `(angle, gain)` of the largest sample.
    pub fn peak(&self) -> (f64, f64) {
        let k = self
            .gains
            .iter()
            .enumerate()
            .fold(0, |b, (k, g)| if *g > self.gains[b] { k } else { b });
        (self.angles[k], self.gains[k])
    }
}

fn check_feed(scene: &Scene<f64>, r_fp: f64) -> Result<()> {
    if !(r_fp >= 0.0 && r_fp < scene.radius) {
        return Err(Error::Domain(format!(
            "feed radius {r_fp} m must lie inside the cylinder (a = {} m)",
            scene.radius
        )));
    }
    Ok(())
}

fn bare(scene: &Scene<f64>) -> Result<ScatteringSolution<f64>> {
    solve(&scene.with_admittance(Complex::new(0.0, 0.0)))
}

/// `|E(feed)|²/|E₀(feed)|²` as the source is moved to each of `n_angles`
/// illumination angles `ψ` at fixed distance. Moving the source by `Δ` is
/// the same as moving the feed by `−Δ`, so one solve covers every angle.
pub fn coating_gain_pattern(
    scene: &Scene<f64>,
    feed: (f64, f64),
    n_angles: usize,
) -> Result<GainPattern> {
    check_feed(scene, feed.0)?;
    if n_angles == 0 {
        return Err(Error::Domain(
            "gain pattern needs at least one angle".into(),
        ));
    }
    let coated = solve(scene)?;
    let reference = bare(scene)?;
    let mut angles = Vec::with_capacity(n_angles);
    let mut gains = Vec::with_capacity(n_angles);
    for k in 0..n_angles {
        let psi = std::f64::consts::TAU * k as f64 / n_angles as f64;
        let phi = feed.1 - (psi - scene.source_angle);
        let e = field_at(&coated, feed.0, phi)?.norm_sqr();
        let e0 = field_at(&reference, feed.0, phi)?.norm_sqr();
        angles.push(psi);
        gains.push(e / e0);
    }
    Ok(GainPattern { angles, gains })
}

/// Feed azimuth on the circle `r_fp` that maximizes the gain toward the
/// scene's own source, among `n` equally spaced candidates, with that gain.
pub fn steered_feed_azimuth(scene: &Scene<f64>, r_fp: f64, n: usize) -> Result<(f64, f64)> {
    check_feed(scene, r_fp)?;
    let coated = solve(scene)?;
    let reference = bare(scene)?;
    let mut best = (0.0, f64::NEG_INFINITY);
    for k in 0..n.max(1) {
        let phi = std::f64::consts::TAU * k as f64 / n.max(1) as f64;
        let g =
            field_at(&coated, r_fp, phi)?.norm_sqr() / field_at(&reference, r_fp, phi)?.norm_sqr();
        if g > best.1 {
            best = (phi, g);
        }
    }
    Ok(best)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SopMapConfig {
    pub bob_rx_power_dbm: f64,
    pub noise_dbm: f64,
    pub secrecy_rate: f64,
    pub path_loss_exponent: f64,
}

impl Default for SopMapConfig {
    fn default() -> Self {
        Self {
            bob_rx_power_dbm: 10.0,
            noise_dbm: -94.0,
            secrecy_rate: 0.0,
            path_loss_exponent: 3.0,
        }
    }
}

/// Link budget around a coated Bob at the origin. The transmitter is the
/// scene's source; Eve is omnidirectional and sees the field as perturbed
/// by Bob's cladding, `S(p) = |E(p)|²/|E₀(p)|²`.
#[derive(Clone, Debug)]
pub struct SopGeometry {
    pub config: SopMapConfig,
    /// Bob's gain toward the transmitter.
    pub bob_gain: f64,
    pub tx_position: (f64, f64),
    /// Transmit power in dBm that puts Bob at `bob_rx_power_dbm`.
    pub tx_power_dbm: f64,
    coated: ScatteringSolution<f64>,
    reference: ScatteringSolution<f64>,
}

impl SopGeometry {
    pub fn new(scene: &Scene<f64>, bob_gain: f64, config: SopMapConfig) -> Result<Self> {
        if !(bob_gain > 0.0) {
            return Err(Error::Domain("Bob's gain must be positive".into()));
        }
        let h = scene.source_distance;
        let tx_position = (h * scene.source_angle.cos(), h * scene.source_angle.sin());
        let path = -10.0 * config.path_loss_exponent * h.log10();
        let tx_power_dbm = config.bob_rx_power_dbm - 10.0 * bob_gain.log10() - path;
        Ok(Self {
            config,
            bob_gain,
            tx_position,
            tx_power_dbm,
            coated: solve(scene)?,
            reference: bare(scene)?,
        })
    }

    pub fn bob_snr(&self) -> f64 {
        db_to_linear(self.config.bob_rx_power_dbm - self.config.noise_dbm)
    }

    /// Local field perturbation `S(p)` at Cartesian `(x, y)` in metres.
    pub fn perturbation(&self, x: f64, y: f64) -> Result<f64> {
        let (r, phi) = (x.hypot(y), y.atan2(x));
        Ok(field_at(&self.coated, r, phi)?.norm_sqr()
            / field_at(&self.reference, r, phi)?.norm_sqr())
    }

    /// Eve's mean SNR for a given perturbation and distance to the
    /// transmitter.
    pub fn eve_snr(&self, perturbation: f64, distance: f64) -> f64 {
        let dbm = self.tx_power_dbm - 10.0 * self.config.path_loss_exponent * distance.log10()
            + 10.0 * perturbation.log10()
            - self.config.noise_dbm;
        db_to_linear(dbm)
    }

    pub fn sop(&self, eve_snr: f64) -> f64 {
        sop_closed_form(&SecrecyLink::new(
            self.bob_snr(),
            eve_snr,
            self.config.secrecy_rate,
        ))
    }

    /// Outage at `n` angles on the circle of radius `radius` (metres)
    /// around Bob with Eve's distance to the transmitter forced equal to
    /// Bob's, so only the cladding perturbation and Bob's gain differ.
    pub fn ring_profile(&self, radius: f64, n: usize) -> Result<Vec<f64>> {
        (0..n)
            .map(|k| {
                let phi = std::f64::consts::TAU * k as f64 / n as f64;
                let s = self.perturbation(radius * phi.cos(), radius * phi.sin())?;
                Ok(self.sop(self.bob_snr() * s / self.bob_gain))
            })
            .collect()
    }
}

/// Share of `values` at or below `threshold`.
pub fn secure_fraction(values: &[f64], threshold: f64) -> f64 {
    values.iter().filter(|v| **v <= threshold).count() as f64 / values.len().max(1) as f64
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SopMap {
    pub region: Region<f64>,
    pub resolution: [usize; 2],
    /// `log₁₀ SOP`, one row per y line, NaN where flagged.
    #[serde(skip)]
    pub values: Vec<f64>,
    /// Pixels inside the cladding, on the transmitter, or where the field
    /// is undefined.
    pub flagged: Vec<(usize, usize)>,
    pub bob_gain: f64,
    pub tx_power_dbm: f64,
}

impl SopMap {
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.resolution[0] + i]
    }

    pub fn to_csv(&self) -> String {
        export::csv_matrix(&self.values, self.resolution[0])
    }
}

/// `log₁₀ SOP` for an eavesdropper at every pixel of `region` (units of `a`).
pub fn sop_spatial_map(
    geometry: &SopGeometry,
    region: &Region<f64>,
    resolution: [usize; 2],
) -> Result<SopMap> {
    region.validate(resolution)?;
    let a = geometry.coated.scene.radius;
    let nx = resolution[0];
    let (tx, ty) = geometry.tx_position;
    let cells: Vec<Option<f64>> = (0..nx * resolution[1])
        .into_par_iter()
        .map(|idx| {
            let (u, v) = region.point(resolution, idx % nx, idx / nx);
            let (x, y) = (u * a, v * a);
            let d = (x - tx).hypot(y - ty);
            if x.hypot(y) < a || d < 1e-9 * a {
                return None;
            }
            let s = geometry.perturbation(x, y).ok().filter(|s| s.is_finite())?;
            Some(geometry.sop(geometry.eve_snr(s, d)).log10())
        })
        .collect();
    let flagged = cells
        .iter()
        .enumerate()
        .filter(|(_, c)| c.is_none())
        .map(|(idx, _)| (idx % nx, idx / nx))
        .collect();
    Ok(SopMap {
        region: *region,
        resolution,
        values: cells.into_iter().map(|c| c.unwrap_or(f64::NAN)).collect(),
        flagged,
        bob_gain: geometry.bob_gain,
        tx_power_dbm: geometry.tx_power_dbm,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scene::Polarization;

    #[test]
    fn closed_form_limits() {
        assert_eq!(sop_closed_form(&SecrecyLink::new(7.0, 7.0, 0.0)), 0.5);
        assert!(sop_closed_form(&SecrecyLink::new(10.0, 1e-300, 0.0)) < 1e-299);
        let (b, e) = (123.4, 5.6);
        assert_eq!(sop_closed_form(&SecrecyLink::new(b, e, 0.0)), e / (b + e));
        let v = sop_closed_form(&SecrecyLink::new(100.0, 1.0, 1.0));
        assert!((v - 0.029_362_908_089_051_0).abs() < 1e-15);
    }

    #[test]
    fn monte_carlo_is_reproducible() {
        let link = SecrecyLink::new(3.0, 2.0, 0.5);
        let a = sop_monte_carlo(&link, 200_000, 9).unwrap();
        let b = sop_monte_carlo(&link, 200_000, 9).unwrap();
        assert_eq!(a.0.to_bits(), b.0.to_bits());
        assert!((a.0 - sop_closed_form(&link)).abs() < 4.0 * a.1);
        assert!(sop_monte_carlo(&link, 10, 1).is_err());
    }

    #[test]
    fn distance_ratio_symmetric_boundary() {
        let rho = max_distance_ratio(&LinkModel::default(), 0.5, 0.0).unwrap();
        assert!((rho - 1.0).abs() < 1e-9);
    }

    #[test]
    fn distance_ratio_domain() {
        assert!(max_distance_ratio(&LinkModel::default(), 0.0, 0.0).is_err());
        assert!(max_distance_ratio(&LinkModel::default(), 1.0, 0.0).is_err());
        let bad = LinkModel {
            path_loss_exponent: 0.0,
            ..LinkModel::default()
        };
        assert!(max_distance_ratio(&bad, 0.1, 0.0).is_err());
    }

    #[test]
    fn pattern_interpolation() {
        let p = GainPattern {
            angles: vec![0.0, std::f64::consts::PI],
            gains: vec![1.0, 3.0],
        };
        assert_eq!(p.gain_at(0.0), 1.0);
        assert_eq!(p.gain_at(std::f64::consts::FRAC_PI_2), 2.0);
        assert_eq!(p.gain_at(-std::f64::consts::FRAC_PI_2), 2.0);
        assert_eq!(p.peak().1, 3.0);
    }

    #[test]
    fn bare_pattern_is_flat() {
        let scene = Scene::reference_geometry(Polarization::TM);
        let p = coating_gain_pattern(&scene, (0.025, 0.0), 36).unwrap();
        assert!(p.gains.iter().all(|g| (g - 1.0).abs() < 1e-12));
        assert!(coating_gain_pattern(&scene, (0.05, 0.0), 36).is_err());
    }

    #[test]
    fn centre_feed_pattern_is_flat() {
        let scene =
            Scene::reference_geometry(Polarization::TM).with_admittance(Complex::new(-0.4, 1.3));
        let p = coating_gain_pattern(&scene, (0.0, 0.0), 24).unwrap();
        let g0 = p.gains[0];
        assert!(p.gains.iter().all(|g| (g - g0).abs() < 1e-9 * g0));
    }

    #[test]
    fn eve_at_bob_with_equal_gain_is_even() {
        let scene = Scene::reference_geometry(Polarization::TM);
        let geo = SopGeometry::new(&scene, 5.0, SopMapConfig::default()).unwrap();
        let eve = geo.eve_snr(5.0, scene.source_distance);
        assert!((geo.sop(eve) - 0.5).abs() < 1e-12);
    }
}
