//! Geometry, illumination and admittance of a coated-cylinder problem.
//!
//! Time dependence is `e^{+iωt}` throughout, so outgoing waves are
//! `H_n^{(2)}` and a sheet with `Re[y] > 0` absorbs power. Admittances are
//! normalized to free space, `y = Y·η₀`.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::real::Real;
use crate::specfun::{CylinderTable, HankelKind, MAX_ORDER};

/// Aperture line sources used when a scene does not say otherwise.
pub const DEFAULT_APERTURE_SAMPLES: usize = 9;

/// Extra harmonics kept beyond `ceil(k₀a)`.
pub const TRUNCATION_MARGIN: usize = 15;

/// Required `|B_N J_N(k₀a)| / max_n |B_n J_n(k₀a)|`.
pub const TAIL_TOLERANCE: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Polarization {
    /// Electric field along the cylinder axis.
    TM,
    /// Magnetic field along the cylinder axis.
    TE,
}

fn default_samples() -> usize {
    DEFAULT_APERTURE_SAMPLES
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Real"))]
pub struct Scene<T> {
    #[serde(rename = "lambda_m")]
    pub wavelength: T,
    #[serde(rename = "radius_m")]
    pub radius: T,
    #[serde(rename = "source_distance_m")]
    pub source_distance: T,
    #[serde(rename = "aperture_halfwidth_m")]
    pub aperture_halfwidth: T,
    #[serde(rename = "misalignment_rad")]
    pub misalignment: T,
    #[serde(rename = "source_angle_rad")]
    pub source_angle: T,
    pub admittance_re: T,
    pub admittance_im: T,
    pub polarization: Polarization,
    #[serde(default = "default_samples")]
    pub aperture_samples: usize,
}

impl<T: Real> Scene<T> {
    /// Published geometry: `a = 5 cm`, `λ = 10 cm`, `h = 1 m`, with the
    /// aperture half-width `λ/4` and the source below the cylinder on the
    /// negative y axis. The sheet is transparent (`y = 0`).
    pub fn reference_geometry(polarization: Polarization) -> Self {
        let wavelength = T::lit(0.1);
        Self {
            wavelength,
            radius: T::lit(0.05),
            source_distance: T::one(),
            aperture_halfwidth: wavelength / T::lit(4.0),
            misalignment: T::zero(),
            source_angle: -T::FRAC_PI_2(),
            admittance_re: T::zero(),
            admittance_im: T::zero(),
            polarization,
            aperture_samples: DEFAULT_APERTURE_SAMPLES,
        }
    }

    pub fn admittance(&self) -> Complex<T> {
        Complex::new(self.admittance_re, self.admittance_im)
    }

    pub fn with_admittance(&self, y: Complex<T>) -> Self {
        Self {
            admittance_re: y.re,
            admittance_im: y.im,
            ..self.clone()
        }
    }

    pub fn with_polarization(&self, polarization: Polarization) -> Self {
        Self {
            polarization,
            ..self.clone()
        }
    }

    pub fn with_source_angle(&self, source_angle: T) -> Self {
        Self {
            source_angle,
            ..self.clone()
        }
    }

    pub fn wavenumber(&self) -> T {
        T::TAU() / self.wavelength
    }

    /// `k₀a`.
    pub fn size_parameter(&self) -> T {
        self.wavenumber() * self.radius
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [
            self.wavelength,
            self.radius,
            self.source_distance,
            self.aperture_halfwidth,
            self.misalignment,
            self.source_angle,
            self.admittance_re,
            self.admittance_im,
        ]
        .iter()
        .all(|v| v.is_finite());
        if !finite {
            return Err(Error::Config("scene contains non-finite values".into()));
        }
        if self.wavelength <= T::zero() {
            return Err(Error::Config("wavelength must be positive".into()));
        }
        if self.radius <= T::zero() {
            return Err(Error::Config("radius must be positive".into()));
        }
        if self.source_distance <= self.radius {
            return Err(Error::Config(
                "source must lie outside the cylinder (h > a)".into(),
            ));
        }
        if self.aperture_halfwidth < T::zero() {
            return Err(Error::Config(
                "aperture half-width must be non-negative".into(),
            ));
        }
        if self.aperture_samples == 0 {
            return Err(Error::Config("aperture needs at least one sample".into()));
        }
        for s in self.line_sources() {
            if s.distance() <= self.radius {
                return Err(Error::Config("aperture intersects the cylinder".into()));
            }
        }
        Ok(())
    }

    /// Discretized aperture: equally spaced cell centres along the aperture
    /// line with a cosine amplitude taper. A zero half-width collapses to a
    /// single unit line source.
    pub fn line_sources(&self) -> Vec<LineSource<T>> {
        let (sin_s, cos_s) = self.source_angle.sin_cos();
        let cx = self.source_distance * cos_s;
        let cy = self.source_distance * sin_s;
        if self.aperture_halfwidth == T::zero() || self.aperture_samples == 1 {
            return vec![LineSource {
                x: cx,
                y: cy,
                weight: T::one(),
            }];
        }
        // tangent to the source circle, tilted by the misalignment
        let (sin_t, cos_t) = self.misalignment.sin_cos();
        let tx = -sin_s * cos_t - cos_s * sin_t;
        let ty = cos_s * cos_t - sin_s * sin_t;
        let d = self.aperture_halfwidth;
        let m = self.aperture_samples;
        let cell = T::lit(2.0) * d / T::from_usize_lossy(m);
        (0..m)
            .map(|j| {
                let s = -d + (T::from_usize_lossy(j) + T::lit(0.5)) * cell;
                LineSource {
                    x: cx + s * tx,
                    y: cy + s * ty,
                    weight: (T::FRAC_PI_2() * s / d).cos(),
                }
            })
            .collect()
    }

    /// Default truncation `ceil(k₀a) + 15`.
    pub fn default_truncation(&self) -> usize {
        let x = self.size_parameter().to_f64().unwrap_or(0.0);
        x.ceil() as usize + TRUNCATION_MARGIN
    }

    /// Incident field evaluated directly from the line sources.
    pub fn incident_field(&self, x: T, y: T) -> Result<Complex<T>> {
        let k = self.wavenumber();
        let mut total = Complex::new(T::zero(), T::zero());
        for s in self.line_sources() {
            let dist = ((x - s.x).powi(2) + (y - s.y).powi(2)).sqrt();
            let t = CylinderTable::new(0, k * dist)?;
            total += t.hankel(0, HankelKind::Second) * s.weight;
        }
        Ok(total)
    }

    /// Incident field and its radial derivative `∂/∂r` at polar `(r, φ)`.
    pub fn incident_field_and_radial_derivative(
        &self,
        r: T,
        phi: T,
    ) -> Result<(Complex<T>, Complex<T>)> {
        let k = self.wavenumber();
        let (sp, cp) = phi.sin_cos();
        let (x, y) = (r * cp, r * sp);
        let mut field = Complex::new(T::zero(), T::zero());
        let mut deriv = Complex::new(T::zero(), T::zero());
        for s in self.line_sources() {
            let dist = ((x - s.x).powi(2) + (y - s.y).powi(2)).sqrt();
            let t = CylinderTable::new(1, k * dist)?;
            field += t.hankel(0, HankelKind::Second) * s.weight;
            // d/dr of dist
            let ddist = ((x - s.x) * cp + (y - s.y) * sp) / dist;
            // H_0' = -H_1
            deriv -= t.hankel(1, HankelKind::Second) * (s.weight * k * ddist);
        }
        Ok((field, deriv))
    }
}

/// One 2D line source of the discretized aperture.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LineSource<T> {
    pub x: T,
    pub y: T,
    pub weight: T,
}

impl<T: Real> LineSource<T> {
    pub fn distance(&self) -> T {
        (self.x * self.x + self.y * self.y).sqrt()
    }

    pub fn azimuth(&self) -> T {
        self.y.atan2(self.x)
    }
}

/// Coefficients `c_n`, `n = −N…N`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Real", deserialize = "T: Real"))]
pub struct ModalCoefficients<T> {
    order: usize,
    #[serde(with = "pairs")]
    values: Vec<Complex<T>>,
}

mod pairs {
    use num_complex::Complex;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<T: Serialize + Copy, S: Serializer>(
        v: &[Complex<T>],
        s: S,
    ) -> Result<S::Ok, S::Error> {
        let p: Vec<[T; 2]> = v.iter().map(|c| [c.re, c.im]).collect();
        p.serialize(s)
    }

    pub fn deserialize<'de, T: Deserialize<'de>, D: Deserializer<'de>>(
        d: D,
    ) -> Result<Vec<Complex<T>>, D::Error> {
        let p: Vec<[T; 2]> = Vec::deserialize(d)?;
        Ok(p.into_iter().map(|[re, im]| Complex { re, im }).collect())
    }
}

impl<T: Real> ModalCoefficients<T> {
    pub fn zeros(order: usize) -> Self {
        Self {
            order,
            values: vec![Complex::new(T::zero(), T::zero()); 2 * order + 1],
        }
    }

    /// Builds from values ordered `n = −N…N`.
    pub fn from_values(values: Vec<Complex<T>>) -> Result<Self> {
        if values.len().is_multiple_of(2) {
            return Err(Error::Domain(
                "coefficient vector must have odd length 2N+1".into(),
            ));
        }
        Ok(Self {
            order: values.len() / 2,
            values,
        })
    }

    /// Single harmonic `c_n = δ_{n,m}`.
    pub fn unit(order: usize, m: i32) -> Self {
        let mut c = Self::zeros(order);
        c.set(m, Complex::new(T::one(), T::zero()));
        c
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    #[inline]
    fn index(&self, n: i32) -> usize {
        (n + self.order as i32) as usize
    }

    #[inline]
    pub fn get(&self, n: i32) -> Complex<T> {
        if n.unsigned_abs() as usize > self.order {
            return Complex::new(T::zero(), T::zero());
        }
        self.values[self.index(n)]
    }

    pub fn set(&mut self, n: i32, v: Complex<T>) {
        let i = self.index(n);
        self.values[i] = v;
    }

    pub fn values(&self) -> &[Complex<T>] {
        &self.values
    }

    pub fn orders(&self) -> std::ops::RangeInclusive<i32> {
        -(self.order as i32)..=self.order as i32
    }

    pub fn iter(&self) -> impl Iterator<Item = (i32, Complex<T>)> + '_ {
        self.orders().zip(self.values.iter().copied())
    }

    pub fn scaled(&self, factor: Complex<T>) -> Self {
        Self {
            order: self.order,
            values: self.values.iter().map(|c| *c * factor).collect(),
        }
    }

    /// `|c_{±N} w_{±N}| / max_n |c_n w_n|` for per-order weights `w`.
    pub fn weighted_tail_ratio(&self, weight: impl Fn(i32) -> T) -> T {
        let n = self.order as i32;
        let max = self
            .iter()
            .map(|(m, c)| c.norm() * weight(m).abs())
            .fold(T::zero(), T::max);
        if max == T::zero() {
            return T::zero();
        }
        let tail =
            (self.get(n).norm() * weight(n).abs()).max(self.get(-n).norm() * weight(-n).abs());
        tail / max
    }
}

/// `B_n` at a fixed truncation, no convergence check.
pub fn incident_coefficients_with_order<T: Real>(
    scene: &Scene<T>,
    order: usize,
) -> Result<ModalCoefficients<T>> {
    scene.validate()?;
    if order > MAX_ORDER {
        return Err(Error::Domain(format!(
            "truncation {order} exceeds the ceiling {MAX_ORDER}"
        )));
    }
    let k = scene.wavenumber();
    let mut coeffs = ModalCoefficients::zeros(order);
    for s in scene.line_sources() {
        let table = CylinderTable::new(order, k * s.distance())?;
        let az = s.azimuth();
        for n in coeffs.orders() {
            let phase = Complex::from_polar(T::one(), -T::from_i32_lossy(n) * az);
            let v = coeffs.get(n) + table.hankel(n, HankelKind::Second) * phase * s.weight;
            coeffs.set(n, v);
        }
    }
    Ok(coeffs)
}

/// `B_n` with `Σ B_n J_n(k₀r) e^{inφ}` reproducing the incident field for `r`
/// inside the source circle. The truncation starts at the scene default and
/// doubles until the boundary tail ratio falls below [`TAIL_TOLERANCE`].
pub fn incident_coefficients<T: Real>(scene: &Scene<T>) -> Result<ModalCoefficients<T>> {
    let x = scene.size_parameter();
    let mut order = scene.default_truncation().min(MAX_ORDER);
    loop {
        let coeffs = incident_coefficients_with_order(scene, order)?;
        let table = CylinderTable::regular(order, x)?;
        let ratio = coeffs.weighted_tail_ratio(|n| table.j(n));
        if ratio < T::lit(TAIL_TOLERANCE) {
            return Ok(coeffs);
        }
        if order >= MAX_ORDER {
            return Err(Error::Convergence {
                tail_ratio: ratio.to_f64().unwrap_or(f64::NAN),
                order,
            });
        }
        order = (order * 2).min(MAX_ORDER);
    }
}

/// Cosine emission law, zero beyond ±π/2 off boresight.
pub fn lambertian_gain<T: Real>(offset: T) -> T {
    let wrapped = wrap_angle(offset);
    if wrapped.abs() >= T::FRAC_PI_2() {
        T::zero()
    } else {
        wrapped.cos().max(T::zero())
    }
}

/// Wraps into `(−π, π]`.
pub fn wrap_angle<T: Real>(a: T) -> T {
    let tau = T::TAU();
    let mut w = a % tau;
    if w > T::PI() {
        w -= tau;
    } else if w <= -T::PI() {
        w += tau;
    }
    w
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EnergyClass {
    Active,
    Passive,
    Lossless,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Character {
    Dielectric,
    Plasmonic,
    Neutral,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AdmittanceClass {
    pub energy: EnergyClass,
    pub character: Character,
}

pub fn classify_admittance<T: Real>(y: Complex<T>) -> AdmittanceClass {
    let energy = if y.re > T::zero() {
        EnergyClass::Passive
    } else if y.re < T::zero() {
        EnergyClass::Active
    } else {
        EnergyClass::Lossless
    };
    let character = if y.im > T::zero() {
        Character::Dielectric
    } else if y.im < T::zero() {
        Character::Plasmonic
    } else {
        Character::Neutral
    };
    AdmittanceClass { energy, character }
}

/// Permittivity of a slab of thickness `g` equivalent to the sheet:
/// `ε = 1 + y / (i k₀ g)`.
pub fn equivalent_slab_permittivity<T: Real>(
    y: Complex<T>,
    thickness: T,
    wavelength: T,
) -> Result<Complex<T>> {
    let k = slab_wavenumber(thickness, wavelength)?;
    let denom = Complex::new(T::zero(), k * thickness);
    Ok(Complex::new(T::one(), T::zero()) + y / denom)
}

/// Inverse of [`equivalent_slab_permittivity`].
pub fn admittance_from_slab<T: Real>(
    permittivity: Complex<T>,
    thickness: T,
    wavelength: T,
) -> Result<Complex<T>> {
    let k = slab_wavenumber(thickness, wavelength)?;
    Ok((permittivity - T::one()) * Complex::new(T::zero(), k * thickness))
}

fn slab_wavenumber<T: Real>(thickness: T, wavelength: T) -> Result<T> {
    if !(thickness > T::zero()) || !thickness.is_finite() {
        return Err(Error::Domain(format!(
            "slab thickness must be positive, got {thickness}"
        )));
    }
    if !(wavelength > T::zero()) || !wavelength.is_finite() {
        return Err(Error::Domain(format!(
            "wavelength must be positive, got {wavelength}"
        )));
    }
    Ok(T::TAU() / wavelength)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn reference() -> Scene<f64> {
        Scene::reference_geometry(Polarization::TM)
    }

    #[test]
    fn lambertian_values() {
        assert_eq!(lambertian_gain(0.0_f64), 1.0);
        assert_eq!(lambertian_gain(FRAC_PI_2), 0.0);
        assert!((lambertian_gain(PI / 3.0) - 0.5).abs() < 1e-15);
        assert_eq!(lambertian_gain(-2.0_f64), 0.0);
    }

    #[test]
    fn classification_examples() {
        let c = classify_admittance(Complex::new(0.0_f64, 0.0));
        assert_eq!(c.energy, EnergyClass::Lossless);
        assert_eq!(c.character, Character::Neutral);
        let c = classify_admittance(Complex::new(0.5_f64, 2.0));
        assert_eq!(
            (c.energy, c.character),
            (EnergyClass::Passive, Character::Dielectric)
        );
        let c = classify_admittance(Complex::new(-0.1_f64, -1.0));
        assert_eq!(
            (c.energy, c.character),
            (EnergyClass::Active, Character::Plasmonic)
        );
    }

    #[test]
    fn slab_vacuum_and_dielectric() {
        let eps = equivalent_slab_permittivity(Complex::new(0.0, 0.0), 1e-3, 0.1).unwrap();
        assert_eq!(eps, Complex::new(1.0, 0.0));
        let eps = equivalent_slab_permittivity(Complex::new(0.0_f64, 0.7), 1e-3, 0.1).unwrap();
        assert!(eps.im.abs() < 1e-15);
        assert!(eps.re > 1.0);
        assert!(equivalent_slab_permittivity(Complex::new(0.0, 1.0), 0.0, 0.1).is_err());
    }

    #[test]
    fn validation_rejects_bad_scenes() {
        let mut s = reference();
        s.source_distance = 0.04;
        assert!(s.validate().is_err());
        let mut s = reference();
        s.wavelength = -1.0;
        assert!(s.validate().is_err());
        let mut s = reference();
        s.source_distance = 0.06;
        s.aperture_halfwidth = 0.2;
        s.misalignment = FRAC_PI_2;
        assert!(s.validate().is_err());
        assert!(reference().validate().is_ok());
    }

    #[test]
    fn point_source_collapses() {
        let mut s = reference();
        s.aperture_halfwidth = 0.0;
        let src = s.line_sources();
        assert_eq!(src.len(), 1);
        assert!((src[0].distance() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn aperture_taper_is_symmetric() {
        let src = reference().line_sources();
        assert_eq!(src.len(), 9);
        for j in 0..9 {
            assert!((src[j].weight - src[8 - j].weight).abs() < 1e-15);
            assert!((src[j].x + src[8 - j].x).abs() < 1e-15);
        }
        assert!((src[4].weight - 1.0).abs() < 1e-15);
    }

    #[test]
    fn scene_json_keys() {
        let v = serde_json::to_value(reference()).unwrap();
        for key in [
            "lambda_m",
            "radius_m",
            "source_distance_m",
            "aperture_halfwidth_m",
            "misalignment_rad",
            "source_angle_rad",
            "admittance_re",
            "admittance_im",
            "polarization",
        ] {
            assert!(v.get(key).is_some(), "{key}");
        }
        assert_eq!(v["polarization"], "TM");
        let back: Scene<f64> = serde_json::from_value(v).unwrap();
        assert_eq!(back, reference());
    }

    #[test]
    fn coefficients_json_pairs() {
        let c = ModalCoefficients::<f64>::unit(1, -1);
        let v = serde_json::to_value(&c).unwrap();
        assert_eq!(v["values"][0], serde_json::json!([1.0, 0.0]));
        let back: ModalCoefficients<f64> = serde_json::from_value(v).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn reference_tail_certificate_at_twenty() {
        let s = reference();
        let b = incident_coefficients_with_order(&s, 20).unwrap();
        let t = CylinderTable::regular(20, s.size_parameter()).unwrap();
        let ratio = b.weighted_tail_ratio(|n| t.j(n));
        assert!(ratio < 1e-10, "{ratio}");
    }

    #[test]
    fn truncation_exhaustion_is_reported() {
        // a huge cylinder cannot be certified within the order ceiling
        let mut s = reference();
        s.radius = 5.0;
        s.source_distance = 20.0;
        match incident_coefficients(&s) {
            Err(Error::Convergence { order, .. }) => assert_eq!(order, MAX_ORDER),
            other => panic!("expected convergence error, got {other:?}"),
        }
    }
}
