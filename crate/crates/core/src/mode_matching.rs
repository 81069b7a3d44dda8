//! Per-harmonic solution of the impedance-sheet boundary-value problem.
//!
//! With the incident field `Σ B_n J_n(k₀r) e^{inφ}`, the interior field
//! `Σ A_n J_n(k₀r) e^{inφ}` and the scattered field `Σ C_n H_n^{(2)}(k₀r) e^{inφ}`,
//! every harmonic decouples on the circle. For TM (field `E_z`) the sheet
//! current `J_s = Y E` gives
//!
//! ```text
//! A_n J_n           = B_n J_n + C_n H_n
//! B_n J_n' + C_n H_n' − A_n J_n' = i y A_n J_n
//! ```
//!
//! whose closed-form solution is `A_n = B_n / (1 − i y J_n H_n / W)` and
//! `C_n = B_n (i y J_n² / W) / (1 − i y J_n H_n / W)` with the Wronskian
//! `W = J_n H_n' − J_n' H_n = −2i/(π k₀a)`. For TE the field is `η₀ H_z` and
//! the same expressions hold with `J_n, H_n` replaced by `J_n', H_n'` in the
//! admittance terms.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::real::Real;
use crate::scene::{incident_coefficients, ModalCoefficients, Polarization, Scene};
use crate::specfun::{CylinderTable, HankelKind};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PowerMetric {
    /// `(2πa/η₀) Σ |A_n|² J_n(k₀a)²`, the printed formula taken at `r = a`.
    Eq3Boundary,
    /// `(2π/η₀) Σ |A_n|² ∫₀^a J_n(k₀r)² r dr`, the power across the disc.
    #[default]
    AreaIntegral,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Real", deserialize = "T: Real"))]
pub struct ScatteringSolution<T> {
    pub scene: Scene<T>,
    pub incident: ModalCoefficients<T>,
    pub interior: ModalCoefficients<T>,
    pub scattered: ModalCoefficients<T>,
}

impl<T: Real> ScatteringSolution<T> {
    pub fn order(&self) -> usize {
        self.incident.order()
    }

    /// Same scene with a replaced interior expansion and no incident or
    /// scattered part. Used for synthetic power and order checks.
    pub fn synthetic(scene: Scene<T>, interior: ModalCoefficients<T>) -> Self {
        let n = interior.order();
        Self {
            scene,
            incident: ModalCoefficients::zeros(n),
            interior,
            scattered: ModalCoefficients::zeros(n),
        }
    }
}

/// `∫₀^a J_n(k₀r)² r dr` in closed form.
pub fn disc_integral<T: Real>(table: &CylinderTable<T>, n: i32, radius: T) -> T {
    let x = table.argument();
    let j = table.j(n);
    let jp = table.j_prime(n);
    let nn = T::from_i32_lossy(n);
    radius * radius / T::lit(2.0) * (jp * jp + (T::one() - nn * nn / (x * x)) * j * j)
}

fn metric_weight<T: Real>(table: &CylinderTable<T>, n: i32, radius: T, metric: PowerMetric) -> T {
    match metric {
        PowerMetric::Eq3Boundary => radius * table.j(n).powi(2),
        PowerMetric::AreaIntegral => disc_integral(table, n, radius),
    }
}

/// Precomputed state for repeated solves of one geometry at varying admittance.
#[derive(Clone, Debug)]
pub struct Solver<T> {
    scene: Scene<T>,
    incident: ModalCoefficients<T>,
    boundary: CylinderTable<T>,
    wronskian: Complex<T>,
    coupling: Vec<Complex<T>>,
    scatter: Vec<Complex<T>>,
    weights: [Vec<T>; 2],
    baseline: [T; 2],
}

fn metric_slot(metric: PowerMetric) -> usize {
    match metric {
        PowerMetric::Eq3Boundary => 0,
        PowerMetric::AreaIntegral => 1,
    }
}

impl<T: Real> Solver<T> {
    pub fn new(scene: &Scene<T>) -> Result<Self> {
        scene.validate()?;
        let incident = incident_coefficients(scene)?;
        let order = incident.order();
        let x = scene.size_parameter();
        let boundary = CylinderTable::new(order, x)?;
        let wronskian = Complex::new(T::zero(), -T::lit(2.0) / (T::PI() * x));
        let mut coupling = Vec::with_capacity(incident.len());
        let mut scatter = Vec::with_capacity(incident.len());
        for n in incident.orders() {
            let (f, h) = match scene.polarization {
                Polarization::TM => (boundary.j(n), boundary.hankel(n, HankelKind::Second)),
                Polarization::TE => (
                    boundary.j_prime(n),
                    boundary.hankel_prime(n, HankelKind::Second),
                ),
            };
            coupling.push(h * f / wronskian);
            scatter.push(Complex::new(f * f, T::zero()) / wronskian);
        }
        let weights = [PowerMetric::Eq3Boundary, PowerMetric::AreaIntegral].map(|m| {
            incident
                .orders()
                .map(|n| metric_weight(&boundary, n, scene.radius, m))
                .collect::<Vec<_>>()
        });
        let baseline = [0, 1].map(|slot| {
            let s: T = incident
                .values()
                .iter()
                .zip(&weights[slot])
                .map(|(b, w)| b.norm_sqr() * *w)
                .sum();
            s * T::TAU() / T::eta0()
        });
        Ok(Self {
            scene: scene.clone(),
            incident,
            boundary,
            wronskian,
            coupling,
            scatter,
            weights,
            baseline,
        })
    }

    pub fn scene(&self) -> &Scene<T> {
        &self.scene
    }

    pub fn incident(&self) -> &ModalCoefficients<T> {
        &self.incident
    }

    pub fn order(&self) -> usize {
        self.incident.order()
    }

    pub fn boundary_table(&self) -> &CylinderTable<T> {
        &self.boundary
    }

    pub fn wronskian(&self) -> Complex<T> {
        self.wronskian
    }

    /// `(A_n/B_n, C_n/B_n)` for harmonic index `idx` (`n + N`).
    #[inline]
    fn transfer(&self, y: Complex<T>, idx: usize) -> Result<(Complex<T>, Complex<T>)> {
        let iy = Complex::new(-y.im, y.re);
        let denom = Complex::new(T::one(), T::zero()) - iy * self.coupling[idx];
        if denom.re == T::zero() && denom.im == T::zero() {
            return Err(Error::Singular {
                harmonic: idx as i32 - self.order() as i32,
            });
        }
        let inv = Complex::new(T::one(), T::zero()) / denom;
        Ok((inv, iy * self.scatter[idx] * inv))
    }

    /// Interior power of the unsolved baseline (transparent sheet).
    pub fn baseline_power(&self, metric: PowerMetric) -> T {
        self.baseline[metric_slot(metric)]
    }

    /// Interior power at admittance `y` without materializing a solution.
    pub fn interior_power(&self, y: Complex<T>, metric: PowerMetric) -> Result<T> {
        let w = &self.weights[metric_slot(metric)];
        let mut sum = T::zero();
        for (idx, b) in self.incident.values().iter().enumerate() {
            let (ratio, _) = self.transfer(y, idx)?;
            sum += (*b * ratio).norm_sqr() * w[idx];
        }
        Ok(sum * T::TAU() / T::eta0())
    }

    /// `P(y) / P(0)`.
    pub fn enhancement(&self, y: Complex<T>, metric: PowerMetric) -> Result<T> {
        Ok(self.interior_power(y, metric)? / self.baseline_power(metric))
    }

    pub fn solve(&self, y: Complex<T>) -> Result<ScatteringSolution<T>> {
        let n = self.order();
        let mut interior = ModalCoefficients::zeros(n);
        let mut scattered = ModalCoefficients::zeros(n);
        for (idx, (m, b)) in self.incident.iter().enumerate() {
            let (a_ratio, c_ratio) = self.transfer(y, idx)?;
            interior.set(m, b * a_ratio);
            scattered.set(m, b * c_ratio);
        }
        Ok(ScatteringSolution {
            scene: self.scene.with_admittance(y),
            incident: self.incident.clone(),
            interior,
            scattered,
        })
    }
}

/// Solves the scene at its own admittance.
pub fn solve<T: Real>(scene: &Scene<T>) -> Result<ScatteringSolution<T>> {
    Solver::new(scene)?.solve(scene.admittance())
}

/// `P / P′` with `P′` the same scene at `y = 0`.
pub fn enhancement<T: Real>(scene: &Scene<T>, metric: PowerMetric) -> Result<T> {
    Solver::new(scene)?.enhancement(scene.admittance(), metric)
}

#[inline]
fn phase<T: Real>(n: i32, phi: T) -> Complex<T> {
    Complex::from_polar(T::one(), T::from_i32_lossy(n) * phi)
}

/// Total field (`E_z` for TM, `η₀H_z` for TE) at polar `(r, φ)`. Inside the
/// sheet the interior expansion is used; outside, the incident field is
/// summed directly from the line sources and the scattered expansion added.
pub fn field_at<T: Real>(sol: &ScatteringSolution<T>, r: T, phi: T) -> Result<Complex<T>> {
    if r < T::zero() || !r.is_finite() {
        return Err(Error::Domain(format!("radius {r} must be finite and ≥ 0")));
    }
    let k = sol.scene.wavenumber();
    let n = sol.order();
    if r < sol.scene.radius {
        let t = CylinderTable::regular(n, k * r)?;
        Ok(sol
            .interior
            .iter()
            .map(|(m, a)| a * t.j(m) * phase(m, phi))
            .fold(Complex::new(T::zero(), T::zero()), |acc, v| acc + v))
    } else {
        let (sp, cp) = phi.sin_cos();
        let inc = sol.scene.incident_field(r * cp, r * sp)?;
        Ok(inc + scattered_field(sol, r, phi)?)
    }
}

/// `Σ C_n H_n^{(2)}(k₀r) e^{inφ}`, `r > 0`.
pub fn scattered_field<T: Real>(sol: &ScatteringSolution<T>, r: T, phi: T) -> Result<Complex<T>> {
    let t = CylinderTable::new(sol.order(), sol.scene.wavenumber() * r)?;
    Ok(sol
        .scattered
        .iter()
        .map(|(m, c)| c * t.hankel(m, HankelKind::Second) * phase(m, phi))
        .fold(Complex::new(T::zero(), T::zero()), |acc, v| acc + v))
}

/// Field and `∂/∂r` of the field at `(r, φ)`, `r > 0`.
pub fn field_and_radial_derivative<T: Real>(
    sol: &ScatteringSolution<T>,
    r: T,
    phi: T,
) -> Result<(Complex<T>, Complex<T>)> {
    if !(r > T::zero()) || !r.is_finite() {
        return Err(Error::Domain(format!("radius {r} must be finite and > 0")));
    }
    let k = sol.scene.wavenumber();
    let zero = Complex::new(T::zero(), T::zero());
    if r < sol.scene.radius {
        let t = CylinderTable::regular(sol.order(), k * r)?;
        let mut f = zero;
        let mut d = zero;
        for (m, a) in sol.interior.iter() {
            let e = phase(m, phi);
            f += a * t.j(m) * e;
            d += a * (t.j_prime(m) * k) * e;
        }
        Ok((f, d))
    } else {
        let (mut f, mut d) = sol.scene.incident_field_and_radial_derivative(r, phi)?;
        let t = CylinderTable::new(sol.order(), k * r)?;
        for (m, c) in sol.scattered.iter() {
            let e = phase(m, phi);
            f += c * t.hankel(m, HankelKind::Second) * e;
            d += c * t.hankel_prime(m, HankelKind::Second) * e * k;
        }
        Ok((f, d))
    }
}

pub fn interior_power<T: Real>(sol: &ScatteringSolution<T>, metric: PowerMetric) -> Result<T> {
    let contributions = harmonic_power(sol, metric)?;
    let s: T = contributions.iter().map(|(_, p)| *p).sum();
    Ok(s)
}

/// Per-harmonic contributions to the interior power, `n = −N…N`.
pub fn harmonic_power<T: Real>(
    sol: &ScatteringSolution<T>,
    metric: PowerMetric,
) -> Result<Vec<(i32, T)>> {
    let table = CylinderTable::new(sol.order(), sol.scene.size_parameter())?;
    let scale = T::TAU() / T::eta0();
    Ok(sol
        .interior
        .iter()
        .map(|(n, a)| {
            (
                n,
                scale * a.norm_sqr() * metric_weight(&table, n, sol.scene.radius, metric),
            )
        })
        .collect())
}

/// Net time-average power absorbed by the sheet per unit length,
/// `∮ ½ Re[Y] |E_tan|² a dφ`. Positive for passive sheets.
pub fn absorbed_power<T: Real>(sol: &ScatteringSolution<T>) -> Result<T> {
    let table = CylinderTable::new(sol.order(), sol.scene.size_parameter())?;
    let sum: T = sol
        .interior
        .iter()
        .map(|(n, a)| {
            let w = match sol.scene.polarization {
                Polarization::TM => table.j(n),
                Polarization::TE => table.j_prime(n),
            };
            (a * w).norm_sqr()
        })
        .sum();
    Ok(T::PI() * sol.scene.radius * sol.scene.admittance_re / T::eta0() * sum)
}

/// Net power entering the circle of radius `r` through the radial Poynting
/// flux of the total field, integrated with the trapezoidal rule on
/// `samples` equally spaced angles.
pub fn inward_flux<T: Real>(sol: &ScatteringSolution<T>, r: T, samples: usize) -> Result<T> {
    let k = sol.scene.wavenumber();
    let step = T::TAU() / T::from_usize_lossy(samples);
    let mut total = T::zero();
    for i in 0..samples {
        let phi = step * T::from_usize_lossy(i);
        let (f, d) = field_and_radial_derivative(sol, r, phi)?;
        // ½ Re(i F conj(∂_r F)) / (k η₀), same form for both polarizations
        let density = (Complex::new(-f.im, f.re) * d.conj()).re / (T::lit(2.0) * k * T::eta0());
        total += density;
    }
    Ok(total * step * r)
}

/// Relative residuals of the two boundary conditions sampled at `samples`
/// equally spaced angles on `r = a`: `(continuity, jump)`.
pub fn boundary_residuals<T: Real>(sol: &ScatteringSolution<T>, samples: usize) -> Result<(T, T)> {
    let x = sol.scene.size_parameter();
    let t = CylinderTable::new(sol.order(), x)?;
    let y = sol.scene.admittance();
    let iy = Complex::new(-y.im, y.re);
    let zero = Complex::new(T::zero(), T::zero());
    let mut cont_res = T::zero();
    let mut cont_scale = T::zero();
    let mut jump_res = T::zero();
    let mut jump_scale = T::zero();
    let step = T::TAU() / T::from_usize_lossy(samples);
    for i in 0..samples {
        let phi = step * T::from_usize_lossy(i);
        let (mut fin, mut fout, mut din, mut dout) = (zero, zero, zero, zero);
        for m in sol.interior.orders() {
            let e = phase(m, phi);
            let h = t.hankel(m, HankelKind::Second);
            let hp = t.hankel_prime(m, HankelKind::Second);
            let (a, b, c) = (
                sol.interior.get(m),
                sol.incident.get(m),
                sol.scattered.get(m),
            );
            fin += a * t.j(m) * e;
            fout += (b * t.j(m) + c * h) * e;
            din += a * t.j_prime(m) * e;
            dout += (b * t.j_prime(m) + c * hp) * e;
        }
        let (c_lhs, c_rhs, j_lhs, j_rhs) = match sol.scene.polarization {
            // continuity of E_z, jump of H_φ
            Polarization::TM => (fin, fout, dout - din, iy * fin),
            // continuity of E_φ, jump of H_z
            Polarization::TE => (din, dout, fin - fout, iy * din),
        };
        cont_res = cont_res.max((c_lhs - c_rhs).norm());
        cont_scale = cont_scale.max(c_lhs.norm()).max(c_rhs.norm());
        jump_res = jump_res.max((j_lhs - j_rhs).norm());
        jump_scale = jump_scale
            .max(dout.norm())
            .max(din.norm())
            .max(fin.norm())
            .max(fout.norm())
            .max(j_rhs.norm());
    }
    let rel = |res: T, scale: T| if scale > T::zero() { res / scale } else { res };
    Ok((rel(cont_res, cont_scale), rel(jump_res, jump_scale)))
}
