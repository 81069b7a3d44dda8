//! Cartesian maps of `|E|²` around and inside the cladding.

use num_complex::Complex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::export::{self, DB_FLOOR};
use crate::mode_matching::{field_at, solve, ScatteringSolution};
use crate::real::Real;
use crate::scene::Scene;

/// Rectangle in units of the cylinder radius.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Real", deserialize = "T: Real"))]
pub struct Region<T> {
    pub x: [T; 2],
    pub y: [T; 2],
}

impl<T: Real> Default for Region<T> {
    fn default() -> Self {
        let three = T::lit(3.0);
        Self {
            x: [-three, three],
            y: [-three, three],
        }
    }
}

impl<T: Real> Region<T> {
    pub fn validate(&self, resolution: [usize; 2]) -> Result<()> {
        for r in [self.x, self.y] {
            if !(r[0].is_finite() && r[1].is_finite() && r[0] < r[1]) {
                return Err(Error::Config("region bounds must satisfy min < max".into()));
            }
        }
        if resolution[0] < 2 || resolution[1] < 2 {
            return Err(Error::Config("map resolution must be at least 2x2".into()));
        }
        Ok(())
    }

    /// Pixel `(i, j)` in units of `a`, `i` along x.
    pub fn point(&self, resolution: [usize; 2], i: usize, j: usize) -> (T, T) {
        (
            axis(self.x, i, resolution[0]),
            axis(self.y, j, resolution[1]),
        )
    }
}

fn axis<T: Real>(r: [T; 2], i: usize, n: usize) -> T {
    if i + 1 == n {
        return r[1];
    }
    r[0] + (r[1] - r[0]) * T::from_usize_lossy(i) / T::from_usize_lossy(n - 1)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Real", deserialize = "T: Real"))]
pub struct FieldMap<T> {
    pub region: Region<T>,
    /// `(n_x, n_y)`.
    pub resolution: [usize; 2],
    /// `10 log₁₀ |E|²` relative to the brightest pixel, one row per y line.
    /// NaN where the field is undefined (a pixel on a line source).
    #[serde(skip)]
    pub values: Vec<T>,
    /// Linear `|E|²` of the brightest pixel.
    pub peak_intensity: T,
    /// Mean interior `|E|²` divided by the same mean with the sheet removed,
    /// when any pixel falls inside the cylinder.
    pub interior_mean_ratio: Option<T>,
}

impl<T: Real> FieldMap<T> {
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.values[j * self.resolution[0] + i]
    }

    pub fn max_db(&self) -> T {
        self.values
            .iter()
            .copied()
            .filter(|v| !v.is_nan())
            .fold(T::neg_infinity(), T::max)
    }

    /// dB values clamped to the export floor.
    pub fn clamped_db(&self) -> Vec<f64> {
        self.values
            .iter()
            .map(|v| v.to_f64().unwrap_or(f64::NAN).max(DB_FLOOR))
            .collect()
    }

    pub fn to_csv(&self) -> String {
        export::csv_matrix(&self.clamped_db(), self.resolution[0])
    }

    pub fn to_pgm(&self) -> String {
        export::pgm_p2(&self.clamped_db(), self.resolution[0], DB_FLOOR, 0.0)
    }
}

fn intensity_grid<T: Real>(
    sol: &ScatteringSolution<T>,
    region: &Region<T>,
    resolution: [usize; 2],
    keep: impl Fn(T, T) -> bool + Sync,
) -> Vec<Option<T>> {
    let a = sol.scene.radius;
    let nx = resolution[0];
    (0..nx * resolution[1])
        .into_par_iter()
        .map(|idx| {
            let (u, v) = region.point(resolution, idx % nx, idx / nx);
            if !keep(u, v) {
                return None;
            }
            let (x, y) = (u * a, v * a);
            field_at(sol, x.hypot(y), y.atan2(x))
                .ok()
                .map(|e| e.norm_sqr())
                .filter(|p| p.is_finite())
        })
        .collect()
}

/// Normalized dB map of the scene's total field over `region` (units of
/// `a`), plus the interior mean-intensity ratio against `y = 0`.
pub fn intensity_map<T: Real>(
    scene: &Scene<T>,
    region: &Region<T>,
    resolution: [usize; 2],
) -> Result<FieldMap<T>> {
    region.validate(resolution)?;
    let sol = solve(scene)?;
    let linear = intensity_grid(&sol, region, resolution, |_, _| true);
    let peak = linear.iter().flatten().copied().fold(T::zero(), T::max);
    if peak <= T::zero() {
        return Err(Error::Domain("field vanishes over the whole map".into()));
    }
    let ten = T::lit(10.0);
    let values = linear
        .iter()
        .map(|p| match p {
            Some(p) => ten * (*p / peak).log10(),
            None => T::nan(),
        })
        .collect();

    let inside = |u: T, v: T| u.hypot(v) < T::one();
    let bare = solve(&scene.with_admittance(Complex::new(T::zero(), T::zero())))?;
    let reference = intensity_grid(&bare, region, resolution, inside);
    let nx = resolution[0];
    let (mut num, mut den, mut count) = (T::zero(), T::zero(), 0usize);
    for (idx, r) in reference.iter().enumerate() {
        let (u, v) = region.point(resolution, idx % nx, idx / nx);
        if let (true, Some(r), Some(p)) = (inside(u, v), r, linear[idx]) {
            num += p;
            den += *r;
            count += 1;
        }
    }
    let interior_mean_ratio = (count > 0 && den > T::zero()).then(|| num / den);

    Ok(FieldMap {
        region: *region,
        resolution,
        values,
        peak_intensity: peak,
        interior_mean_ratio,
    })
}

/// `|E|²` on the circle of radius `r` at `n` equally spaced angles from 0.
pub fn angular_profile<T: Real>(sol: &ScatteringSolution<T>, r: T, n: usize) -> Result<Vec<T>> {
    (0..n)
        .map(|k| {
            let phi = T::TAU() * T::from_usize_lossy(k) / T::from_usize_lossy(n);
            field_at(sol, r, phi).map(|e| e.norm_sqr())
        })
        .collect()
}

/// Indices of strict local maxima of a periodic sequence. On a plateau the
/// first sample counts.
pub fn circular_maxima<T: Real>(values: &[T]) -> Vec<usize> {
    let n = values.len();
    if n < 3 {
        return Vec::new();
    }
    (0..n)
        .filter(|&k| {
            let prev = values[(k + n - 1) % n];
            let next = values[(k + 1) % n];
            values[k] > prev && values[k] >= next && {
                // walk a plateau forward to confirm it descends afterwards
                let mut m = (k + 1) % n;
                while values[m] == values[k] && m != k {
                    m = (m + 1) % n;
                }
                values[m] < values[k]
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scene::Polarization;

    fn scene(y: Complex<f64>) -> Scene<f64> {
        Scene::reference_geometry(Polarization::TM).with_admittance(y)
    }

    #[test]
    fn bare_map_ratio_is_one() {
        let m =
            intensity_map(&scene(Complex::new(0.0, 0.0)), &Region::default(), [41, 41]).unwrap();
        assert_eq!(m.interior_mean_ratio, Some(1.0));
        assert_eq!(m.max_db(), 0.0);
        assert!(m.values.iter().all(|v| *v <= 0.0));
    }

    #[test]
    fn mirror_symmetry_about_source_axis() {
        let m = intensity_map(
            &scene(Complex::new(-0.3, 1.7)),
            &Region::default(),
            [31, 25],
        )
        .unwrap();
        for j in 0..25 {
            for i in 0..31 {
                let (a, b) = (m.get(i, j), m.get(30 - i, j));
                assert!((a - b).abs() < 1e-9 * a.abs().max(1.0), "{i},{j}: {a} {b}");
            }
        }
    }

    #[test]
    fn no_interior_pixels() {
        let region = Region {
            x: [2.0, 3.0],
            y: [2.0, 3.0],
        };
        let m = intensity_map(&scene(Complex::new(0.0, 1.0)), &region, [5, 5]).unwrap();
        assert_eq!(m.interior_mean_ratio, None);
    }

    #[test]
    fn region_checks() {
        let bad = Region {
            x: [1.0, -1.0],
            y: [0.0, 1.0],
        };
        assert!(intensity_map(&scene(Complex::new(0.0, 0.0)), &bad, [5, 5]).is_err());
        assert!(Region::<f64>::default().validate([1, 5]).is_err());
    }

    #[test]
    fn maxima_counting() {
        let six: Vec<f64> = (0..360)
            .map(|k| (3.0 * (k as f64).to_radians()).cos().powi(2))
            .collect();
        assert_eq!(circular_maxima(&six).len(), 6);
        assert!(circular_maxima(&[1.0; 10]).is_empty());
        assert_eq!(circular_maxima(&[0.0, 2.0, 2.0, 1.0]), vec![1]);
    }

    #[test]
    fn export_floor_and_layout() {
        let m = intensity_map(&scene(Complex::new(0.0, 0.0)), &Region::default(), [4, 3]).unwrap();
        let csv = m.to_csv();
        assert_eq!(csv.lines().count(), 3);
        assert!(csv.lines().all(|l| l.split(',').count() == 4));
        assert!(m.clamped_db().iter().all(|v| *v >= DB_FLOOR));
        assert!(m.to_pgm().starts_with("P2\n4 3\n255\n"));
    }
}
