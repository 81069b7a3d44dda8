//! Enhancement over the complex admittance plane and resonance search.

use num_complex::Complex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::export;
use crate::mode_matching::{harmonic_power, PowerMetric, ScatteringSolution, Solver};
use crate::real::Real;
use crate::scene::{Polarization, Scene};

/// Subdivision used when refining a coarse maximum: the ±1 cell
/// neighbourhood is resampled with this many points per axis.
pub const REFINE_POINTS: usize = 21;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Real", deserialize = "T: Real"))]
pub struct SweepSpec<T> {
    pub re_range: [T; 2],
    pub im_range: [T; 2],
    /// `(n_re, n_im)` grid points.
    pub resolution: [usize; 2],
    pub polarization: Polarization,
    #[serde(default)]
    pub metric: PowerMetric,
}

impl<T: Real> Default for SweepSpec<T> {
    fn default() -> Self {
        Self {
            re_range: [T::lit(-4.0), T::lit(4.0)],
            im_range: [T::lit(-12.0), T::lit(12.0)],
            resolution: [481, 721],
            polarization: Polarization::TM,
            metric: PowerMetric::AreaIntegral,
        }
    }
}

impl<T: Real> SweepSpec<T> {
    pub fn with_polarization(mut self, polarization: Polarization) -> Self {
        self.polarization = polarization;
        self
    }

    pub fn validate(&self) -> Result<()> {
        for (name, r) in [("re_range", self.re_range), ("im_range", self.im_range)] {
            if !(r[0].is_finite() && r[1].is_finite() && r[0] < r[1]) {
                return Err(Error::Config(format!("{name} must satisfy min < max")));
            }
        }
        if self.resolution[0] < 2 || self.resolution[1] < 2 {
            return Err(Error::Config("resolution must be at least 2x2".into()));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.resolution[0] * self.resolution[1]
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn re_at(&self, i: usize) -> T {
        lerp(self.re_range, i, self.resolution[0])
    }

    pub fn im_at(&self, j: usize) -> T {
        lerp(self.im_range, j, self.resolution[1])
    }

    pub fn admittance_at(&self, i: usize, j: usize) -> Complex<T> {
        Complex::new(self.re_at(i), self.im_at(j))
    }

    /// Grid spacing `(Δre, Δim)`.
    pub fn step(&self) -> (T, T) {
        (
            (self.re_range[1] - self.re_range[0]) / T::from_usize_lossy(self.resolution[0] - 1),
            (self.im_range[1] - self.im_range[0]) / T::from_usize_lossy(self.resolution[1] - 1),
        )
    }

    /// Same spacing over a window twice as wide on each axis, about the
    /// same centre.
    pub fn expanded(&self) -> Self {
        let widen = |r: [T; 2]| {
            let half = (r[1] - r[0]) / T::lit(2.0);
            [r[0] - half, r[1] + half]
        };
        Self {
            re_range: widen(self.re_range),
            im_range: widen(self.im_range),
            resolution: [2 * self.resolution[0] - 1, 2 * self.resolution[1] - 1],
            ..self.clone()
        }
    }
}

/// `lo + (hi − lo)·i/(n − 1)`; the end points are hit exactly and a zero
/// inside a symmetric range lands exactly on the grid for odd `n`.
fn lerp<T: Real>(r: [T; 2], i: usize, n: usize) -> T {
    if i + 1 == n {
        return r[1];
    }
    r[0] + (r[1] - r[0]) * T::from_usize_lossy(i) / T::from_usize_lossy(n - 1)
}

#[derive(Clone, Debug)]
pub struct SweepGrid<T> {
    pub spec: SweepSpec<T>,
    /// Scene the grid was computed for; its admittance is irrelevant.
    pub scene: Scene<T>,
    /// Row-major, imaginary part outer and real part inner. NaN at failures.
    pub values: Vec<T>,
    /// `(i_re, j_im)` of every point whose solve failed.
    pub failures: Vec<(usize, usize)>,
}

impl<T: Real> SweepGrid<T> {
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.values[j * self.spec.resolution[0] + i]
    }

    /// Largest finite value and its `(i_re, j_im)`.
    pub fn max(&self) -> Option<(T, (usize, usize))> {
        let nre = self.spec.resolution[0];
        self.values
            .iter()
            .enumerate()
            .filter(|(_, v)| v.is_finite())
            .fold(None, |best: Option<(T, usize)>, (idx, &v)| match best {
                Some((b, _)) if b >= v => best,
                _ => Some((v, idx)),
            })
            .map(|(v, idx)| (v, (idx % nre, idx / nre)))
    }

    /// Index of the grid point nearest to `y`.
    pub fn nearest(&self, y: Complex<T>) -> (usize, usize) {
        let (dre, dim) = self.spec.step();
        let clamp = |v: T, lo: T, d: T, n: usize| {
            let k = ((v - lo) / d).round().to_f64().unwrap_or(0.0);
            (k.max(0.0) as usize).min(n - 1)
        };
        (
            clamp(y.re, self.spec.re_range[0], dre, self.spec.resolution[0]),
            clamp(y.im, self.spec.im_range[0], dim, self.spec.resolution[1]),
        )
    }

    /// `true` if `(i, j)` is an interior point strictly above all 8
    /// neighbours, none of which failed.
    pub fn is_strict_local_max(&self, i: usize, j: usize) -> bool {
        let [nre, nim] = self.spec.resolution;
        if i == 0 || j == 0 || i + 1 >= nre || j + 1 >= nim {
            return false;
        }
        let c = self.get(i, j);
        if !c.is_finite() {
            return false;
        }
        for dj in 0..3 {
            for di in 0..3 {
                if di == 1 && dj == 1 {
                    continue;
                }
                let v = self.get(i + di - 1, j + dj - 1);
                if !(v < c) {
                    return false;
                }
            }
        }
        true
    }

    /// CSV with header `re_y,im_y,enhancement`, rows in storage order.
    pub fn to_csv(&self) -> String {
        let [nre, nim] = self.spec.resolution;
        let rows = (0..nim).flat_map(|j| {
            (0..nre).map(move |i| {
                vec![
                    self.spec.re_at(i).to_f64().unwrap_or(f64::NAN),
                    self.spec.im_at(j).to_f64().unwrap_or(f64::NAN),
                    self.get(i, j).to_f64().unwrap_or(f64::NAN),
                ]
            })
        });
        export::csv_table(&["re_y", "im_y", "enhancement"], rows)
    }
}

/// Enhancement at every grid point. The incident expansion and boundary
/// table are built once; points are evaluated in parallel and assembled by
/// index, so the result does not depend on scheduling.
pub fn sweep<T: Real>(template: &Scene<T>, spec: &SweepSpec<T>) -> Result<SweepGrid<T>> {
    spec.validate()?;
    let scene = template
        .with_polarization(spec.polarization)
        .with_admittance(Complex::new(T::zero(), T::zero()));
    let solver = Solver::new(&scene)?;
    let nre = spec.resolution[0];
    let values: Vec<Option<T>> = (0..spec.len())
        .into_par_iter()
        .map(|idx| {
            let y = spec.admittance_at(idx % nre, idx / nre);
            solver
                .enhancement(y, spec.metric)
                .ok()
                .filter(|v| v.is_finite())
        })
        .collect();
    let failures = values
        .iter()
        .enumerate()
        .filter(|(_, v)| v.is_none())
        .map(|(idx, _)| (idx % nre, idx / nre))
        .collect();
    Ok(SweepGrid {
        spec: spec.clone(),
        scene,
        values: values.into_iter().map(|v| v.unwrap_or(T::nan())).collect(),
        failures,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Real", deserialize = "T: Real"))]
pub struct Resonance<T> {
    /// Refined normalized admittance `Yη₀`.
    pub admittance: Complex<T>,
    pub enhancement: T,
    pub dominant_order: usize,
    /// `(i_re, j_im)` of the coarse maximum the refinement started from.
    pub coarse_index: [usize; 2],
    pub coarse_enhancement: T,
}

/// Up to `k` strict local maxima of the grid, each refined on a
/// `REFINE_POINTS²` subgrid spanning its ±1 cell neighbourhood and sorted
/// by refined enhancement, largest first.
pub fn find_maxima<T: Real>(grid: &SweepGrid<T>, k: usize) -> Result<Vec<Resonance<T>>> {
    if k == 0 {
        return Ok(Vec::new());
    }
    let [nre, nim] = grid.spec.resolution;
    let candidates: Vec<(usize, usize)> = (0..nim)
        .flat_map(|j| (0..nre).map(move |i| (i, j)))
        .filter(|&(i, j)| grid.is_strict_local_max(i, j))
        .collect();
    let solver = Solver::new(&grid.scene)?;
    let metric = grid.spec.metric;
    let (dre, dim) = grid.spec.step();
    let mut found = candidates
        .par_iter()
        .map(|&(i, j)| {
            let coarse = grid.get(i, j);
            let centre = grid.spec.admittance_at(i, j);
            let (mut best_y, mut best) = (centre, coarse);
            let half = (REFINE_POINTS - 1) / 2;
            let scale = T::from_usize_lossy(half);
            for b in 0..REFINE_POINTS {
                for a in 0..REFINE_POINTS {
                    let y = Complex::new(
                        centre.re + dre * T::from_i32_lossy(a as i32 - half as i32) / scale,
                        centre.im + dim * T::from_i32_lossy(b as i32 - half as i32) / scale,
                    );
                    if let Ok(v) = solver.enhancement(y, metric) {
                        if v.is_finite() && v > best {
                            best = v;
                            best_y = y;
                        }
                    }
                }
            }
            let order = dominant_order(&solver.solve(best_y)?, metric)?;
            Ok(Resonance {
                admittance: best_y,
                enhancement: best,
                dominant_order: order,
                coarse_index: [i, j],
                coarse_enhancement: coarse,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    found.sort_by(|a, b| {
        b.enhancement
            .partial_cmp(&a.enhancement)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.coarse_index.cmp(&b.coarse_index))
    });
    found.truncate(k);
    Ok(found)
}

/// `|n|` of the harmonic pair `±n` carrying the most interior power.
pub fn dominant_order<T: Real>(sol: &ScatteringSolution<T>, metric: PowerMetric) -> Result<usize> {
    let parts = harmonic_power(sol, metric)?;
    let mut by_order = vec![T::zero(); sol.order() + 1];
    for (n, p) in parts {
        by_order[n.unsigned_abs() as usize] += p;
    }
    Ok(by_order
        .iter()
        .enumerate()
        .fold((0, T::neg_infinity()), |best, (n, &p)| {
            if p > best.1 {
                (n, p)
            } else {
                best
            }
        })
        .0)
}
