//! Flat-torus spectral calculus on `C / (Z + tau Z)`.
//!
//! Nodes sit at `z = j/n + (k/n) tau` for `j, k in 0..n` and are stored
//! row-major with `j` running fastest. Scalar fields are plain samples;
//! (1,1)-forms are stored as densities against Lebesgue measure `dx dy`, with
//! every curvature-type quantity divided by `2 pi` so that a degree-one
//! curvature integrates to 1.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::GeometryError;

/// Integrals below this magnitude count as zero for [`poisson_solve`].
pub const MEAN_TOL: f64 = 1e-6;

struct FftPlans {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

/// Uniform sampling of the fundamental domain of the lattice `Z + tau Z`.
#[derive(Clone)]
pub struct TorusGrid {
    tau: Complex64,
    n: usize,
    cell_area: f64,
    plans: Arc<FftPlans>,
}

impl fmt::Debug for TorusGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TorusGrid")
            .field("tau", &self.tau)
            .field("n", &self.n)
            .field("cell_area", &self.cell_area)
            .finish()
    }
}

impl PartialEq for TorusGrid {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.tau == other.tau
    }
}

/// Build a grid with `n x n` nodes on the torus with lattice parameter `tau`.
pub fn make_grid(tau: Complex64, n: usize) -> Result<TorusGrid, GeometryError> {
    TorusGrid::new(tau, n)
}

impl TorusGrid {
    pub fn new(tau: Complex64, n: usize) -> Result<Self, GeometryError> {
        if !(tau.im > 0.0) || !tau.re.is_finite() || !tau.im.is_finite() {
            return Err(GeometryError::NonPositiveImaginaryPart(tau.im));
        }
        if n < 8 || !n.is_power_of_two() {
            return Err(GeometryError::BadGridSize(n));
        }
        let mut planner = FftPlanner::new();
        let plans = FftPlans {
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        };
        Ok(TorusGrid {
            tau,
            n,
            cell_area: tau.im / (n * n) as f64,
            plans: Arc::new(plans),
        })
    }

    pub fn tau(&self) -> Complex64 {
        self.tau
    }

    /// Samples per lattice direction.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Total number of nodes, `n^2`.
    pub fn len(&self) -> usize {
        self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn cell_area(&self) -> f64 {
        self.cell_area
    }

    /// Area of the fundamental domain, `Im tau`.
    pub fn area(&self) -> f64 {
        self.tau.im
    }

    pub fn index(&self, j: usize, k: usize) -> usize {
        (k % self.n) * self.n + (j % self.n)
    }

    /// Lattice coordinates `(s, u)` of a node, `z = s + u tau`.
    pub fn lattice_coords(&self, idx: usize) -> (f64, f64) {
        let j = idx % self.n;
        let k = idx / self.n;
        (j as f64 / self.n as f64, k as f64 / self.n as f64)
    }

    /// Complex coordinate of a node.
    pub fn point(&self, idx: usize) -> Complex64 {
        let (s, u) = self.lattice_coords(idx);
        Complex64::new(s, 0.0) + self.tau * u
    }

    pub fn points(&self) -> impl Iterator<Item = Complex64> + '_ {
        (0..self.len()).map(move |i| self.point(i))
    }

    /// Index of the grid node nearest to `z` (after reduction mod the lattice).
    pub fn nearest_index(&self, z: Complex64) -> usize {
        let u = z.im / self.tau.im;
        let s = z.re - u * self.tau.re;
        let nf = self.n as f64;
        let j = ((s * nf).round() as i64).rem_euclid(self.n as i64) as usize;
        let k = ((u * nf).round() as i64).rem_euclid(self.n as i64) as usize;
        self.index(j, k)
    }

    fn signed_mode(&self, i: usize) -> f64 {
        if i < self.n / 2 {
            i as f64
        } else {
            i as f64 - self.n as f64
        }
    }

    /// Physical wavevector `(k_x, k_y)` of the Fourier mode stored at `idx`.
    fn wavevector(&self, idx: usize) -> (f64, f64) {
        let p = self.signed_mode(idx % self.n);
        let q = self.signed_mode(idx / self.n);
        let kx = 2.0 * PI * p;
        let ky = 2.0 * PI * (q - self.tau.re * p) / self.tau.im;
        (kx, ky)
    }

    fn is_nyquist(&self, idx: usize) -> bool {
        let half = self.n / 2;
        idx % self.n == half || idx / self.n == half
    }

    /// Symbol of `(1/2pi) i d dbar`, i.e. `-|k|^2 / (4 pi)`.
    pub(crate) fn curvature_symbol(&self, idx: usize) -> f64 {
        let (kx, ky) = self.wavevector(idx);
        -(kx * kx + ky * ky) / (4.0 * PI)
    }

    fn fft2(&self, data: &mut [Complex64], inverse: bool) {
        let n = self.n;
        let plan = if inverse {
            &self.plans.inverse
        } else {
            &self.plans.forward
        };
        for row in data.chunks_exact_mut(n) {
            plan.process(row);
        }
        let mut col = vec![Complex64::new(0.0, 0.0); n];
        for j in 0..n {
            for k in 0..n {
                col[k] = data[k * n + j];
            }
            plan.process(&mut col);
            for k in 0..n {
                data[k * n + j] = col[k];
            }
        }
        if inverse {
            let scale = 1.0 / (n * n) as f64;
            for v in data.iter_mut() {
                *v *= scale;
            }
        }
    }

    pub(crate) fn forward(&self, values: &[f64]) -> Vec<Complex64> {
        let mut data: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.fft2(&mut data, false);
        data
    }

    pub(crate) fn inverse_real(&self, mut spectrum: Vec<Complex64>) -> Vec<f64> {
        self.fft2(&mut spectrum, true);
        spectrum.into_iter().map(|c| c.re).collect()
    }

    /// Apply a real Fourier multiplier to a real field.
    pub(crate) fn apply_symbol(&self, values: &[f64], symbol: impl Fn(usize) -> f64) -> Vec<f64> {
        let mut spec = self.forward(values);
        for (i, c) in spec.iter_mut().enumerate() {
            *c *= symbol(i);
        }
        self.inverse_real(spec)
    }

    fn check_len(&self, len: usize) -> Result<(), GeometryError> {
        if len != self.len() {
            return Err(GeometryError::LengthMismatch {
                expected: self.len(),
                got: len,
            });
        }
        Ok(())
    }
}

/// Real function sampled on a [`TorusGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: TorusGrid,
    values: Vec<f64>,
}

/// A real (1,1)-form stored as a density against `dx dy`.
#[derive(Debug, Clone, PartialEq)]
pub struct Density11 {
    grid: TorusGrid,
    values: Vec<f64>,
}

macro_rules! sampled_common {
    ($ty:ident) => {
        impl $ty {
            pub fn from_values(grid: &TorusGrid, values: Vec<f64>) -> Result<Self, GeometryError> {
                grid.check_len(values.len())?;
                Ok($ty {
                    grid: grid.clone(),
                    values,
                })
            }

            pub fn zeros(grid: &TorusGrid) -> Self {
                Self::constant(grid, 0.0)
            }

            pub fn constant(grid: &TorusGrid, c: f64) -> Self {
                $ty {
                    grid: grid.clone(),
                    values: vec![c; grid.len()],
                }
            }

            /// Sample `f` at each node's complex coordinate.
            pub fn from_fn(grid: &TorusGrid, f: impl Fn(Complex64) -> f64) -> Self {
                $ty {
                    grid: grid.clone(),
                    values: grid.points().map(f).collect(),
                }
            }

            /// Sample `f` at each node's lattice coordinates `(s, u)`.
            pub fn from_lattice_fn(grid: &TorusGrid, f: impl Fn(f64, f64) -> f64) -> Self {
                $ty {
                    grid: grid.clone(),
                    values: (0..grid.len())
                        .map(|i| {
                            let (s, u) = grid.lattice_coords(i);
                            f(s, u)
                        })
                        .collect(),
                }
            }

            pub fn grid(&self) -> &TorusGrid {
                &self.grid
            }

            pub fn values(&self) -> &[f64] {
                &self.values
            }

            pub fn into_values(self) -> Vec<f64> {
                self.values
            }

            pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
                $ty {
                    grid: self.grid.clone(),
                    values: self.values.iter().map(|&v| f(v)).collect(),
                }
            }

            /// Pointwise combination with a field on the same grid.
            pub fn zip_map(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
                assert_eq!(self.grid, other.grid, "fields on different grids");
                $ty {
                    grid: self.grid.clone(),
                    values: self
                        .values
                        .iter()
                        .zip(&other.values)
                        .map(|(&a, &b)| f(a, b))
                        .collect(),
                }
            }

            pub fn sup_norm(&self) -> f64 {
                self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
            }

            pub fn max(&self) -> f64 {
                self.values
                    .iter()
                    .copied()
                    .fold(f64::NEG_INFINITY, f64::max)
            }

            pub fn min(&self) -> f64 {
                self.values.iter().copied().fold(f64::INFINITY, f64::min)
            }

            pub fn is_finite(&self) -> bool {
                self.values.iter().all(|v| v.is_finite())
            }
        }
    };
}

sampled_common!(ScalarField);
sampled_common!(Density11);

impl ScalarField {
    /// Mean value over the fundamental domain.
    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    /// Multiply pointwise by a density, producing a density.
    pub fn times(&self, rho: &Density11) -> Density11 {
        assert_eq!(self.grid, rho.grid, "fields on different grids");
        Density11 {
            grid: self.grid.clone(),
            values: self
                .values
                .iter()
                .zip(&rho.values)
                .map(|(a, b)| a * b)
                .collect(),
        }
    }

    /// Trigonometric interpolation onto another grid for the same lattice.
    /// Nyquist modes are dropped.
    pub fn resample(&self, target: &TorusGrid) -> Result<ScalarField, GeometryError> {
        if (self.grid.tau - target.tau).norm() > 0.0 {
            return Err(GeometryError::GridMismatch);
        }
        let (n, m) = (self.grid.n, target.n);
        let spec = self.grid.forward(&self.values);
        let mut out = vec![Complex64::new(0.0, 0.0); m * m];
        let keep = n.min(m) / 2;
        let scale = (m * m) as f64 / (n * n) as f64;
        for q in 0..n {
            for p in 0..n {
                let (sp, sq) = (self.grid.signed_mode(p), self.grid.signed_mode(q));
                if sp.abs() >= keep as f64 || sq.abs() >= keep as f64 {
                    continue;
                }
                let wrap = |s: f64| (s as i64).rem_euclid(m as i64) as usize;
                out[wrap(sq) * m + wrap(sp)] = spec[q * n + p] * scale;
            }
        }
        ScalarField::from_values(target, target.inverse_real(out))
    }

    /// Complex derivative `d psi / dz = (psi_x - i psi_y) / 2`, computed spectrally.
    pub fn dz(&self) -> Vec<Complex64> {
        let grid = &self.grid;
        let spec = grid.forward(&self.values);
        let mut dx = spec.clone();
        let mut dy = spec;
        for i in 0..grid.len() {
            if grid.is_nyquist(i) {
                dx[i] = Complex64::new(0.0, 0.0);
                dy[i] = Complex64::new(0.0, 0.0);
                continue;
            }
            let (kx, ky) = grid.wavevector(i);
            dx[i] *= Complex64::new(0.0, kx);
            dy[i] *= Complex64::new(0.0, ky);
        }
        let fx = grid.inverse_real(dx);
        let fy = grid.inverse_real(dy);
        fx.iter()
            .zip(&fy)
            .map(|(&a, &b)| Complex64::new(0.5 * a, -0.5 * b))
            .collect()
    }
}

impl Density11 {
    /// Uniform density of the flat Kahler form of degree one, `1 / Im tau`.
    pub fn omega_sigma(grid: &TorusGrid) -> Self {
        Self::constant(grid, 1.0 / grid.area())
    }

    pub fn scale(&self, c: f64) -> Self {
        self.map(|v| c * v)
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip_map(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip_map(other, |a, b| a - b)
    }
}

/// Density of `(1/2pi) i d dbar psi`, i.e. `Delta psi / (4 pi)` against `dx dy`.
pub fn curvature_increment(psi: &ScalarField) -> Density11 {
    let grid = &psi.grid;
    let values = grid.apply_symbol(&psi.values, |i| grid.curvature_symbol(i));
    Density11 {
        grid: grid.clone(),
        values,
    }
}

/// Trapezoid-rule integral over the fundamental domain.
pub fn integrate(rho: &Density11) -> f64 {
    // Neumaier summation keeps the degree identities at round-off level
    let mut sum = 0.0_f64;
    let mut carry = 0.0_f64;
    for &v in &rho.values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            carry += (sum - t) + v;
        } else {
            carry += (v - t) + sum;
        }
        sum = t;
    }
    (sum + carry) * rho.grid.cell_area
}

/// Solve `curvature_increment(psi) = rho - mean(rho)` with `psi` of mean zero.
///
/// Fails with [`GeometryError::NonZeroMean`] when `|integrate(rho)| >= MEAN_TOL`.
pub fn poisson_solve(rho: &Density11) -> Result<ScalarField, GeometryError> {
    poisson_solve_with_tol(rho, MEAN_TOL)
}

pub fn poisson_solve_with_tol(rho: &Density11, tol: f64) -> Result<ScalarField, GeometryError> {
    let integral = integrate(rho);
    if !(integral.abs() < tol) {
        return Err(GeometryError::NonZeroMean { integral, tol });
    }
    let grid = &rho.grid;
    let values = grid.apply_symbol(&rho.values, |i| {
        if i == 0 {
            0.0
        } else {
            1.0 / grid.curvature_symbol(i)
        }
    });
    Ok(ScalarField {
        grid: grid.clone(),
        values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(tau: Complex64, n: usize) -> TorusGrid {
        make_grid(tau, n).unwrap()
    }

    #[test]
    fn grid_construction() {
        let g = grid(Complex64::i(), 64);
        assert_eq!(g.cell_area(), 1.0 / 4096.0);
        let g = grid(Complex64::new(0.0, 2.0), 32);
        assert_eq!(g.cell_area(), 2.0 / 1024.0);
        assert_eq!(
            make_grid(Complex64::new(1.0, 0.0), 64).unwrap_err(),
            GeometryError::NonPositiveImaginaryPart(0.0)
        );
        assert_eq!(
            make_grid(Complex64::i(), 48).unwrap_err(),
            GeometryError::BadGridSize(48)
        );
        assert!(make_grid(Complex64::i(), 4).is_err());
    }

    #[test]
    fn constants_are_harmonic() {
        let g = grid(Complex64::i(), 16);
        let rho = curvature_increment(&ScalarField::constant(&g, 3.7));
        assert!(rho.sup_norm() < 1e-13);
    }

    #[test]
    fn cosine_matches_finite_difference_laplacian() {
        // Second-order central differences converge to the exact Laplacian; at
        // h = 1e-3 the stencil agrees with -4 pi^2 cos to ~1e-5 relative.
        let h = 1e-3;
        let f = |x: f64| (2.0 * PI * x).cos();
        let g = grid(Complex64::i(), 64);
        let psi = ScalarField::from_fn(&g, |z| f(z.re));
        let rho = curvature_increment(&psi);
        for (idx, &v) in rho.values().iter().enumerate() {
            let x = g.point(idx).re;
            let lap_fd = (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h);
            let oracle = lap_fd / 2.0 / (2.0 * PI);
            assert!((v - oracle).abs() < 1e-4, "{v} vs {oracle}");
            assert!((v + PI * f(x)).abs() < 1e-11);
        }
    }

    #[test]
    fn integrals() {
        let g = grid(Complex64::new(0.3, 1.2), 32);
        assert!((integrate(&Density11::omega_sigma(&g)) - 1.0).abs() < 1e-14);
        assert_eq!(integrate(&Density11::zeros(&g)), 0.0);
        let psi = ScalarField::from_lattice_fn(&g, |_, u| (2.0 * PI * u).sin());
        assert!(integrate(&curvature_increment(&psi)).abs() < 1e-12);
    }

    #[test]
    fn poisson_round_trip() {
        let g = grid(Complex64::i(), 64);
        let zero = poisson_solve(&Density11::zeros(&g)).unwrap();
        assert_eq!(zero.sup_norm(), 0.0);

        let rho = Density11::from_fn(&g, |z| -PI * (2.0 * PI * z.re).cos());
        let psi = poisson_solve(&rho).unwrap();
        let expected = ScalarField::from_fn(&g, |z| (2.0 * PI * z.re).cos());
        assert!(psi.zip_map(&expected, |a, b| a - b).sup_norm() < 1e-10);

        match poisson_solve(&Density11::omega_sigma(&g)) {
            Err(GeometryError::NonZeroMean { integral, .. }) => {
                assert!((integral - 1.0).abs() < 1e-12)
            }
            other => panic!("expected NonZeroMean, got {other:?}"),
        }
    }

    #[test]
    fn skewed_lattice_round_trip() {
        let g = grid(Complex64::new(0.4, 0.9), 32);
        let psi = ScalarField::from_lattice_fn(&g, |s, u| {
            (2.0 * PI * (s + u)).cos() + 0.3 * (2.0 * PI * (2.0 * s - u)).sin()
        });
        let back = poisson_solve(&curvature_increment(&psi)).unwrap();
        let centred = psi.map(|v| v - psi.mean());
        assert!(back.zip_map(&centred, |a, b| a - b).sup_norm() < 1e-11);
    }

    #[test]
    fn dz_of_linear_phase() {
        // psi = cos(2 pi x) on the square torus: d/dz = -pi sin(2 pi x)
        let g = grid(Complex64::i(), 32);
        let psi = ScalarField::from_fn(&g, |z| (2.0 * PI * z.re).cos());
        for (i, d) in psi.dz().iter().enumerate() {
            let x = g.point(i).re;
            assert!((d.re + PI * (2.0 * PI * x).sin()).abs() < 1e-12);
            assert!(d.im.abs() < 1e-12);
        }
    }

    #[test]
    fn resample_is_exact_for_band_limited_fields() {
        let tau = Complex64::new(0.25, 0.9);
        let coarse = grid(tau, 16);
        let fine = grid(tau, 64);
        let f =
            |s: f64, u: f64| (2.0 * PI * (s + 2.0 * u)).cos() + 0.3 * (2.0 * PI * 3.0 * s).sin();
        let up = ScalarField::from_lattice_fn(&coarse, f)
            .resample(&fine)
            .unwrap();
        let exact = ScalarField::from_lattice_fn(&fine, f);
        assert!(up.zip_map(&exact, |a, b| a - b).sup_norm() < 1e-13);
        let down = exact.resample(&coarse).unwrap();
        assert!(
            down.zip_map(&ScalarField::from_lattice_fn(&coarse, f), |a, b| a - b)
                .sup_norm()
                < 1e-13
        );
        assert_eq!(
            up.resample(&grid(Complex64::i(), 16)),
            Err(GeometryError::GridMismatch)
        );
    }

    #[test]
    fn nearest_index_reduces_mod_lattice() {
        let g = grid(Complex64::i(), 16);
        let idx = g.nearest_index(Complex64::new(0.5, 0.5));
        assert_eq!(idx, g.index(8, 8));
        assert_eq!(g.nearest_index(Complex64::new(1.5, -0.5)), idx);
    }
}
