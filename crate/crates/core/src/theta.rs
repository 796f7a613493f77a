//! The degree-one theta line bundle on the torus and its distinguished section.
//!
//! The section is the classical series `theta(z) = sum_k exp(i pi k^2 tau + 2 pi i k z)`
//! and the reference metric is `h0 = A exp(-2 pi y^2 / Im tau)`, so that
//! `|phi|^2_h0 = A |theta|^2 exp(-2 pi y^2 / Im tau)` is doubly periodic and the
//! curvature of `h0` is the uniform density `1 / Im tau` after the `2 pi` division.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::GeometryError;
use crate::torus::{curvature_increment, Density11, ScalarField, TorusGrid};

/// Target value of `max |phi|^2_h0` after rescaling.
pub const PHI_SQ_MAX: f64 = 0.49;

/// Truncated theta series together with the metric rescale `A`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThetaSection {
    tau: Complex64,
    truncation: usize,
    scale: f64,
}

impl ThetaSection {
    /// Build the section and fix `A` so that `max |phi|^2_h0 = PHI_SQ_MAX`.
    pub fn new(tau: Complex64, truncation: usize) -> Result<Self, GeometryError> {
        if !(tau.im > 0.0) {
            return Err(GeometryError::NonPositiveImaginaryPart(tau.im));
        }
        if truncation < 8 {
            return Err(GeometryError::TruncationTooSmall(truncation));
        }
        let mut section = ThetaSection {
            tau,
            truncation,
            scale: 1.0,
        };
        section.scale = PHI_SQ_MAX / section.raw_norm_sq_max();
        Ok(section)
    }

    pub fn tau(&self) -> Complex64 {
        self.tau
    }

    pub fn truncation(&self) -> usize {
        self.truncation
    }

    /// Metric rescale `A`.
    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// `theta(z)` and `theta'(z)` from the truncated series.
    pub fn eval_with_derivative(&self, z: Complex64) -> (Complex64, Complex64) {
        let n = self.truncation as i64;
        let mut value = Complex64::new(0.0, 0.0);
        let mut deriv = Complex64::new(0.0, 0.0);
        for k in -n..=n {
            let kf = k as f64;
            let exponent =
                Complex64::i() * PI * kf * kf * self.tau + Complex64::i() * 2.0 * PI * kf * z;
            let term = exponent.exp();
            value += term;
            deriv += Complex64::new(0.0, 2.0 * PI * kf) * term;
        }
        (value, deriv)
    }

    /// Gaussian factor `exp(-2 pi y^2 / Im tau)` of the unscaled reference metric.
    fn gaussian(&self, z: Complex64) -> f64 {
        (-2.0 * PI * z.im * z.im / self.tau.im).exp()
    }

    /// `|theta|^2 exp(-2 pi y^2 / Im tau)` without the rescale.
    fn raw_norm_sq(&self, z: Complex64) -> f64 {
        self.eval_with_derivative(z).0.norm_sqr() * self.gaussian(z)
    }

    fn raw_norm_sq_max(&self) -> f64 {
        const COARSE: usize = 256;
        let at = |s: f64, u: f64| self.raw_norm_sq(Complex64::new(s, 0.0) + self.tau * u);
        let mut best = (0.0, 0.0, f64::NEG_INFINITY);
        for k in 0..COARSE {
            for j in 0..COARSE {
                let (s, u) = (j as f64 / COARSE as f64, k as f64 / COARSE as f64);
                let v = at(s, u);
                if v > best.2 {
                    best = (s, u, v);
                }
            }
        }
        // local refinement around the coarse maximiser
        let mut half = 1.0 / COARSE as f64;
        for _ in 0..6 {
            let (s0, u0, _) = best;
            for a in -5..=5 {
                for b in -5..=5 {
                    let s = s0 + half * a as f64 / 5.0;
                    let u = u0 + half * b as f64 / 5.0;
                    let v = at(s, u);
                    if v > best.2 {
                        best = (s, u, v);
                    }
                }
            }
            half /= 4.0;
        }
        best.2
    }

    /// The quasi-periodicity multiplier `e(z)` with `theta(z + tau) = e(z) theta(z)`.
    pub fn multiplier(&self, z: Complex64) -> Complex64 {
        (-Complex64::i() * PI * self.tau - Complex64::i() * 2.0 * PI * z).exp()
    }

    /// The unique zero `(1 + tau) / 2` in the fundamental domain.
    pub fn zero(&self) -> Complex64 {
        (Complex64::new(1.0, 0.0) + self.tau) * 0.5
    }
}

/// Truncated theta series at `z`.
pub fn theta_eval(z: Complex64, section: &ThetaSection) -> Complex64 {
    section.eval_with_derivative(z).0
}

/// Section data pre-sampled on a grid; the solver evaluates norms against it repeatedly.
#[derive(Debug, Clone)]
pub struct SectionSamples {
    grid: TorusGrid,
    section: ThetaSection,
    theta: Vec<Complex64>,
    dtheta: Vec<Complex64>,
    /// `A exp(-2 pi y^2 / Im tau)` at each node.
    weight: Vec<f64>,
    /// `d/dz log h0 = 2 pi i y / Im tau` at each node.
    dlog_h0: Vec<Complex64>,
}

impl SectionSamples {
    pub fn new(grid: &TorusGrid, section: &ThetaSection) -> Result<Self, GeometryError> {
        if (grid.tau() - section.tau()).norm() > 0.0 {
            return Err(GeometryError::GridMismatch);
        }
        let mut theta = Vec::with_capacity(grid.len());
        let mut dtheta = Vec::with_capacity(grid.len());
        let mut weight = Vec::with_capacity(grid.len());
        let mut dlog_h0 = Vec::with_capacity(grid.len());
        for z in grid.points() {
            let (t, d) = section.eval_with_derivative(z);
            theta.push(t);
            dtheta.push(d);
            weight.push(section.scale() * section.gaussian(z));
            dlog_h0.push(Complex64::new(0.0, 2.0 * PI * z.im / grid.tau().im));
        }
        Ok(SectionSamples {
            grid: grid.clone(),
            section: *section,
            theta,
            dtheta,
            weight,
            dlog_h0,
        })
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    pub fn section(&self) -> &ThetaSection {
        &self.section
    }

    /// `|phi|^2_{h0}` on the grid.
    pub fn base_norm_sq(&self) -> ScalarField {
        let values = self
            .theta
            .iter()
            .zip(&self.weight)
            .map(|(t, w)| w * t.norm_sqr())
            .collect();
        ScalarField::from_values(&self.grid, values).expect("grid-sized")
    }

    /// `|phi|^2_h` for `h = h0 exp(-psi)`.
    pub fn norm_sq(&self, psi: &ScalarField) -> ScalarField {
        assert_eq!(
            psi.grid(),
            &self.grid,
            "field and section on different grids"
        );
        let values = self
            .theta
            .iter()
            .zip(&self.weight)
            .zip(psi.values())
            .map(|((t, w), p)| w * t.norm_sqr() * (-p).exp())
            .collect();
        ScalarField::from_values(&self.grid, values).expect("grid-sized")
    }

    /// Covariant derivative `nabla_z phi = theta' + theta (d log h0/dz - d psi/dz)`.
    pub fn covariant_derivative(&self, psi: &ScalarField) -> Vec<Complex64> {
        let dpsi = psi.dz();
        (0..self.grid.len())
            .map(|i| self.dtheta[i] + self.theta[i] * (self.dlog_h0[i] - dpsi[i]))
            .collect()
    }

    /// Density of `(1/2pi) i nabla^{1,0} phi ^ nabla^{0,1} phi^dagger`, i.e.
    /// `|nabla_z phi|^2_h / pi` against `dx dy`.
    pub fn gradient_density(&self, psi: &ScalarField) -> Density11 {
        let nabla = self.covariant_derivative(psi);
        let values = nabla
            .iter()
            .zip(&self.weight)
            .zip(psi.values())
            .map(|((d, w), p)| w * (-p).exp() * d.norm_sqr() / PI)
            .collect();
        Density11::from_values(&self.grid, values).expect("grid-sized")
    }
}

/// `|phi|^2_h` on `psi`'s grid for the metric `h = h0 exp(-psi)`.
pub fn phi_norm_sq(
    psi: &ScalarField,
    section: &ThetaSection,
) -> Result<ScalarField, GeometryError> {
    Ok(SectionSamples::new(psi.grid(), section)?.norm_sq(psi))
}

/// Normalised gradient density `G` of the section for `h = h0 exp(-psi)`.
pub fn connection_gradient_density(
    psi: &ScalarField,
    section: &ThetaSection,
) -> Result<Density11, GeometryError> {
    Ok(SectionSamples::new(psi.grid(), section)?.gradient_density(psi))
}

/// Curvature density `F_h = omega_Sigma + curvature_increment(psi)`.
pub fn curvature_density(psi: &ScalarField) -> Density11 {
    Density11::omega_sigma(psi.grid()).add(&curvature_increment(psi))
}

/// Pointwise residual of the Weitzenbock identity
/// `ci(|phi|^2) = -F_h |phi|^2 + G`.
pub fn weitzenbock_residual(samples: &SectionSamples, psi: &ScalarField) -> Density11 {
    let phi2 = samples.norm_sq(psi);
    let lhs = curvature_increment(&phi2);
    let f = curvature_density(psi);
    let g = samples.gradient_density(psi);
    let rhs = g.sub(&phi2.times(&f));
    lhs.sub(&rhs)
}
