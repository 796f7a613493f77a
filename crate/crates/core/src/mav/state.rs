use std::sync::Arc;

use crate::error::SolveError;
use crate::theta::{curvature_density, SectionSamples, ThetaSection};
use crate::torus::{Density11, ScalarField, TorusGrid};

use super::config::VortexConfig;

/// Everything about a run that does not depend on `t` or `psi`.
#[derive(Debug, Clone)]
pub struct VortexProblem {
    cfg: VortexConfig,
    grid: TorusGrid,
    samples: Arc<SectionSamples>,
    phi0: ScalarField,
    /// `ln u = -ln(alpha (1 - |phi|_0^2))`.
    log_u: ScalarField,
}

impl VortexProblem {
    pub fn new(cfg: &VortexConfig) -> Result<Self, SolveError> {
        cfg.validate()?;
        let grid = TorusGrid::new(cfg.tau(), cfg.n)?;
        let section = ThetaSection::new(cfg.tau(), cfg.theta_truncation)?;
        Self::with_section(cfg, &grid, &section)
    }

    /// Same problem on another grid; the section rescale is kept.
    pub fn on_grid(&self, grid: &TorusGrid) -> Result<Self, SolveError> {
        let mut cfg = self.cfg.clone();
        cfg.n = grid.n();
        Self::with_section(&cfg, grid, self.samples.section())
    }

    fn with_section(
        cfg: &VortexConfig,
        grid: &TorusGrid,
        section: &ThetaSection,
    ) -> Result<Self, SolveError> {
        let samples = SectionSamples::new(grid, section)?;
        let phi0 = samples.base_norm_sq();
        let alpha = cfg.alpha();
        let log_u = phi0.map(|p| -(alpha * (1.0 - p)).ln());
        Ok(VortexProblem {
            cfg: cfg.clone(),
            grid: grid.clone(),
            samples: Arc::new(samples),
            phi0,
            log_u,
        })
    }

    pub fn config(&self) -> &VortexConfig {
        &self.cfg
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    pub fn samples(&self) -> &SectionSamples {
        &self.samples
    }

    pub fn section(&self) -> &ThetaSection {
        self.samples.section()
    }

    pub fn base_norm_sq(&self) -> &ScalarField {
        &self.phi0
    }

    pub fn omega_density(&self) -> f64 {
        1.0 / self.grid.area()
    }

    pub fn state(&self, t: f64, psi: ScalarField) -> MetricState {
        MetricState::new(self, t, psi)
    }
}

/// Continuation parameter, potential, and the fields derived from them.
#[derive(Debug, Clone)]
pub struct MetricState {
    pub t: f64,
    pub psi: ScalarField,
    pub curvature: Density11,
    pub phi2: ScalarField,
    pub gradient: Density11,
    /// `I = 2 r2 + t |phi|^2`.
    pub i_t: ScalarField,
    /// `II = 2 + 2 r2 - t |phi|^2`.
    pub ii_t: ScalarField,
    /// `J = (mu u^{1-t} omega + t G) / (I II)`.
    pub(crate) quotient: Density11,
}

impl MetricState {
    pub fn new(problem: &VortexProblem, t: f64, psi: ScalarField) -> Self {
        let r2 = problem.cfg.r2 as f64;
        let mu = problem.cfg.mu();
        let omega = problem.omega_density();
        let curvature = curvature_density(&psi);
        let phi2 = problem.samples.norm_sq(&psi);
        let gradient = problem.samples.gradient_density(&psi);
        let i_t = phi2.map(|p| 2.0 * r2 + t * p);
        let ii_t = phi2.map(|p| 2.0 + 2.0 * r2 - t * p);
        let values = (0..psi.grid().len())
            .map(|k| {
                let source = mu * ((1.0 - t) * problem.log_u.values()[k]).exp() * omega
                    + t * gradient.values()[k];
                source / (i_t.values()[k] * ii_t.values()[k])
            })
            .collect();
        let quotient = Density11::from_values(psi.grid(), values).expect("grid-sized");
        MetricState {
            t,
            psi,
            curvature,
            phi2,
            gradient,
            i_t,
            ii_t,
            quotient,
        }
    }

    pub fn grid(&self) -> &TorusGrid {
        self.psi.grid()
    }

    pub fn is_finite(&self) -> bool {
        self.psi.is_finite()
            && self.phi2.is_finite()
            && self.gradient.is_finite()
            && self.quotient.is_finite()
    }
}
