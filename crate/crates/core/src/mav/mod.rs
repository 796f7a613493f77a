//! Continuity-method solver for the Monge-Ampere vortex equation
//! `F = (1 - |phi|^2) (mu u^{1-t} omega + t G) / (I II)` on the torus.

mod config;
mod f2;
mod gmres;
mod solver;
mod state;

pub use config::{alpha_of, juncture_target, mu_of, VortexConfig};
pub use f2::{recover_f2, F2Recovery, SOLVABILITY_TOL};
pub use solver::{
    continuity_solve, continuity_solve_with, gradient_variation, mav_linearize_apply, mav_residual,
    monitors, newton_solve, newton_step, ContinuationOptions, Monitors, PathPoint, SolutionReport,
    DEGREE_TOL, JUNCTURE_GUARD, PHI2_RAIL, PSI_RAIL,
};
pub use state::{MetricState, VortexProblem};

pub(crate) use f2::recover_f2_from_state;
