use crate::error::SolveError;
use crate::torus::{
    curvature_increment, integrate, poisson_solve_with_tol, Density11, ScalarField,
};

use super::state::{MetricState, VortexProblem};

/// Allowed mismatch between `int RHS` and `r1`.
pub const SOLVABILITY_TOL: f64 = 1e-6;

/// Potential `v` of `f2 = exp(-v)` together with its diagnostics.
#[derive(Debug, Clone)]
pub struct F2Recovery {
    pub v: ScalarField,
    /// `RHS = (mu omega + G) / (2 II)` at `t = 1`.
    pub rhs: Density11,
    pub rhs_integral: f64,
    /// Sup-norm of `ci(v) + r1 omega - RHS`.
    pub round_trip: f64,
}

/// Solves `F_{f2} + r1 omega = (mu omega + G) / (2 (2 r2 + 2 - |phi|^2))` for mean-zero `v`.
pub fn recover_f2(problem: &VortexProblem, psi1: &ScalarField) -> Result<F2Recovery, SolveError> {
    let state = problem.state(1.0, psi1.clone());
    recover_f2_from_state(problem, &state)
}

pub(crate) fn recover_f2_from_state(
    problem: &VortexProblem,
    state: &MetricState,
) -> Result<F2Recovery, SolveError> {
    let cfg = problem.config();
    let omega = problem.omega_density();
    let mu = cfg.mu();
    let r1 = cfg.r1 as f64;
    let values = (0..state.grid().len())
        .map(|k| (mu * omega + state.gradient.values()[k]) / (2.0 * state.ii_t.values()[k]))
        .collect();
    let rhs = Density11::from_values(state.grid(), values).expect("grid-sized");
    let rhs_integral = integrate(&rhs);
    if !((rhs_integral - r1).abs() <= SOLVABILITY_TOL) {
        return Err(SolveError::SolvabilityFailure {
            integral: rhs_integral,
            expected: r1,
        });
    }
    let target = rhs.map(|x| x - r1 * omega);
    let v = poisson_solve_with_tol(&target, SOLVABILITY_TOL)?;
    let round_trip = curvature_increment(&v)
        .zip_map(&rhs, |c, x| c + r1 * omega - x)
        .sup_norm();
    Ok(F2Recovery {
        v,
        rhs,
        rhs_integral,
        round_trip,
    })
}
