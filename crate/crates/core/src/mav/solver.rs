use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::SolveError;
use crate::torus::{curvature_increment, integrate, Density11, ScalarField};

use super::config::VortexConfig;
use super::gmres::gmres;
use super::state::{MetricState, VortexProblem};

/// Upper rail for `|phi|^2` at accepted continuation points.
pub const PHI2_RAIL: f64 = 1.0 + 1e-6;
/// Rail for `|psi|` at accepted continuation points.
pub const PSI_RAIL: f64 = 50.0;
/// Allowed drift of `int F` from the degree.
pub const DEGREE_TOL: f64 = 1e-10;
/// Guard for diagnostics that divide by `1 - |phi|^2`.
pub const JUNCTURE_GUARD: f64 = 1e-12;

const DAMPING_FLOOR: f64 = 1.0 / 1024.0;
const T_STEP_MAX: f64 = 0.2;
const MAX_PATH_ATTEMPTS: usize = 20_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathPoint {
    pub t: f64,
    pub newton_iters: usize,
    pub residual_norm: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Monitors {
    pub max_phi2: f64,
    pub degree: f64,
    /// `int F / (1 - |phi|^2)`; `None` when `|phi|^2` comes within the guard of 1.
    pub juncture_value: Option<f64>,
    pub psi_min: f64,
    pub psi_max: f64,
}

#[derive(Debug, Clone)]
pub struct SolutionReport {
    pub converged: bool,
    pub t_history: Vec<PathPoint>,
    pub monitors: Monitors,
    pub psi_final: ScalarField,
    /// Last accepted value of the continuation parameter.
    pub t_final: f64,
    pub final_residual: f64,
}

/// Extra knobs for experiments; the default is the plain continuation.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ContinuationOptions {
    /// Amplitude `a` of a perturbation `psi -> psi + a cos(2 pi x)` applied to
    /// the warm start before each Newton solve.
    pub warm_start_perturbation: f64,
}

/// `R = F - (1 - |phi|^2) J`.
pub fn mav_residual(state: &MetricState) -> Density11 {
    let values = (0..state.grid().len())
        .map(|k| {
            state.curvature.values()[k]
                - (1.0 - state.phi2.values()[k]) * state.quotient.values()[k]
        })
        .collect();
    Density11::from_values(state.grid(), values).expect("grid-sized")
}

/// Variation of `G` along `psi -> psi + eps w` in Weitzenbock form:
/// `ci(-|phi|^2 w) + |phi|^2 ci(w) - F |phi|^2 w`.
pub fn gradient_variation(state: &MetricState, w: &ScalarField) -> Density11 {
    let pw = state.phi2.zip_map(w, |p, x| p * x);
    let ci_pw = curvature_increment(&pw);
    let ci_w = curvature_increment(w);
    let values = (0..w.grid().len())
        .map(|k| {
            let p = state.phi2.values()[k];
            -ci_pw.values()[k] + p * ci_w.values()[k] - state.curvature.values()[k] * pw.values()[k]
        })
        .collect();
    Density11::from_values(w.grid(), values).expect("grid-sized")
}

/// Directional derivative of [`mav_residual`] in `psi`.
pub fn mav_linearize_apply(state: &MetricState, w: &ScalarField) -> Density11 {
    let t = state.t;
    let ci_w = curvature_increment(w);
    let dg = gradient_variation(state, w);
    let values = (0..w.grid().len())
        .map(|k| {
            let p = state.phi2.values()[k];
            let j = state.quotient.values()[k];
            let (i1, i2) = (state.i_t.values()[k], state.ii_t.values()[k]);
            let wk = w.values()[k];
            ci_w.values()[k]
                - p * wk * j
                - (1.0 - p) * t * dg.values()[k] / (i1 * i2)
                - (1.0 - p) * j * t * p * wk * (1.0 / i1 - 1.0 / i2)
        })
        .collect();
    Density11::from_values(w.grid(), values).expect("grid-sized")
}

fn shifted(psi: &ScalarField, d: &[f64], lambda: f64) -> ScalarField {
    let values = psi
        .values()
        .iter()
        .zip(d)
        .map(|(p, x)| p + lambda * x)
        .collect();
    ScalarField::from_values(psi.grid(), values).expect("grid-sized")
}

fn residual_norm(state: &MetricState) -> f64 {
    let r = mav_residual(state);
    if r.is_finite() && state.is_finite() {
        r.sup_norm()
    } else {
        f64::INFINITY
    }
}

/// One damped Newton step at fixed `t`.
///
/// Returns the state unchanged when its residual is already below a tenth of
/// `tol_newton` or the Newton correction is negligible.
pub fn newton_step(
    problem: &VortexProblem,
    state: &MetricState,
) -> Result<MetricState, SolveError> {
    let cfg = problem.config();
    let grid = state.grid().clone();
    let r = mav_residual(state);
    if !r.is_finite() || !state.is_finite() {
        return Err(SolveError::LinearSolveFailure("non-finite residual".into()));
    }
    let rn = r.sup_norm();
    if rn < 0.1 * cfg.tol_newton {
        return Ok(state.clone());
    }

    let sigma = state
        .phi2
        .zip_map(
            &ScalarField::from_values(&grid, state.quotient.values().to_vec()).expect("grid-sized"),
            |p, j| p * j,
        )
        .mean()
        .max(1e-3);
    let apply = |x: &[f64]| {
        let w = ScalarField::from_values(&grid, x.to_vec()).expect("grid-sized");
        mav_linearize_apply(state, &w).into_values()
    };
    let precondition =
        |y: &[f64]| grid.apply_symbol(y, |i| 1.0 / (grid.curvature_symbol(i) - sigma));
    let rhs: Vec<f64> = r.values().iter().map(|v| -v).collect();
    let sol = gmres(apply, precondition, &rhs, 1e-12, 40, 10);
    if !sol.relative_residual.is_finite() || sol.x.iter().any(|v| !v.is_finite()) {
        return Err(SolveError::LinearSolveFailure(
            "Krylov iteration produced non-finite values".into(),
        ));
    }
    if sol.relative_residual > 1e-4 {
        return Err(SolveError::LinearSolveFailure(format!(
            "Krylov iteration stalled at relative residual {:e} after {} iterations",
            sol.relative_residual, sol.iterations
        )));
    }
    let step = sol.x.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
    if step < 0.1 * cfg.tol_newton {
        return Ok(state.clone());
    }

    let mut lambda = 1.0;
    while lambda >= DAMPING_FLOOR {
        let candidate = problem.state(state.t, shifted(&state.psi, &sol.x, lambda));
        if residual_norm(&candidate) < rn {
            return Ok(candidate);
        }
        lambda *= 0.5;
    }
    Err(SolveError::DampingFloor { residual: rn })
}

/// Newton iteration at fixed `t` until the residual sup-norm is below `tol`.
pub fn newton_solve(
    problem: &VortexProblem,
    t: f64,
    psi: ScalarField,
    tol: f64,
) -> Result<(MetricState, usize, f64), SolveError> {
    let mut state = problem.state(t, psi);
    let max = problem.config().max_newton;
    let mut rn = residual_norm(&state);
    for iters in 0..=max {
        if rn < tol {
            return Ok((state, iters, rn));
        }
        if iters == max {
            break;
        }
        state = newton_step(problem, &state)?;
        let next = residual_norm(&state);
        if !(next < rn) {
            break;
        }
        rn = next;
    }
    Err(SolveError::NewtonStalled {
        iterations: max,
        residual: rn,
    })
}

pub fn monitors(state: &MetricState) -> Monitors {
    let max_phi2 = state.phi2.max();
    let juncture_value = if max_phi2 < 1.0 - JUNCTURE_GUARD {
        Some(integrate(
            &state.curvature.zip_map(
                &Density11::from_values(state.grid(), state.phi2.values().to_vec())
                    .expect("grid-sized"),
                |f, p| f / (1.0 - p),
            ),
        ))
    } else {
        None
    };
    Monitors {
        max_phi2,
        degree: integrate(&state.curvature),
        juncture_value,
        psi_min: state.psi.min(),
        psi_max: state.psi.max(),
    }
}

fn rail_violation(m: &Monitors, state: &MetricState) -> Option<String> {
    if !state.is_finite() {
        return Some("non-finite fields".into());
    }
    if !(m.max_phi2 <= PHI2_RAIL) {
        return Some(format!(
            "max |phi|^2 = {} exceeds {}",
            m.max_phi2, PHI2_RAIL
        ));
    }
    if !(m.psi_min >= -PSI_RAIL && m.psi_max <= PSI_RAIL) {
        return Some(format!(
            "psi range [{}, {}] leaves [-{PSI_RAIL}, {PSI_RAIL}]",
            m.psi_min, m.psi_max
        ));
    }
    if !((m.degree - 1.0).abs() <= DEGREE_TOL) {
        return Some(format!("degree drifted to {}", m.degree));
    }
    None
}

/// Continuation from `t = 0, psi = 0` to `t = 1`.
pub fn continuity_solve(cfg: &VortexConfig) -> Result<SolutionReport, SolveError> {
    continuity_solve_with(cfg, &ContinuationOptions::default())
}

pub fn continuity_solve_with(
    cfg: &VortexConfig,
    opts: &ContinuationOptions,
) -> Result<SolutionReport, SolveError> {
    cfg.validate()?;
    if !cfg.is_stable() && !cfg.allow_unstable {
        return Err(SolveError::StabilityGate {
            r1: cfg.r1,
            r2: cfg.r2,
        });
    }
    let problem = VortexProblem::new(cfg)?;
    continue_path(&problem, opts)
}

pub(crate) fn continue_path(
    problem: &VortexProblem,
    opts: &ContinuationOptions,
) -> Result<SolutionReport, SolveError> {
    let cfg = problem.config();
    let grid = problem.grid().clone();
    let bump =
        ScalarField::from_lattice_fn(&grid, |s, _| opts.warm_start_perturbation * (TAU * s).cos());

    let mut state = problem.state(0.0, ScalarField::zeros(&grid));
    let start_res = residual_norm(&state);
    let mut history = vec![PathPoint {
        t: 0.0,
        newton_iters: 0,
        residual_norm: start_res,
    }];
    if !(start_res < cfg.tol_newton) {
        let (s, iters, res) = newton_solve(problem, 0.0, state.psi.clone(), cfg.tol_newton)?;
        state = s;
        history[0] = PathPoint {
            t: 0.0,
            newton_iters: iters,
            residual_norm: res,
        };
    }
    let mut final_residual = history[0].residual_norm;

    let partial =
        |state: &MetricState, history: &[PathPoint], res: f64, m: Monitors| SolutionReport {
            converged: false,
            t_history: history.to_vec(),
            monitors: m,
            psi_final: state.psi.clone(),
            t_final: state.t,
            final_residual: res,
        };

    let mut dt = cfg.t_step_init;
    let step_cap = cfg.t_step_init.max(T_STEP_MAX);
    let mut attempts = 0;
    while state.t < 1.0 {
        attempts += 1;
        if attempts > MAX_PATH_ATTEMPTS {
            return Err(SolveError::StepFloorReached {
                t: state.t,
                report: Box::new(partial(&state, &history, final_residual, monitors(&state))),
            });
        }
        let t_next = (state.t + dt).min(1.0);
        let tol = if t_next >= 1.0 {
            cfg.tol_path
        } else {
            cfg.tol_newton
        };
        let start = if opts.warm_start_perturbation != 0.0 {
            state.psi.zip_map(&bump, |a, b| a + b)
        } else {
            state.psi.clone()
        };
        match newton_solve(problem, t_next, start, tol) {
            Ok((next, iters, res)) => {
                let m = monitors(&next);
                if let Some(reason) = rail_violation(&m, &next) {
                    return Err(SolveError::MonitorViolation {
                        t: t_next,
                        reason,
                        report: Box::new(partial(&next, &history, res, m)),
                    });
                }
                history.push(PathPoint {
                    t: t_next,
                    newton_iters: iters,
                    residual_norm: res,
                });
                final_residual = res;
                state = next;
                dt = (dt * 1.5).min(step_cap);
            }
            Err(
                SolveError::LinearSolveFailure(_)
                | SolveError::DampingFloor { .. }
                | SolveError::NewtonStalled { .. },
            ) => {
                dt *= 0.5;
                if dt < cfg.t_step_min {
                    return Err(SolveError::StepFloorReached {
                        t: state.t,
                        report: Box::new(partial(
                            &state,
                            &history,
                            final_residual,
                            monitors(&state),
                        )),
                    });
                }
            }
            Err(e) => return Err(e),
        }
    }
    Ok(SolutionReport {
        converged: true,
        t_history: history,
        monitors: monitors(&state),
        psi_final: state.psi.clone(),
        t_final: state.t,
        final_residual,
    })
}
