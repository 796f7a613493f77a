//! The rank-2 vortex bundle on `Sigma x CP^1` built from a solved vortex metric.
//!
//! Densities are taken against `dA_Sigma dA_FS`, with `omega_FS` normalised to
//! total area one, so its density in the chart `w` is `1 / (pi (1 + |w|^2)^2)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Serialize, Serializer};

use crate::error::SolveError;
use crate::mav::{
    continuity_solve, mav_residual, recover_f2_from_state, F2Recovery, SolutionReport,
    VortexConfig, VortexProblem,
};
use crate::torus::{curvature_increment, Density11, ScalarField};

/// Threshold below which the pointwise Chern gap counts as non-positive.
pub const CHERN_GAP_TOL: f64 = 1e-8;
/// Threshold for the reduced-system residuals.
pub const REDUCED_TOL: f64 = 1e-6;

/// Density of `omega_FS` at the chart point `w`.
pub fn fs_density(w: Complex64) -> f64 {
    let s = 1.0 + w.norm_sqr();
    1.0 / (PI * s * s)
}

/// Chart points used for `CP^1` checks: the origin and `extra` seeded points.
pub fn cp1_sample_points(extra: usize, seed: u64) -> Vec<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pts = vec![Complex64::new(0.0, 0.0)];
    pts.extend(
        (0..extra).map(|_| Complex64::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0))),
    );
    pts
}

/// A solved vortex metric `h = h0 exp(-psi)` together with `f2 = exp(-v)`.
#[derive(Debug, Clone)]
pub struct VortexSolution {
    problem: VortexProblem,
    pub psi: ScalarField,
    pub v: ScalarField,
    pub curvature: Density11,
    pub gradient: Density11,
    pub phi2: ScalarField,
    pub f2: F2Recovery,
    /// `F_{f2} + r1 omega`.
    pub quotient: Density11,
    /// Sup-norm of the vortex residual at `t = 1`.
    pub mav_residual: f64,
}

impl VortexSolution {
    pub fn from_psi(problem: VortexProblem, psi: ScalarField) -> Result<Self, SolveError> {
        let state = problem.state(1.0, psi);
        let f2 = recover_f2_from_state(&problem, &state)?;
        let quotient = quotient_curvature(&problem, &f2.v);
        Ok(VortexSolution {
            quotient,
            mav_residual: mav_residual(&state).sup_norm(),
            v: f2.v.clone(),
            psi: state.psi,
            curvature: state.curvature,
            gradient: state.gradient,
            phi2: state.phi2,
            f2,
            problem,
        })
    }

    /// Copy with a different `f2` potential (for perturbation experiments).
    pub fn with_potential(&self, v: ScalarField) -> Self {
        VortexSolution {
            quotient: quotient_curvature(&self.problem, &v),
            v,
            ..self.clone()
        }
    }

    pub fn config(&self) -> &VortexConfig {
        self.problem.config()
    }

    pub fn problem(&self) -> &VortexProblem {
        &self.problem
    }
}

fn quotient_curvature(problem: &VortexProblem, v: &ScalarField) -> Density11 {
    let r1 = problem.config().r1 as f64;
    let omega = problem.omega_density();
    curvature_increment(v).map(|c| c + r1 * omega)
}

/// Runs the continuation and recovers `f2`.
pub fn solve_vortex(cfg: &VortexConfig) -> Result<(SolutionReport, VortexSolution), SolveError> {
    let report = continuity_solve(cfg)?;
    let sol = VortexSolution::from_psi(VortexProblem::new(cfg)?, report.psi_final.clone())?;
    Ok((report, sol))
}

/// Residuals of
/// `2 (F + F_{f2} + r1 omega)(2 r2 + |phi|^2) - G - mu omega` and
/// `2 (F_{f2} + r1 omega)(2 r2 + 2 - |phi|^2) - G - mu omega`.
pub fn reduced_system_residuals(sol: &VortexSolution) -> (Density11, Density11) {
    let cfg = sol.config();
    let r2 = cfg.r2 as f64;
    let mu_omega = cfg.mu() * sol.problem.omega_density();
    let q = &sol.quotient;
    let n = sol.psi.grid().len();
    let grid = sol.psi.grid();
    let (mut first, mut second) = (Vec::with_capacity(n), Vec::with_capacity(n));
    for k in 0..n {
        let (f, g, p, qk) = (
            sol.curvature.values()[k],
            sol.gradient.values()[k],
            sol.phi2.values()[k],
            q.values()[k],
        );
        first.push(2.0 * (f + qk) * (2.0 * r2 + p) - g - mu_omega);
        second.push(2.0 * qk * (2.0 * r2 + 2.0 - p) - g - mu_omega);
    }
    (
        Density11::from_values(grid, first).expect("grid-sized"),
        Density11::from_values(grid, second).expect("grid-sized"),
    )
}

/// Griffiths conditions at one point of `Sigma x CP^1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GriffithsMargins {
    /// `F + F_{f2} + r1 omega`.
    pub sub: f64,
    /// `F_{f2} + r1 omega`.
    pub quotient: f64,
    /// `2 r2 + 2 - |phi|^2`.
    pub fs_gap: f64,
    /// Coefficient of `|v1 v2|^2`:
    /// `(F (2 r2 + 2 - |phi|^2) + (4 r2 + 2)(F_{f2} + r1 omega) - G) omega_FS`.
    pub mixed: f64,
}

impl GriffithsMargins {
    pub fn min(&self) -> f64 {
        self.sub.min(self.quotient).min(self.fs_gap).min(self.mixed)
    }
}

pub fn griffiths_margins(sol: &VortexSolution, idx: usize, w: Complex64) -> GriffithsMargins {
    let r2 = sol.config().r2 as f64;
    let quotient = sol.quotient.values()[idx];
    griffiths_margins_from(
        r2,
        sol.curvature.values()[idx],
        quotient,
        sol.phi2.values()[idx],
        sol.gradient.values()[idx],
        w,
    )
}

fn griffiths_margins_from(
    r2: f64,
    f: f64,
    quotient: f64,
    phi2: f64,
    g: f64,
    w: Complex64,
) -> GriffithsMargins {
    let fs_gap = 2.0 * r2 + 2.0 - phi2;
    GriffithsMargins {
        sub: f + quotient,
        quotient,
        fs_gap,
        mixed: (f * fs_gap + (4.0 * r2 + 2.0) * quotient - g) * fs_density(w),
    }
}

/// Diagonal curvature block `sigma omega_Sigma + fs omega_FS` (densities).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProductBlock {
    pub sigma: f64,
    pub fs: f64,
}

/// `c1^2 - 4 c2` density `(a11 - a22)^2 + 4 a12 ^ a21` for a rank-2 block
/// curvature, with `cross` the coefficient of `a12 ^ a21` against
/// `omega_Sigma ^ omega_FS`.
pub fn block_chern_gap(a11: ProductBlock, a22: ProductBlock, cross: f64) -> f64 {
    2.0 * (a11.sigma - a22.sigma) * (a11.fs - a22.fs) + 4.0 * cross
}

/// Pointwise Chern gap of the vortex bundle at grid node `idx` and chart point `w`.
pub fn vortex_chern_gap(sol: &VortexSolution, idx: usize, w: Complex64) -> f64 {
    let r2 = sol.config().r2 as f64;
    let q = sol.quotient.values()[idx];
    let (f, p, g) = (
        sol.curvature.values()[idx],
        sol.phi2.values()[idx],
        sol.gradient.values()[idx],
    );
    let a11 = ProductBlock {
        sigma: f + q,
        fs: 2.0 * r2 + p,
    };
    let a22 = ProductBlock {
        sigma: q,
        fs: 2.0 * r2 + 2.0 - p,
    };
    block_chern_gap(a11, a22, -g) * fs_density(w)
}

fn ratio_string<S: Serializer>(r: &Ratio<i64>, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&r.to_string())
}

/// MA slopes of the vortex subbundle and of the whole bundle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SlopeRecord {
    #[serde(serialize_with = "ratio_string")]
    pub mu_ma_sub: Ratio<i64>,
    #[serde(serialize_with = "ratio_string")]
    pub mu_ma_total: Ratio<i64>,
    pub ma_stable: bool,
    pub mumford_gap: i64,
}

/// Divisor classes `a [L] + b [O(1)]` on `Sigma x CP^1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Class(i64, i64);

impl Class {
    fn dot(self, o: Class) -> i64 {
        self.0 * o.1 + self.1 * o.0
    }

    fn add(self, o: Class) -> Class {
        Class(self.0 + o.0, self.1 + o.1)
    }
}

fn vortex_classes(r1: u32, r2: u32) -> (Class, Class) {
    let (r1, r2) = (r1 as i64, r2 as i64);
    (Class(r1 + 1, 2 * r2), Class(r1, 2 * r2 + 2))
}

/// `deg S - deg V / 2` with respect to `c1(V)`, i.e. `-2 r1 + 2 r2`.
pub fn mumford_gap(r1: u32, r2: u32) -> i64 {
    let (s, q) = vortex_classes(r1, r2);
    let v = s.add(q);
    let twice = 2 * s.dot(v) - v.dot(v);
    debug_assert_eq!(twice % 2, 0);
    twice / 2
}

/// Slopes `ch2 / rank` in units of `c1(L) . [O(2)]`.
pub fn ma_slopes(r1: u32, r2: u32) -> SlopeRecord {
    let (s, q) = vortex_classes(r1, r2);
    // ch2 of a line bundle is c1^2 / 2; one unit L.O(2) is 2 in the pairing
    let ch2 = |c: Class| Ratio::new(c.dot(c), 4);
    let sub = ch2(s);
    let total = (ch2(s) + ch2(q)) / 2;
    SlopeRecord {
        mu_ma_sub: sub,
        mu_ma_total: total,
        ma_stable: sub < total,
        mumford_gap: mumford_gap(r1, r2),
    }
}

/// Summary written by `verify`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub reduced_res: [f64; 2],
    pub griffiths_min_margin: f64,
    pub chern_gap_max: f64,
    pub slopes: SlopeRecord,
    pub mav_residual: f64,
    pub f2_rhs_integral: f64,
    pub f2_round_trip: f64,
    pub max_phi2: f64,
    pub passed: bool,
}

pub fn verify_solution(sol: &VortexSolution, cp1_points: &[Complex64]) -> VerificationReport {
    let cfg = sol.config();
    let (a, b) = reduced_system_residuals(sol);
    let n = sol.psi.grid().len();
    let mut margin = f64::INFINITY;
    let mut gap = f64::NEG_INFINITY;
    for &w in cp1_points {
        for idx in 0..n {
            margin = margin.min(griffiths_margins(sol, idx, w).min());
            gap = gap.max(vortex_chern_gap(sol, idx, w));
        }
    }
    let reduced_res = [a.sup_norm(), b.sup_norm()];
    let passed = reduced_res.iter().all(|r| *r < REDUCED_TOL)
        && margin > 0.0
        && gap <= CHERN_GAP_TOL
        && sol.mav_residual < cfg.tol_path
        && sol.f2.round_trip < 1e-8
        && sol.phi2.max() <= 1.0 + 1e-8;
    VerificationReport {
        reduced_res,
        griffiths_min_margin: margin,
        chern_gap_max: gap,
        slopes: ma_slopes(cfg.r1, cfg.r2),
        mav_residual: sol.mav_residual,
        f2_rhs_integral: sol.f2.rhs_integral,
        f2_round_trip: sol.f2.round_trip,
        max_phi2: sol.phi2.max(),
        passed,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_examples() {
        let s = ma_slopes(3, 2);
        assert_eq!(s.mu_ma_sub, Ratio::from_integer(8));
        assert_eq!(s.mu_ma_total, Ratio::new(17, 2));
        assert!(s.ma_stable);
        assert_eq!(s.mumford_gap, -2);
        let s = ma_slopes(2, 2);
        assert_eq!(s.mu_ma_sub, s.mu_ma_total);
        assert!(!s.ma_stable);
        let s = ma_slopes(2, 3);
        assert_eq!(
            (s.mu_ma_sub, s.mu_ma_total),
            (Ratio::from_integer(9), Ratio::new(17, 2))
        );
        assert!(!s.ma_stable);
        assert_eq!(mumford_gap(5, 2), -6);
        assert_eq!(mumford_gap(2, 2), 0);
    }

    #[test]
    fn slope_json() {
        let json = serde_json::to_string(&ma_slopes(3, 2)).unwrap();
        assert_eq!(
            json,
            r#"{"mu_ma_sub":"8","mu_ma_total":"17/2","ma_stable":true,"mumford_gap":-2}"#
        );
    }

    #[test]
    fn block_gap_examples() {
        let b = ProductBlock {
            sigma: 1.3,
            fs: 0.7,
        };
        assert_eq!(block_chern_gap(b, b, 0.0), 0.0);
        let split = block_chern_gap(
            ProductBlock {
                sigma: 2.0,
                fs: 2.0,
            },
            ProductBlock {
                sigma: 0.0,
                fs: 0.0,
            },
            0.0,
        );
        assert!(split > 0.0);
    }

    #[test]
    fn fs_density_has_unit_mass() {
        // radial quadrature of 2 pi r / (pi (1 + r^2)^2) on [0, inf) via r = tan(s)
        let m = 20_000;
        let h = std::f64::consts::FRAC_PI_2 / m as f64;
        let total: f64 = (0..m)
            .map(|k| {
                let s = (k as f64 + 0.5) * h;
                let r = s.tan();
                2.0 * PI * r * fs_density(Complex64::new(r, 0.0)) / s.cos().powi(2) * h
            })
            .sum();
        assert!((total - 1.0).abs() < 1e-8);
    }

    #[test]
    fn margins_at_a_point() {
        let m = griffiths_margins_from(2.0, 0.0, 1.0, 0.0, 0.5, Complex64::new(0.0, 0.0));
        assert_eq!(m.fs_gap, 6.0);
        assert!((m.mixed - 9.5 / PI).abs() < 1e-15);
        assert_eq!(m.min(), 1.0);
    }
}
