use num_complex::Complex64;
use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::SolveError;

/// Parameters of a Monge-Ampere vortex run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VortexConfig {
    pub r1: u32,
    pub r2: u32,
    pub tau_re: f64,
    pub tau_im: f64,
    pub n: usize,
    pub theta_truncation: usize,
    /// Residual sup-norm accepted at intermediate continuation points.
    pub tol_newton: f64,
    /// Residual sup-norm required at `t = 1`.
    pub tol_path: f64,
    pub t_step_init: f64,
    pub t_step_min: f64,
    pub max_newton: usize,
    pub allow_unstable: bool,
}

impl Default for VortexConfig {
    fn default() -> Self {
        VortexConfig {
            r1: 3,
            r2: 2,
            tau_re: 0.0,
            tau_im: 1.0,
            n: 64,
            theta_truncation: 12,
            tol_newton: 1e-10,
            tol_path: 1e-11,
            t_step_init: 0.1,
            t_step_min: 1e-4,
            max_newton: 12,
            allow_unstable: false,
        }
    }
}

/// `mu = 2 (r2 (r1 + 1) + r1 (r2 + 1))`.
pub fn mu_of(r1: u32, r2: u32) -> i64 {
    let (r1, r2) = (r1 as i64, r2 as i64);
    2 * (r2 * (r1 + 1) + r1 * (r2 + 1))
}

/// `alpha = mu / (2 r2 (2 r2 + 2))`, exactly.
pub fn alpha_of(r1: u32, r2: u32) -> Ratio<i64> {
    let r2i = r2 as i64;
    Ratio::new(mu_of(r1, r2), 2 * r2i * (2 * r2i + 2))
}

/// Value of `int F / (1 - |phi|^2)` at a solution.
pub fn juncture_target(r1: u32, r2: u32) -> f64 {
    let mu = mu_of(r1, r2) as f64;
    let r2 = r2 as f64;
    (mu + 1.0) / (1.0 + 2.0 * r2 * (2.0 * r2 + 2.0))
}

impl VortexConfig {
    pub fn with_ranks(r1: u32, r2: u32) -> Self {
        VortexConfig {
            r1,
            r2,
            ..Self::default()
        }
    }

    pub fn tau(&self) -> Complex64 {
        Complex64::new(self.tau_re, self.tau_im)
    }

    pub fn mu(&self) -> f64 {
        mu_of(self.r1, self.r2) as f64
    }

    pub fn alpha(&self) -> f64 {
        let a = alpha_of(self.r1, self.r2);
        *a.numer() as f64 / *a.denom() as f64
    }

    /// `alpha > 1`, equivalently `r1 > r2`.
    pub fn is_stable(&self) -> bool {
        alpha_of(self.r1, self.r2) > Ratio::from_integer(1)
    }

    pub fn juncture_target(&self) -> f64 {
        juncture_target(self.r1, self.r2)
    }

    pub fn validate(&self) -> Result<(), SolveError> {
        let fail = |msg: String| Err(SolveError::Config(msg));
        if self.r1 < 2 || self.r2 < 2 {
            return fail(format!(
                "r1 and r2 must be at least 2 (got {}, {})",
                self.r1, self.r2
            ));
        }
        if !(self.tau_im > 0.0) || !self.tau_re.is_finite() || !self.tau_im.is_finite() {
            return fail(format!(
                "tau must be finite with positive imaginary part (got {} + {}i)",
                self.tau_re, self.tau_im
            ));
        }
        if self.n < 8 || !self.n.is_power_of_two() {
            return fail(format!(
                "n must be a power of two and at least 8 (got {})",
                self.n
            ));
        }
        if self.theta_truncation < 8 {
            return fail(format!(
                "theta_truncation must be at least 8 (got {})",
                self.theta_truncation
            ));
        }
        if !(self.tol_newton > 0.0) || !(self.tol_path > 0.0) {
            return fail("tolerances must be positive".into());
        }
        let in_unit = |x: f64| x > 0.0 && x <= 1.0;
        if !in_unit(self.t_step_init)
            || !in_unit(self.t_step_min)
            || self.t_step_min > self.t_step_init
        {
            return fail(format!(
                "need 0 < t_step_min <= t_step_init <= 1 (got {}, {})",
                self.t_step_min, self.t_step_init
            ));
        }
        if self.max_newton == 0 {
            return fail("max_newton must be at least 1".into());
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derived_constants() {
        assert_eq!(mu_of(3, 2), 34);
        assert_eq!(mu_of(4, 2), 44);
        assert_eq!(mu_of(2, 2), 24);
        assert_eq!(alpha_of(2, 2), Ratio::from_integer(1));
        assert!((juncture_target(3, 2) - 1.4).abs() < 1e-15);
        assert!((juncture_target(4, 2) - 1.8).abs() < 1e-15);
    }

    #[test]
    fn json_keys() {
        let cfg: VortexConfig = serde_json::from_str(r#"{"r1": 4, "r2": 3, "n": 32}"#).unwrap();
        assert_eq!((cfg.r1, cfg.r2, cfg.n), (4, 3, 32));
        assert_eq!(cfg.tau_im, 1.0);
        assert!(serde_json::from_str::<VortexConfig>(r#"{"r3": 1}"#).is_err());
    }

    #[test]
    fn validation() {
        assert!(VortexConfig::default().validate().is_ok());
        for bad in [
            VortexConfig {
                r1: 1,
                ..Default::default()
            },
            VortexConfig {
                n: 48,
                ..Default::default()
            },
            VortexConfig {
                tau_im: 0.0,
                ..Default::default()
            },
            VortexConfig {
                t_step_min: 0.5,
                ..Default::default()
            },
            VortexConfig {
                theta_truncation: 4,
                ..Default::default()
            },
        ] {
            assert!(matches!(bad.validate(), Err(SolveError::Config(_))));
        }
    }
}
