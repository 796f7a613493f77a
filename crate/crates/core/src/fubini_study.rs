//! Fubini-Study curvature of `T CP^n` in an affine chart.
//!
//! With `s = 1 + |z|^2` and `g_kl = delta_kl / s - conj(z_k) z_l / s^2` the Kahler
//! form is `omega = sum g_kl i dz^k ^ dzbar^l` and the normalized curvature has
//! entries `(i Theta)_ij = delta_ij omega + sum_k g_jk i dz^i ^ dzbar^k` in the
//! coordinate frame `d/dz^1, ..., d/dz^n`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::AlgebraError;
use crate::exterior::{Form, FormMatrix, MAX_DIM};
use crate::positivity::{self, CMatrix, EndoForm11, PositivityVerdict};

/// The constant the curvature power is claimed to equal in the literature.
pub const LITERATURE_LAMBDA: f64 = 2.0;

/// Point of the affine chart `C^n` of `CP^n`.
#[derive(Debug, Clone, PartialEq)]
pub struct FSPoint {
    n: usize,
    z: Vec<Complex64>,
}

impl FSPoint {
    pub fn new(z: Vec<Complex64>) -> Result<Self, AlgebraError> {
        let n = z.len();
        if !(1..=MAX_DIM).contains(&n) {
            return Err(AlgebraError::DimensionOutOfRange(n));
        }
        if z.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(AlgebraError::InvalidArgument(
                "non-finite chart coordinate".into(),
            ));
        }
        Ok(FSPoint { n, z })
    }

    pub fn origin(n: usize) -> Result<Self, AlgebraError> {
        FSPoint::new(vec![Complex64::new(0.0, 0.0); n])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn z(&self) -> &[Complex64] {
        &self.z
    }

    /// Coefficients `g_kl` of the Kahler form.
    pub fn kahler_coefficients(&self) -> CMatrix {
        let s = 1.0 + self.z.iter().map(|c| c.norm_sqr()).sum::<f64>();
        DMatrix::from_fn(self.n, self.n, |k, l| {
            let delta = if k == l { 1.0 / s } else { 0.0 };
            Complex64::new(delta, 0.0) - self.z[k].conj() * self.z[l] / (s * s)
        })
    }

    pub fn kahler_form(&self) -> Form {
        Form::from_coefficients(&self.kahler_coefficients())
    }
}

/// `i Theta_FS / 2 pi` with the `2 pi` dropped, as a matrix of (1,1)-forms.
pub fn fs_curvature(p: &FSPoint) -> FormMatrix {
    let n = p.n;
    let g = p.kahler_coefficients();
    let omega = Form::from_coefficients(&g);
    let mut entries = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let mut f = if i == j { omega.clone() } else { Form::zero(n) };
            for k in 0..n {
                f.add_assign(&Form::e(n, i, k, g[(j, k)]));
            }
            entries.push(f);
        }
    }
    FormMatrix::new(n, entries).expect("square")
}

/// The `n = 2` curvature at the chart origin as blocks in a unitary frame.
pub fn fs_blocks_at_origin() -> EndoForm11 {
    let curv = fs_curvature(&FSPoint::origin(2).expect("n = 2 in range"));
    let block = |j: usize, k: usize| {
        let probe = Form::e(2, j, k, Complex64::new(1.0, 0.0));
        let mask = probe_mask(&probe);
        DMatrix::from_fn(2, 2, |a, b| {
            curv.get(a, b).coefficient(mask) / probe.coefficient(mask)
        })
    };
    EndoForm11::new(block(0, 0), block(0, 1), block(1, 1))
        .expect("Fubini-Study blocks are Hermitian")
}

fn probe_mask(f: &Form) -> u32 {
    (0..(1u32 << (2 * f.dim())))
        .find(|&m| f.coefficient(m).norm() > 0.0)
        .expect("non-zero probe")
}

/// Best fit of `(i Theta)^n = lambda omega^n Id`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PowerFit {
    pub lambda: f64,
    /// Sup-norm of the remainder, in units of the `omega^n` coefficient.
    pub off_identity_residual: f64,
}

pub fn fs_power_check(p: &FSPoint) -> PowerFit {
    let n = p.n;
    let top = fs_curvature(p).power(n).volume_coefficients();
    let mut omega_n = p.kahler_form();
    for _ in 1..n {
        omega_n = omega_n.wedge(&p.kahler_form());
    }
    let w = omega_n.volume_coefficient();
    let scaled = top.map(|c| c / w);
    let lambda = scaled.trace().re / n as f64;
    let rest = scaled - DMatrix::<Complex64>::identity(n, n) * Complex64::new(lambda, 0.0);
    PowerFit {
        lambda,
        off_identity_residual: rest.iter().fold(0.0_f64, |acc, c| acc.max(c.norm())),
    }
}

/// Measured constant set against the literature value and `(n+1)/n`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LambdaComparison {
    pub n: usize,
    pub lambda_measured: f64,
    pub lambda_spread: f64,
    pub max_off_identity_residual: f64,
    pub literature_value: f64,
    pub derived_value: f64,
    pub matches_literature: bool,
    pub matches_derived: bool,
    pub discrepancy: bool,
}

/// Runs [`fs_power_check`] at the origin and at the supplied points.
pub fn fs_lambda_report(n: usize, points: &[FSPoint]) -> Result<LambdaComparison, AlgebraError> {
    let origin = FSPoint::origin(n)?;
    let mut fits = vec![fs_power_check(&origin)];
    for p in points {
        if p.n != n {
            return Err(AlgebraError::InvalidArgument(format!(
                "point of dimension {} in a dimension {n} report",
                p.n
            )));
        }
        fits.push(fs_power_check(p));
    }
    let lambda = fits[0].lambda;
    let spread = fits
        .iter()
        .fold(0.0_f64, |acc, f| acc.max((f.lambda - lambda).abs()));
    let residual = fits
        .iter()
        .fold(0.0_f64, |acc, f| acc.max(f.off_identity_residual));
    let derived = (n as f64 + 1.0) / n as f64;
    let matches_literature = (lambda - LITERATURE_LAMBDA).abs() < 1e-10;
    Ok(LambdaComparison {
        n,
        lambda_measured: lambda,
        lambda_spread: spread,
        max_off_identity_residual: residual,
        literature_value: LITERATURE_LAMBDA,
        derived_value: derived,
        matches_literature,
        matches_derived: (lambda - derived).abs() < 1e-10,
        discrepancy: !matches_literature,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FsPositivity {
    pub ma: PositivityVerdict,
    pub nakano: PositivityVerdict,
    pub griffiths: PositivityVerdict,
}

/// Positivity verdicts for the `CP^2` curvature at the origin.
pub fn fs_ma_nakano_check(samples: usize) -> FsPositivity {
    let f = fs_blocks_at_origin();
    FsPositivity {
        ma: positivity::ma_check(&f),
        nakano: positivity::nakano_check(&f),
        griffiths: positivity::griffiths_check(&f, samples),
    }
}
