//! Pointwise algebra of endomorphism-valued (1,1)-forms on a complex surface.
//!
//! A form is written in a unitary frame as
//! `i Theta = A e11 + C e22 + B e12 + B^dagger e21` with `e_jk = i dz^j ^ dzbar^k`.
//! Top-degree quantities are coefficients of `vol = e11 ^ e22`. Powers of
//! `1/2pi` are left out: they rescale margins by positive constants only.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::AlgebraError;
use crate::exterior::{Form, FormMatrix};

pub type CMatrix = DMatrix<Complex64>;

/// Griffiths margins smaller than this are reported as inconclusive.
pub const GRIFFITHS_INCONCLUSIVE: f64 = 1e-8;

const HERMITIAN_TOL: f64 = 1e-10;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
}

fn is_hermitian(m: &CMatrix) -> bool {
    let scale = max_abs(m).max(1.0);
    max_abs(&(m - m.adjoint())) <= HERMITIAN_TOL * scale
}

/// Smallest eigenvalue and eigenvector of a Hermitian matrix; eigenvalues at
/// round-off level relative to the matrix are snapped to exactly zero.
fn min_eigen(m: &CMatrix) -> (f64, DVector<Complex64>) {
    let sym = (m + m.adjoint()) * c(0.5);
    let scale = max_abs(&sym).max(1.0);
    let eig = SymmetricEigen::new(sym);
    let (idx, &lambda) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("non-empty matrix");
    let lambda = if lambda.abs() <= 1e-12 * scale {
        0.0
    } else {
        lambda
    };
    (lambda, eig.eigenvectors.column(idx).into_owned())
}

/// Endomorphism-valued (1,1)-form at a point of a complex surface.
#[derive(Debug, Clone, PartialEq)]
pub struct EndoForm11 {
    r: usize,
    a: CMatrix,
    b: CMatrix,
    c: CMatrix,
}

impl EndoForm11 {
    /// Blocks must be `r x r`; `A` and `C` must be Hermitian.
    pub fn new(a: CMatrix, b: CMatrix, c: CMatrix) -> Result<Self, AlgebraError> {
        let r = a.nrows();
        if r == 0 {
            return Err(AlgebraError::Shape(0));
        }
        for m in [&a, &b, &c] {
            if m.nrows() != r || m.ncols() != r {
                return Err(AlgebraError::Shape(r));
            }
        }
        if !is_hermitian(&a) || !is_hermitian(&c) {
            return Err(AlgebraError::InvalidArgument(
                "diagonal blocks A and C must be Hermitian".into(),
            ));
        }
        Ok(EndoForm11 { r, a, b, c })
    }

    /// `Omega Id`-type form: `A = C = s Id`, `B = 0`.
    pub fn scalar(r: usize, s: f64) -> Self {
        let id = CMatrix::identity(r, r) * c(s);
        EndoForm11 {
            r,
            a: id.clone(),
            b: CMatrix::zeros(r, r),
            c: id,
        }
    }

    /// `diag(d) * omega` with `omega = e11 + e22`.
    pub fn diagonal_kahler(d: &[f64]) -> Self {
        let m = CMatrix::from_diagonal(&DVector::from_iterator(d.len(), d.iter().map(|&x| c(x))));
        EndoForm11 {
            r: d.len(),
            a: m.clone(),
            b: CMatrix::zeros(d.len(), d.len()),
            c: m,
        }
    }

    pub fn rank(&self) -> usize {
        self.r
    }

    pub fn a(&self) -> &CMatrix {
        &self.a
    }

    pub fn b(&self) -> &CMatrix {
        &self.b
    }

    pub fn c(&self) -> &CMatrix {
        &self.c
    }

    /// Simultaneous conjugation `g X g^{-1}` of all blocks.
    pub fn conjugate(&self, g: &CMatrix) -> Result<Self, AlgebraError> {
        let inv = g
            .clone()
            .try_inverse()
            .ok_or_else(|| AlgebraError::InvalidArgument("singular gauge transformation".into()))?;
        Ok(EndoForm11 {
            r: self.r,
            a: g * &self.a * &inv,
            b: g * &self.b * &inv,
            c: g * &self.c * &inv,
        })
    }

    /// The same form as a matrix of exterior-algebra elements.
    pub fn to_form_matrix(&self) -> FormMatrix {
        let r = self.r;
        let mut entries = Vec::with_capacity(r * r);
        for p in 0..r {
            for q in 0..r {
                let mut f = Form::e(2, 0, 0, self.a[(p, q)]);
                f.add_assign(&Form::e(2, 1, 1, self.c[(p, q)]));
                f.add_assign(&Form::e(2, 0, 1, self.b[(p, q)]));
                f.add_assign(&Form::e(2, 1, 0, self.b.adjoint()[(p, q)]));
                entries.push(f);
            }
        }
        FormMatrix::new(r, entries).expect("square")
    }

    /// Nakano matrix `T = [[A, B^dagger], [B, C]]`.
    pub fn nakano_matrix(&self) -> CMatrix {
        let r = self.r;
        let mut t = CMatrix::zeros(2 * r, 2 * r);
        t.view_mut((0, 0), (r, r)).copy_from(&self.a);
        t.view_mut((0, r), (r, r)).copy_from(&self.b.adjoint());
        t.view_mut((r, 0), (r, r)).copy_from(&self.b);
        t.view_mut((r, r), (r, r)).copy_from(&self.c);
        t
    }

    /// `T' = [[A, B], [B^dagger, C]]`.
    fn dual_nakano_matrix(&self) -> CMatrix {
        let r = self.r;
        let mut t = CMatrix::zeros(2 * r, 2 * r);
        t.view_mut((0, 0), (r, r)).copy_from(&self.a);
        t.view_mut((0, r), (r, r)).copy_from(&self.b);
        t.view_mut((r, 0), (r, r)).copy_from(&self.b.adjoint());
        t.view_mut((r, r), (r, r)).copy_from(&self.c);
        t
    }

    /// `Theta(xi, xibar) = |xi1|^2 A + xi1 conj(xi2) B + xi2 conj(xi1) B^dagger + |xi2|^2 C`.
    pub fn evaluate(&self, xi: [Complex64; 2]) -> CMatrix {
        &self.a * c(xi[0].norm_sqr())
            + &self.b * (xi[0] * xi[1].conj())
            + self.b.adjoint() * (xi[1] * xi[0].conj())
            + &self.c * c(xi[1].norm_sqr())
    }
}

/// Endomorphism-valued top form: `M vol`.
#[derive(Debug, Clone, PartialEq)]
pub struct TopFormEndo {
    pub m: CMatrix,
}

impl TopFormEndo {
    pub fn rank(&self) -> usize {
        self.m.nrows()
    }
}

/// Outcome of a pointwise positivity test. `positive` holds exactly when `margin > 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PositivityVerdict {
    pub positive: bool,
    pub margin: f64,
    pub witness: Option<Vec<Complex64>>,
    /// Set by sampled checks whose margin is too close to zero to trust.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub inconclusive: bool,
}

impl PositivityVerdict {
    fn from_margin(margin: f64, witness: Option<Vec<Complex64>>) -> Self {
        PositivityVerdict {
            positive: margin > 0.0,
            margin,
            witness,
            inconclusive: false,
        }
    }
}

/// `(i Theta)^2 = (AC + CA - B B^dagger - B^dagger B) vol`.
pub fn wedge_square(f: &EndoForm11) -> TopFormEndo {
    let bh = f.b.adjoint();
    let m = &f.a * &f.c + &f.c * &f.a - &f.b * &bh - &bh * &f.b;
    TopFormEndo { m }
}

/// Nakano positivity: smallest eigenvalue of `T`.
pub fn nakano_check(f: &EndoForm11) -> PositivityVerdict {
    let (lambda, v) = min_eigen(&f.nakano_matrix());
    PositivityVerdict::from_margin(lambda, Some(v.iter().copied().collect()))
}

/// Hermitian matrix of the MA quadratic form in the `2 r^2` entries of `a`.
///
/// Unknowns are ordered as the entries of `beta` (row-major) followed by those of
/// `alpha`, where `a^dagger = alpha dz^1 + beta dz^2`. The form is
/// `sum_l c_l^dagger T c_l + sum_l y_l^dagger conj(T') y_l` with column vectors
/// `c_l = [beta_l; -alpha_l]` and row vectors `y_l = [beta^l, -alpha^l]^T`.
pub fn ma_quadratic_form(f: &EndoForm11) -> CMatrix {
    let r = f.r;
    let nvar = 2 * r * r;
    let beta = |i: usize, j: usize| i * r + j;
    let alpha = |i: usize, j: usize| r * r + i * r + j;
    let t = f.nakano_matrix();
    let t_dual = f.dual_nakano_matrix().map(|z| z.conj());
    let mut q = CMatrix::zeros(nvar, nvar);
    let mut accumulate = |sel: &CMatrix, kernel: &CMatrix| {
        q += sel.adjoint() * kernel * sel;
    };
    for l in 0..r {
        let mut cols = CMatrix::zeros(2 * r, nvar);
        let mut rows = CMatrix::zeros(2 * r, nvar);
        for p in 0..r {
            cols[(p, beta(p, l))] = c(1.0);
            cols[(r + p, alpha(p, l))] = c(-1.0);
            rows[(p, beta(l, p))] = c(1.0);
            rows[(r + p, alpha(l, p))] = c(-1.0);
        }
        accumulate(&cols, &t);
        accumulate(&rows, &t_dual);
    }
    q
}

/// MA-positivity on a surface by exact eigencheck of [`ma_quadratic_form`].
pub fn ma_check(f: &EndoForm11) -> PositivityVerdict {
    let (lambda, v) = min_eigen(&ma_quadratic_form(f));
    PositivityVerdict::from_margin(lambda, Some(v.iter().copied().collect()))
}

/// Smallest eigenvalue of `[[v^dag A v, v^dag B v], [v^dag B^dag v, v^dag C v]]`
/// together with its eigenvector, i.e. the minimum over directions for fixed `v`.
fn griffiths_at(f: &EndoForm11, v: &DVector<Complex64>) -> (f64, [Complex64; 2]) {
    let a = (v.adjoint() * &f.a * v)[(0, 0)].re;
    let cc = (v.adjoint() * &f.c * v)[(0, 0)].re;
    let b = (v.adjoint() * &f.b * v)[(0, 0)];
    let mean = 0.5 * (a + cc);
    let rad = (0.25 * (a - cc) * (a - cc) + b.norm_sqr()).sqrt();
    let lambda = mean - rad;
    // eigenvector eta of [[a, b], [conj b, c]] for lambda; the direction is xi = conj(eta)
    let eta = if b.norm() > 1e-300 {
        let e = [b, c(lambda - a)];
        let n = (e[0].norm_sqr() + e[1].norm_sqr()).sqrt();
        [e[0] / n, e[1] / n]
    } else if a <= cc {
        [c(1.0), c(0.0)]
    } else {
        [c(0.0), c(1.0)]
    };
    (lambda, [eta[0].conj(), eta[1].conj()])
}

fn random_unit(rng: &mut ChaCha8Rng, r: usize) -> DVector<Complex64> {
    let v = DVector::from_fn(r, |_, _| {
        Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
    });
    let n = v.norm();
    v / c(n)
}

/// Sampled Griffiths positivity with an alternating-minimisation polish.
///
/// The margin is `min_{v, xi} v^dag Theta(xi, xibar) v` over unit `v` and unit
/// `xi`. The witness is `v` followed by `xi`. Not a certificate.
pub fn griffiths_check(f: &EndoForm11, samples: usize) -> PositivityVerdict {
    griffiths_check_seeded(f, samples, 0x6772_6966)
}

pub fn griffiths_check_seeded(f: &EndoForm11, samples: usize, seed: u64) -> PositivityVerdict {
    let samples = samples.max(64);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut candidates: Vec<(f64, DVector<Complex64>)> = (0..samples)
        .map(|_| {
            let v = random_unit(&mut rng, f.r);
            (griffiths_at(f, &v).0, v)
        })
        .collect();
    for k in 0..f.r {
        let mut e = DVector::zeros(f.r);
        e[k] = c(1.0);
        candidates.push((griffiths_at(f, &e).0, e));
    }
    candidates.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut best = (f64::INFINITY, DVector::zeros(f.r), [c(1.0), c(0.0)]);
    for (_, v0) in candidates.into_iter().take(4) {
        let mut v = v0;
        let (mut value, mut xi) = griffiths_at(f, &v);
        for _ in 0..200 {
            let (lambda, w) = min_eigen(&f.evaluate(xi));
            v = w;
            let (next, next_xi) = griffiths_at(f, &v);
            xi = next_xi;
            let done = value - next.min(lambda) < 1e-15 * value.abs().max(1.0);
            value = value.min(next.min(lambda));
            if done {
                break;
            }
        }
        if value < best.0 {
            best = (value, v, xi);
        }
    }
    let (margin, v, xi) = best;
    let mut witness: Vec<Complex64> = v.iter().copied().collect();
    witness.extend_from_slice(&xi);
    let mut verdict = PositivityVerdict::from_margin(margin, Some(witness));
    verdict.inconclusive = margin.abs() < GRIFFITHS_INCONCLUSIVE;
    verdict
}

/// Pointwise `c_1^2 - 4 c_2 = 2 tr(F ^ F) - (tr F)^2` as a coefficient of `vol`.
pub fn chern_gap(f: &EndoForm11) -> Result<f64, AlgebraError> {
    if f.r != 2 {
        return Err(AlgebraError::RankNotTwo(f.r));
    }
    let m = wedge_square(f).m;
    let tr_a = f.a.trace().re;
    let tr_c = f.c.trace().re;
    let tr_b = f.b.trace();
    let trace_square = 2.0 * (tr_a * tr_c - tr_b.norm_sqr());
    Ok(2.0 * m.trace().re - trace_square)
}

/// Max-entry norm of `F ^ F - eta Id`.
pub fn vbma_residual(f: &EndoForm11, eta: f64) -> f64 {
    let m = wedge_square(f).m;
    let target = CMatrix::identity(f.r, f.r) * c(eta);
    max_abs(&(m - target))
}

/// Moment map `W sum_p w_p tr(H_p (M_p - eta_p Id))` by quadrature over samples.
pub fn moment_map_value(
    h: &[CMatrix],
    forms: &[EndoForm11],
    eta: &[f64],
    weights: &[f64],
    w: u32,
) -> Result<f64, AlgebraError> {
    let n = forms.len();
    if h.len() != n || eta.len() != n || weights.len() != n {
        return Err(AlgebraError::GridMismatch);
    }
    if w == 0 {
        return Err(AlgebraError::InvalidArgument("W must be at least 1".into()));
    }
    let mut total = 0.0;
    for p in 0..n {
        let f = &forms[p];
        if h[p].nrows() != f.r || h[p].ncols() != f.r {
            return Err(AlgebraError::Shape(f.r));
        }
        let m = wedge_square(f).m - CMatrix::identity(f.r, f.r) * c(eta[p]);
        total += weights[p] * (&h[p] * m).trace().re;
    }
    Ok(w as f64 * total)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m2(entries: [[f64; 2]; 2]) -> CMatrix {
        CMatrix::from_fn(2, 2, |i, j| c(entries[i][j]))
    }

    fn fs_blocks() -> EndoForm11 {
        EndoForm11::new(
            m2([[2.0, 0.0], [0.0, 1.0]]),
            m2([[0.0, 1.0], [0.0, 0.0]]),
            m2([[1.0, 0.0], [0.0, 2.0]]),
        )
        .unwrap()
    }

    #[test]
    fn rejects_non_hermitian_blocks() {
        let err = EndoForm11::new(
            m2([[1.0, 1.0], [0.0, 1.0]]),
            CMatrix::zeros(2, 2),
            CMatrix::identity(2, 2),
        );
        assert!(err.is_err());
        assert_eq!(
            EndoForm11::new(
                CMatrix::identity(2, 2),
                CMatrix::zeros(3, 3),
                CMatrix::identity(2, 2)
            ),
            Err(AlgebraError::Shape(2))
        );
    }

    #[test]
    fn wedge_square_examples() {
        let id = EndoForm11::scalar(2, 1.0);
        assert_eq!(wedge_square(&id).m, CMatrix::identity(2, 2) * c(2.0));
        assert_eq!(wedge_square(&fs_blocks()).m, m2([[3.0, 0.0], [0.0, 3.0]]));
        let flat = EndoForm11::new(
            CMatrix::identity(2, 2),
            CMatrix::identity(2, 2),
            CMatrix::identity(2, 2),
        )
        .unwrap();
        assert_eq!(wedge_square(&flat).m, CMatrix::zeros(2, 2));
    }

    #[test]
    fn nakano_examples() {
        let v = nakano_check(&EndoForm11::scalar(2, 2.0));
        assert!(v.positive);
        assert!((v.margin - 2.0).abs() < 1e-12);
        let v = nakano_check(&fs_blocks());
        assert!(!v.positive);
        assert_eq!(v.margin, 0.0);
        let twisted = EndoForm11::new(
            CMatrix::identity(2, 2),
            m2([[0.0, 2.0], [0.0, 0.0]]),
            CMatrix::identity(2, 2),
        )
        .unwrap();
        assert!(!nakano_check(&twisted).positive);
    }

    #[test]
    fn ma_examples() {
        assert!(ma_check(&EndoForm11::scalar(2, 2.0)).positive);
        let fs = ma_check(&fs_blocks());
        assert!(fs.positive && fs.margin > 0.0);
        let zero = ma_check(&EndoForm11::scalar(2, 0.0));
        assert!(!zero.positive);
        assert_eq!(zero.margin, 0.0);
    }

    #[test]
    fn ma_form_matches_direct_trace_expansion() {
        // tr(a C a^dag) + tr(a a^dag C) + tr(b A b^dag) + tr(b b^dag A)
        //   - tr(a B^dag b^dag) - tr(a b^dag B^dag) - tr(b B a^dag) - tr(b a^dag B)
        let f = EndoForm11::new(
            m2([[2.0, 0.3], [0.3, 1.5]]),
            CMatrix::from_fn(2, 2, |i, j| {
                Complex64::new(0.1 * (i + 2 * j) as f64, 0.2 - 0.1 * i as f64)
            }),
            m2([[1.2, -0.4], [-0.4, 2.5]]),
        )
        .unwrap();
        let q = ma_quadratic_form(&f);
        let alpha = CMatrix::from_fn(2, 2, |i, j| {
            Complex64::new(0.3 * i as f64 - 0.2, 0.5 * j as f64 + 0.1)
        });
        let beta = CMatrix::from_fn(2, 2, |i, j| {
            Complex64::new(0.7 - 0.4 * j as f64, 0.2 * (i + j) as f64)
        });
        let mut x = DVector::zeros(8);
        for i in 0..2 {
            for j in 0..2 {
                x[i * 2 + j] = beta[(i, j)];
                x[4 + i * 2 + j] = alpha[(i, j)];
            }
        }
        let quad = (x.adjoint() * &q * &x)[(0, 0)];
        let (a, b, cc) = (f.a(), f.b(), f.c());
        let tr = |m: CMatrix| m.trace();
        let direct = tr(&alpha * cc * alpha.adjoint())
            + tr(&alpha * alpha.adjoint() * cc)
            + tr(&beta * a * beta.adjoint())
            + tr(&beta * beta.adjoint() * a)
            - tr(&alpha * b.adjoint() * beta.adjoint())
            - tr(&alpha * beta.adjoint() * b.adjoint())
            - tr(&beta * b * alpha.adjoint())
            - tr(&beta * alpha.adjoint() * b);
        assert!((quad - direct).norm() < 1e-12, "{quad} vs {direct}");
    }

    #[test]
    fn griffiths_examples() {
        let v = griffiths_check(&EndoForm11::scalar(2, 1.0), 64);
        assert!(v.positive);
        assert!((v.margin - 1.0).abs() < 1e-10);
        assert!(griffiths_check(&fs_blocks(), 256).positive);
        let indefinite = EndoForm11::new(
            m2([[1.0, 0.0], [0.0, -1.0]]),
            CMatrix::zeros(2, 2),
            CMatrix::identity(2, 2),
        )
        .unwrap();
        let v = griffiths_check(&indefinite, 64);
        assert!(!v.positive);
        assert!(v.margin <= -1.0 + 1e-9);
    }

    #[test]
    fn griffiths_fs_margin_matches_brute_force() {
        // dense grid over unit v in C^2 (up to phase) and xi in CP^1
        let f = fs_blocks();
        let mut brute = f64::INFINITY;
        let steps = 60;
        for i in 0..=steps {
            let th = std::f64::consts::FRAC_PI_2 * i as f64 / steps as f64;
            for k in 0..steps {
                let ph = std::f64::consts::TAU * k as f64 / steps as f64;
                let v = DVector::from_vec(vec![c(th.cos()), Complex64::from_polar(th.sin(), ph)]);
                brute = brute.min(griffiths_at(&f, &v).0);
            }
        }
        let sampled = griffiths_check(&f, 256).margin;
        assert!(sampled <= brute + 1e-12);
        assert!(brute - sampled < 1e-3);
    }

    #[test]
    fn chern_gap_examples() {
        assert_eq!(chern_gap(&EndoForm11::scalar(2, 1.0)).unwrap(), 0.0);
        // diag(a, b) omega: (a - b)^2 omega^2 = 2 (a - b)^2 vol
        assert_eq!(
            chern_gap(&EndoForm11::diagonal_kahler(&[2.0, 0.0])).unwrap(),
            8.0
        );
        assert_eq!(chern_gap(&fs_blocks()).unwrap(), -6.0);
        assert_eq!(
            chern_gap(&EndoForm11::scalar(3, 1.0)),
            Err(AlgebraError::RankNotTwo(3))
        );
    }

    #[test]
    fn vbma_residual_examples() {
        assert_eq!(vbma_residual(&EndoForm11::scalar(2, 1.0), 2.0), 0.0);
        assert_eq!(vbma_residual(&fs_blocks(), 3.0), 0.0);
        assert_eq!(vbma_residual(&fs_blocks(), 2.0), 1.0);
    }

    #[test]
    fn moment_map_vanishes_on_solutions() {
        let forms = vec![fs_blocks(); 5];
        let eta = vec![3.0; 5];
        let weights = vec![0.2; 5];
        let h: Vec<CMatrix> = (0..5).map(|k| m2([[k as f64, 0.5], [0.5, -1.0]])).collect();
        assert!(
            moment_map_value(&h, &forms, &eta, &weights, 3)
                .unwrap()
                .abs()
                < 1e-14
        );
        assert_eq!(
            moment_map_value(&h[..4], &forms, &eta, &weights, 1),
            Err(AlgebraError::GridMismatch)
        );
    }
}
