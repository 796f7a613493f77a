#![allow(dead_code)]

use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vbma::exterior::{Form, FormMatrix};
use vbma::positivity::{ma_quadratic_form, CMatrix, EndoForm11};
use vbma::{ScalarField, TorusGrid};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn cz(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Smooth doubly periodic field built from a handful of low modes.
pub fn smooth_field(grid: &TorusGrid, rng: &mut ChaCha8Rng, amplitude: f64) -> ScalarField {
    let terms: Vec<(f64, f64, f64, f64)> = (0..4)
        .map(|_| {
            (
                rng.gen_range(-3..=3) as f64,
                rng.gen_range(-3..=3) as f64,
                rng.gen_range(-amplitude..amplitude),
                rng.gen_range(0.0..TAU),
            )
        })
        .collect();
    ScalarField::from_lattice_fn(grid, |s, u| {
        terms
            .iter()
            .map(|&(p, q, a, ph)| a * (TAU * (p * s + q * u) + ph).cos())
            .sum()
    })
}

pub fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| {
        cz(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    })
}

pub fn random_hermitian(rng: &mut ChaCha8Rng, r: usize) -> CMatrix {
    let m = random_matrix(rng, r, r);
    (&m + m.adjoint()) * cz(0.5, 0.0)
}

pub fn random_unitary(rng: &mut ChaCha8Rng, r: usize) -> CMatrix {
    random_matrix(rng, r, r).qr().q()
}

/// Splits a Hermitian `2r x 2r` matrix `[[A, B^dag], [B, C]]` into a form.
pub fn form_from_nakano(t: &CMatrix) -> EndoForm11 {
    let r = t.nrows() / 2;
    EndoForm11::new(
        t.view((0, 0), (r, r)).into_owned(),
        t.view((r, 0), (r, r)).into_owned(),
        t.view((r, r), (r, r)).into_owned(),
    )
    .unwrap()
}

/// Nakano-positive rank-`r` form with smallest `T` eigenvalue at least `floor`.
pub fn random_nakano_positive(rng: &mut ChaCha8Rng, r: usize, floor: f64) -> EndoForm11 {
    let g = random_matrix(rng, 2 * r, 2 * r);
    let t = &g * g.adjoint() + CMatrix::identity(2 * r, 2 * r) * cz(floor, 0.0);
    form_from_nakano(&t)
}

/// Random rank-`r` form with Hermitian diagonal blocks.
pub fn random_form(rng: &mut ChaCha8Rng, r: usize, shift: f64) -> EndoForm11 {
    let id = CMatrix::identity(r, r) * cz(shift, 0.0);
    EndoForm11::new(
        random_hermitian(rng, r) + &id,
        random_matrix(rng, r, r),
        random_hermitian(rng, r) + &id,
    )
    .unwrap()
}

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0_f64, |a, z| a.max(z.norm()))
}

/// `(sum_jk F_jk e_jk)^2` expanded term by term in the exterior algebra of `C^2`.
pub fn wedge_square_oracle(f: &EndoForm11) -> CMatrix {
    let r = f.rank();
    let entry = |p: usize, q: usize| {
        let mut form = Form::e(2, 0, 0, f.a()[(p, q)]);
        form.add_assign(&Form::e(2, 1, 1, f.c()[(p, q)]));
        form.add_assign(&Form::e(2, 0, 1, f.b()[(p, q)]));
        form.add_assign(&Form::e(2, 1, 0, f.b()[(q, p)].conj()));
        form
    };
    let entries = (0..r)
        .flat_map(|p| (0..r).map(move |q| (p, q)))
        .map(|(p, q)| entry(p, q))
        .collect();
    let m = FormMatrix::new(r, entries).unwrap();
    let vol = Form::e(2, 0, 0, cz(1.0, 0.0))
        .wedge(&Form::e(2, 1, 1, cz(1.0, 0.0)))
        .volume_coefficient();
    m.power(2).volume_coefficients().map(|c| c / vol)
}

/// `i tr(a^dag ^ F ^ a) + i tr(a^dag ^ a ^ F)` as a multiple of the volume
/// element, with `a^dag = alpha dz^1 + beta dz^2` and `F` the form itself.
pub fn ma_integrand_oracle(f: &EndoForm11, alpha: &CMatrix, beta: &CMatrix) -> Complex64 {
    let r = f.rank();
    let mut adag = Vec::new();
    let mut a = Vec::new();
    for p in 0..r {
        for q in 0..r {
            let mut x = Form::dz(2, 0, alpha[(p, q)]);
            x.add_assign(&Form::dz(2, 1, beta[(p, q)]));
            adag.push(x);
            let mut y = Form::dzbar(2, 0, alpha[(q, p)].conj());
            y.add_assign(&Form::dzbar(2, 1, beta[(q, p)].conj()));
            a.push(y);
        }
    }
    let adag = FormMatrix::new(r, adag).unwrap();
    let a = FormMatrix::new(r, a).unwrap();
    let theta = f.to_form_matrix();
    let first = adag.wedge(&theta).wedge(&a).volume_coefficients().trace();
    let second = adag.wedge(&a).wedge(&theta).volume_coefficients().trace();
    Complex64::i() * (first + second)
}

pub fn ma_value(f: &EndoForm11, alpha: &CMatrix, beta: &CMatrix) -> Complex64 {
    let r = f.rank();
    let mut x = nalgebra::DVector::zeros(2 * r * r);
    for i in 0..r {
        for j in 0..r {
            x[i * r + j] = beta[(i, j)];
            x[r * r + i * r + j] = alpha[(i, j)];
        }
    }
    (x.adjoint() * ma_quadratic_form(f) * &x)[(0, 0)]
}
