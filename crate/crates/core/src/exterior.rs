//! Exterior algebra over the complex coframe `dz^1..dz^n, dzbar^1..dzbar^n`.
//!
//! Monomials are bitmasks: bit `k` is `dz^{k+1}` and bit `n + k` is `dzbar^{k+1}`,
//! always kept in increasing bit order. Only `n <= 4` is supported, so a form
//! is a short sparse list of (mask, coefficient) pairs.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::AlgebraError;

pub const MAX_DIM: usize = 4;

/// A complex differential form on an `n`-dimensional complex coframe.
#[derive(Debug, Clone, PartialEq)]
pub struct Form {
    dim: usize,
    terms: BTreeMap<u32, Complex64>,
}

/// Sign of moving the generators of `b` past those of `a` into sorted order.
fn merge_sign(a: u32, b: u32) -> f64 {
    let mut swaps = 0u32;
    let mut rest = b;
    while rest != 0 {
        let bit = rest.trailing_zeros();
        // generators of `a` above this bit must be passed
        swaps += (a >> (bit + 1)).count_ones();
        rest &= rest - 1;
    }
    if swaps.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

impl Form {
    pub fn zero(dim: usize) -> Self {
        Form {
            dim,
            terms: BTreeMap::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `c * dz^j` (zero-based).
    pub fn dz(dim: usize, j: usize, c: Complex64) -> Self {
        let mut f = Form::zero(dim);
        f.terms.insert(1u32 << j, c);
        f
    }

    /// `c * dzbar^k` (zero-based).
    pub fn dzbar(dim: usize, k: usize, c: Complex64) -> Self {
        let mut f = Form::zero(dim);
        f.terms.insert(1u32 << (dim + k), c);
        f
    }

    /// `c * i dz^j ^ dzbar^k` (indices are zero-based).
    pub fn e(dim: usize, j: usize, k: usize, c: Complex64) -> Self {
        let mut f = Form::zero(dim);
        let mask = (1u32 << j) | (1u32 << (dim + k));
        f.terms.insert(mask, c * Complex64::i());
        f
    }

    /// Real (1,1)-form `sum_{jk} coef[j,k] i dz^j ^ dzbar^k`.
    pub fn from_coefficients(coef: &DMatrix<Complex64>) -> Self {
        let dim = coef.nrows();
        let mut f = Form::zero(dim);
        for j in 0..dim {
            for k in 0..dim {
                if coef[(j, k)] != Complex64::new(0.0, 0.0) {
                    f.add_assign(&Form::e(dim, j, k, coef[(j, k)]));
                }
            }
        }
        f
    }

    pub fn add_assign(&mut self, other: &Form) {
        assert_eq!(self.dim, other.dim);
        for (&m, &c) in &other.terms {
            *self.terms.entry(m).or_insert(Complex64::new(0.0, 0.0)) += c;
        }
    }

    pub fn scale(&self, c: Complex64) -> Form {
        Form {
            dim: self.dim,
            terms: self.terms.iter().map(|(&m, &v)| (m, v * c)).collect(),
        }
    }

    pub fn wedge(&self, other: &Form) -> Form {
        assert_eq!(self.dim, other.dim);
        let mut out = Form::zero(self.dim);
        for (&ma, &ca) in &self.terms {
            for (&mb, &cb) in &other.terms {
                if ma & mb != 0 {
                    continue;
                }
                let c = ca * cb * merge_sign(ma, mb);
                *out.terms.entry(ma | mb).or_insert(Complex64::new(0.0, 0.0)) += c;
            }
        }
        out
    }

    pub fn coefficient(&self, mask: u32) -> Complex64 {
        self.terms
            .get(&mask)
            .copied()
            .unwrap_or(Complex64::new(0.0, 0.0))
    }

    /// Mask of the top-degree monomial `dz^1..dz^n dzbar^1..dzbar^n`.
    pub fn top_mask(dim: usize) -> u32 {
        (1u32 << (2 * dim)) - 1
    }

    /// Coefficient of the real volume element `prod_k (i dz^k ^ dzbar^k)`.
    pub fn volume_coefficient(&self) -> Complex64 {
        let mut vol = Form::e(self.dim, 0, 0, Complex64::new(1.0, 0.0));
        for k in 1..self.dim {
            vol = vol.wedge(&Form::e(self.dim, k, k, Complex64::new(1.0, 0.0)));
        }
        let top = Form::top_mask(self.dim);
        self.coefficient(top) / vol.coefficient(top)
    }
}

/// Square matrix of forms: an endomorphism-valued form in a fixed frame.
#[derive(Debug, Clone, PartialEq)]
pub struct FormMatrix {
    rank: usize,
    entries: Vec<Form>,
}

impl FormMatrix {
    pub fn new(rank: usize, entries: Vec<Form>) -> Result<Self, AlgebraError> {
        if entries.len() != rank * rank {
            return Err(AlgebraError::Shape(rank));
        }
        Ok(FormMatrix { rank, entries })
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn get(&self, a: usize, b: usize) -> &Form {
        &self.entries[a * self.rank + b]
    }

    /// Matrix product with entries multiplied by the wedge product.
    pub fn wedge(&self, other: &FormMatrix) -> FormMatrix {
        assert_eq!(self.rank, other.rank);
        let r = self.rank;
        let dim = self.entries[0].dim();
        let mut entries = Vec::with_capacity(r * r);
        for a in 0..r {
            for b in 0..r {
                let mut acc = Form::zero(dim);
                for c in 0..r {
                    acc.add_assign(&self.get(a, c).wedge(other.get(c, b)));
                }
                entries.push(acc);
            }
        }
        FormMatrix { rank: r, entries }
    }

    /// `k`-fold wedge power, `k >= 1`.
    pub fn power(&self, k: usize) -> FormMatrix {
        let mut out = self.clone();
        for _ in 1..k {
            out = out.wedge(self);
        }
        out
    }

    /// Matrix of coefficients of the volume element (top-degree entries only).
    pub fn volume_coefficients(&self) -> DMatrix<Complex64> {
        DMatrix::from_fn(self.rank, self.rank, |a, b| {
            self.get(a, b).volume_coefficient()
        })
    }
}
