#![allow(dead_code)]

use num_complex::Complex64 as C64;
use proptest::prelude::*;
use spinchain_core::{CMatrix, DensityMatrix};

pub fn matrix_from(values: &[(f64, f64)], dim: usize) -> CMatrix {
    CMatrix::from_fn(dim, dim, |r, c| {
        let (re, im) = values[r * dim + c];
        C64::new(re, im)
    })
}

pub fn state_from(values: &[(f64, f64)], dim: usize) -> DensityMatrix {
    let a = matrix_from(values, dim);
    let p = a.dot(&a.adjoint());
    let tr = p.trace().re;
    DensityMatrix::new(&p * (1.0 / tr)).unwrap()
}

pub fn entries(dim: usize) -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), dim * dim)
}

/// Column-stacked matrix of any linear map on `dim × dim` matrices.
pub fn superop_matrix(dim: usize, f: impl Fn(&CMatrix) -> CMatrix) -> CMatrix {
    let big = dim * dim;
    let mut out = CMatrix::zeros(big, big);
    for col in 0..big {
        let basis = CMatrix::outer_basis(dim, col % dim, col / dim);
        for (row, v) in f(&basis).vec_columns().into_iter().enumerate() {
            out[(row, col)] = v;
        }
    }
    out
}

/// Eigenvalues of a general complex matrix from its Schur form.
pub fn general_eigenvalues(m: &CMatrix) -> Vec<C64> {
    let n = m.rows();
    let dm = nalgebra::DMatrix::from_fn(n, n, |r, c| m[(r, c)]);
    let (_, t) = nalgebra::Schur::new(dm).unpack();
    (0..n).map(|i| t[(i, i)]).collect()
}
