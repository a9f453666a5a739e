//! Small dense complex linear-algebra helpers shared by the crate.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::C64;

pub(crate) fn max_abs(m: &DMatrix<C64>) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// Largest entry of `|M - M^dagger|`.
pub(crate) fn hermiticity_defect(m: &DMatrix<C64>) -> f64 {
    let n = m.nrows();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Eigendecomposition of a Hermitian matrix. Only the lower triangle is read
/// after explicit symmetrisation, so tiny anti-Hermitian dust is discarded.
pub(crate) fn eigh(m: &DMatrix<C64>) -> (DVector<f64>, DMatrix<C64>) {
    let sym = (m + m.adjoint()) * C64::new(0.5, 0.0);
    let eig = SymmetricEigen::new(sym);
    (eig.eigenvalues, eig.eigenvectors)
}

/// `V diag(exp(-i lambda t)) V^dagger`.
pub(crate) fn unitary_from_eigen(values: &DVector<f64>, vectors: &DMatrix<C64>, t: f64) -> DMatrix<C64> {
    let mut scaled = vectors.clone();
    for (k, mut col) in scaled.column_iter_mut().enumerate() {
        let phase = C64::from_polar(1.0, -values[k] * t);
        col *= phase;
    }
    scaled * vectors.adjoint()
}

/// `f(M)` for Hermitian `M` and a real function applied to its spectrum.
pub(crate) fn hermitian_function(m: &DMatrix<C64>, f: impl Fn(f64) -> f64) -> DMatrix<C64> {
    let (values, vectors) = eigh(m);
    let mut scaled = vectors.clone();
    for (k, mut col) in scaled.column_iter_mut().enumerate() {
        col *= C64::new(f(values[k]), 0.0);
    }
    scaled * vectors.adjoint()
}

pub(crate) fn trace(m: &DMatrix<C64>) -> C64 {
    m.diagonal().iter().sum()
}
