//! Isometric real coordinates for Hermitian matrices.
//!
//! An `n x n` Hermitian matrix maps to `n²` reals: the diagonal first, then for
//! each `i < j` (row-major) the pair `√2·Re a_ij, √2·Im a_ij`. With this
//! scaling `hvec(A)·hvec(B) = tr(AB)`, so Euclidean geometry in coordinates is
//! Frobenius geometry on matrices.

use std::f64::consts::SQRT_2;

use nalgebra::DVector;
use num_complex::Complex64;

use crate::matcore::ComplexMatrix;

pub fn hvec_len(n: usize) -> usize {
    n * n
}

pub fn hvec(a: &ComplexMatrix) -> DVector<f64> {
    let n = a.nrows();
    let mut x = DVector::zeros(hvec_len(n));
    for i in 0..n {
        x[i] = a[(i, i)].re;
    }
    let mut k = n;
    for i in 0..n {
        for j in i + 1..n {
            // average both triangles so slightly non-Hermitian input is projected
            let z = (a[(i, j)] + a[(j, i)].conj()) * 0.5;
            x[k] = SQRT_2 * z.re;
            x[k + 1] = SQRT_2 * z.im;
            k += 2;
        }
    }
    x
}

pub fn hmat(x: &DVector<f64>, n: usize) -> ComplexMatrix {
    debug_assert_eq!(x.len(), hvec_len(n));
    let mut a = ComplexMatrix::zeros(n, n);
    for i in 0..n {
        a[(i, i)] = Complex64::new(x[i], 0.0);
    }
    let mut k = n;
    for i in 0..n {
        for j in i + 1..n {
            let z = Complex64::new(x[k], x[k + 1]) / SQRT_2;
            a[(i, j)] = z;
            a[(j, i)] = z.conj();
            k += 2;
        }
    }
    a
}

/// `hvec(I)`.
pub fn identity_hvec(n: usize) -> DVector<f64> {
    let mut x = DVector::zeros(hvec_len(n));
    for i in 0..n {
        x[i] = 1.0;
    }
    x
}
