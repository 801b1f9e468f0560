//! Dense complex linear algebra used throughout the crate.
//!
//! Everything here is a thin layer over `nalgebra`: Hermitian eigendecomposition,
//! square roots and (pseudo-)inverse square roots of PSD matrices, null-space
//! bases, Haar-like random unitaries and spectral rank estimation.

use nalgebra::{ComplexField, DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

pub type ComplexMatrix = DMatrix<Complex64>;
pub type ComplexVector = DVector<Complex64>;

/// Absolute symmetry tolerance accepted by [`HermitianMatrix::new`], scaled by
/// the largest entry magnitude when that exceeds one.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Relative eigenvalue tolerance for PSD checks.
pub const PSD_REL_TOL: f64 = 1e-10;

/// Default relative threshold for [`rank_estimate`].
pub const DEFAULT_RANK_TOL: f64 = 1e-8;

/// Square complex matrix equal to its conjugate transpose.
///
/// Storage is kept exactly Hermitian: the constructor averages `A` and `Aᴴ`
/// after checking the asymmetry is within tolerance.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix {
    inner: ComplexMatrix,
    psd: bool,
}

impl HermitianMatrix {
    pub fn new(m: ComplexMatrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::DimensionMismatch(format!(
                "Hermitian matrix must be square, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        let scale = m.iter().map(|z| z.norm()).fold(1.0f64, f64::max);
        let asymmetry = max_asymmetry(&m);
        if asymmetry > HERMITIAN_TOL * scale {
            return Err(Error::NotHermitian { asymmetry });
        }
        Ok(Self::from_symmetrized(m))
    }

    /// Hermitian part `(A + Aᴴ)/2` of a square matrix, with no tolerance check.
    /// Used for products that are Hermitian in exact arithmetic.
    pub fn from_symmetrized(m: ComplexMatrix) -> Self {
        assert!(m.is_square(), "from_symmetrized needs a square matrix");
        let h = (&m + m.adjoint()).scale(0.5);
        Self {
            inner: h,
            psd: false,
        }
    }

    /// Construct and verify positive semidefiniteness.
    pub fn new_psd(m: ComplexMatrix) -> Result<Self> {
        Self::new(m)?.into_psd()
    }

    /// Check the PSD invariant and set the flag.
    pub fn into_psd(mut self) -> Result<Self> {
        if !self.psd {
            let eig = hermitian_eig(&self);
            check_psd_spectrum(&eig.eigenvalues)?;
            self.psd = true;
        }
        Ok(self)
    }

    /// Mark as PSD without checking. Callers must know the matrix is PSD by
    /// construction (e.g. `BᴴB`).
    pub(crate) fn assume_psd(mut self) -> Self {
        self.psd = true;
        self
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            inner: ComplexMatrix::identity(dim, dim),
            psd: true,
        }
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            inner: ComplexMatrix::zeros(dim, dim),
            psd: true,
        }
    }

    /// Real diagonal matrix.
    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        let mut m = ComplexMatrix::zeros(n, n);
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = Complex64::new(d, 0.0);
        }
        Self {
            inner: m,
            psd: diag.iter().all(|&d| d >= 0.0),
        }
    }

    /// `v vᴴ`.
    pub fn outer(v: &ComplexVector) -> Self {
        Self {
            inner: v * v.adjoint(),
            psd: true,
        }
    }

    pub fn dim(&self) -> usize {
        self.inner.nrows()
    }

    pub fn is_psd(&self) -> bool {
        self.psd
    }

    pub fn as_matrix(&self) -> &ComplexMatrix {
        &self.inner
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.inner
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.inner[(i, i)].re).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.inner.norm()
    }

    /// `vᴴ A v`, real for Hermitian `A`.
    pub fn quadratic_form(&self, v: &ComplexVector) -> f64 {
        let av = &self.inner * v;
        v.dotc(&av).re
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            inner: self.inner.scale(s),
            psd: self.psd && s >= 0.0,
        }
    }

    /// Scale to unit Frobenius norm. The zero matrix is returned unchanged.
    pub fn frobenius_normalized(&self) -> Self {
        let n = self.frobenius_norm();
        if n == 0.0 {
            self.clone()
        } else {
            self.scaled(1.0 / n)
        }
    }
}

fn max_asymmetry(m: &ComplexMatrix) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

fn check_psd_spectrum(eigenvalues: &[f64]) -> Result<()> {
    let max_eig = eigenvalues.first().copied().unwrap_or(0.0);
    let min_eig = eigenvalues.last().copied().unwrap_or(0.0);
    if min_eig < -PSD_REL_TOL * max_eig.abs().max(f64::MIN_POSITIVE) {
        return Err(Error::NotPsd { min_eig, max_eig });
    }
    Ok(())
}

/// Eigenvalues sorted descending with matching orthonormal eigenvector columns.
#[derive(Debug, Clone)]
pub struct EigDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: ComplexMatrix,
}

impl EigDecomposition {
    /// `U f(Λ) Uᴴ` restricted to the first `keep` eigenpairs.
    pub fn reconstruct_with(&self, keep: usize, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let n = self.eigenvectors.nrows();
        let mut scaled = ComplexMatrix::zeros(n, keep);
        for k in 0..keep {
            let s = f(self.eigenvalues[k]);
            scaled.set_column(k, &self.eigenvectors.column(k).scale(s));
        }
        &scaled * self.eigenvectors.columns(0, keep).adjoint()
    }

    pub fn principal_vector(&self) -> ComplexVector {
        self.eigenvectors.column(0).into_owned()
    }
}

pub fn hermitian_eig(a: &HermitianMatrix) -> EigDecomposition {
    let n = a.dim();
    if n == 0 {
        return EigDecomposition {
            eigenvalues: Vec::new(),
            eigenvectors: ComplexMatrix::zeros(0, 0),
        };
    }
    let eig = a.inner.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let eigenvalues = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut eigenvectors = ComplexMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        eigenvectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    EigDecomposition {
        eigenvalues,
        eigenvectors,
    }
}

/// Principal square root of a PSD matrix.
///
/// With `psd_required` a spectrum that is negative beyond tolerance is an
/// error; otherwise negative eigenvalues are clamped to zero.
pub fn matrix_sqrt(a: &HermitianMatrix, psd_required: bool) -> Result<HermitianMatrix> {
    let eig = hermitian_eig(a);
    if psd_required {
        check_psd_spectrum(&eig.eigenvalues)?;
    }
    let s = eig.reconstruct_with(a.dim(), |l| l.max(0.0).sqrt());
    Ok(HermitianMatrix::from_symmetrized(s).assume_psd())
}

/// `A^{-1/2}`; fails with [`Error::Singular`] unless every eigenvalue is above
/// `rel_tol` times the largest.
pub fn inverse_sqrt(a: &HermitianMatrix, rel_tol: f64) -> Result<HermitianMatrix> {
    let eig = hermitian_eig(a);
    check_psd_spectrum(&eig.eigenvalues)?;
    let rank = rank_from_spectrum(&eig.eigenvalues, rel_tol);
    if rank < a.dim() {
        return Err(Error::Singular {
            rank,
            dim: a.dim(),
        });
    }
    let s = eig.reconstruct_with(a.dim(), |l| 1.0 / l.sqrt());
    Ok(HermitianMatrix::from_symmetrized(s).assume_psd())
}

pub fn rank_estimate(a: &HermitianMatrix, rel_tol: f64) -> usize {
    rank_from_spectrum(&hermitian_eig(a).eigenvalues, rel_tol)
}

/// Count of eigenvalues above `rel_tol` times the largest (descending input).
pub fn rank_from_spectrum(eigenvalues: &[f64], rel_tol: f64) -> usize {
    match eigenvalues.first() {
        Some(&top) if top > 0.0 => eigenvalues.iter().filter(|&&l| l > rel_tol * top).count(),
        _ => 0,
    }
}

/// Orthonormal basis of `{x : A x = 0}`, up to singular values `<= tol`.
pub fn null_space_basis<T>(a: &DMatrix<T>, tol: f64) -> DMatrix<T>
where
    T: ComplexField<RealField = f64>,
{
    let (rows, cols) = a.shape();
    if cols == 0 {
        return DMatrix::zeros(0, 0);
    }
    // pad to square so the SVD exposes the full right singular basis
    let n = rows.max(cols);
    let mut padded = DMatrix::<T>::zeros(n, cols);
    padded.view_mut((0, 0), (rows, cols)).copy_from(a);
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("requested v_t");
    let null_rows: Vec<usize> = (0..cols)
        .filter(|&k| svd.singular_values[k] <= tol)
        .collect();
    let mut basis = DMatrix::<T>::zeros(cols, null_rows.len());
    for (c, &k) in null_rows.iter().enumerate() {
        for i in 0..cols {
            basis[(i, c)] = v_t[(k, i)].clone().conjugate();
        }
    }
    basis
}

/// Complex matrix with i.i.d. standard complex Gaussian entries.
pub fn complex_gaussian<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> ComplexMatrix {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    ComplexMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(re * s, im * s)
    })
}

/// Haar-distributed unitary via QR of a complex Gaussian matrix with the
/// phases of `R`'s diagonal absorbed into `Q`.
pub fn random_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> ComplexMatrix {
    assert!(dim >= 1, "random_unitary needs dim >= 1");
    let g = complex_gaussian(dim, dim, rng);
    let qr = g.qr();
    let (mut q, r) = qr.unpack();
    for k in 0..dim {
        let d = r[(k, k)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { Complex64::new(1.0, 0.0) };
        let col = q.column(k) * phase;
        q.set_column(k, &col);
    }
    q
}

pub fn random_unitary_seeded(dim: usize, seed: u64) -> ComplexMatrix {
    random_unitary(dim, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// Unitary matrix whose first column is `v / ||v||`; the remaining columns
/// are a Gram-Schmidt orthonormalization of random Gaussian complements.
pub fn orthonormal_completion<R: Rng + ?Sized>(v: &ComplexVector, rng: &mut R) -> ComplexMatrix {
    let n = v.len();
    let mut out = ComplexMatrix::zeros(n, n);
    out.set_column(0, &v.unscale(v.norm()));
    let mut filled = 1;
    while filled < n {
        let mut w = complex_gaussian(n, 1, rng).column(0).into_owned();
        // two passes of classical Gram-Schmidt
        for _ in 0..2 {
            for k in 0..filled {
                let q = out.column(k);
                let proj = q.dotc(&w);
                w -= q * proj;
            }
        }
        let nw = w.norm();
        if nw > 1e-8 {
            out.set_column(filled, &w.unscale(nw));
            filled += 1;
        }
    }
    out
}

/// Moore-Penrose pseudo-inverse of a Hermitian PSD matrix's square root,
/// truncated to the top `keep` eigenpairs.
pub fn pseudo_inverse_sqrt(eig: &EigDecomposition, keep: usize) -> ComplexMatrix {
    eig.reconstruct_with(keep, |l| 1.0 / l.sqrt())
}

/// `||A - B||_F`.
pub fn frobenius_distance(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    (a - b).norm()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    fn random_psd(n: usize, rank: usize, seed: u64) -> HermitianMatrix {
        let b = complex_gaussian(rank, n, &mut rng(seed));
        HermitianMatrix::from_symmetrized(b.adjoint() * b).assume_psd()
    }

    fn random_hermitian(n: usize, seed: u64) -> HermitianMatrix {
        HermitianMatrix::from_symmetrized(complex_gaussian(n, n, &mut rng(seed)))
    }

    #[test]
    fn rejects_non_hermitian() {
        let mut m = ComplexMatrix::identity(3, 3);
        m[(0, 1)] = Complex64::new(0.5, 0.0);
        assert!(matches!(HermitianMatrix::new(m), Err(Error::NotHermitian { .. })));
        let rect = ComplexMatrix::zeros(2, 3);
        assert!(matches!(HermitianMatrix::new(rect), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn psd_check() {
        let d = HermitianMatrix::from_real_diagonal(&[1.0, -0.5]);
        assert!(matches!(
            HermitianMatrix::new_psd(d.into_matrix()),
            Err(Error::NotPsd { .. })
        ));
        assert!(HermitianMatrix::new_psd(ComplexMatrix::identity(2, 2)).unwrap().is_psd());
    }

    #[test]
    fn eig_identity_and_diagonal() {
        let e = hermitian_eig(&HermitianMatrix::identity(4));
        assert_eq!(e.eigenvalues, vec![1.0; 4]);
        let e = hermitian_eig(&HermitianMatrix::from_real_diagonal(&[1.0, 3.0]));
        assert_abs_diff_eq!(e.eigenvalues[0], 3.0, epsilon = 1e-14);
        assert_abs_diff_eq!(e.eigenvalues[1], 1.0, epsilon = 1e-14);
        // columns are a permutation of the identity (up to phase)
        assert_abs_diff_eq!(e.eigenvectors[(1, 0)].norm(), 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(e.eigenvectors[(0, 1)].norm(), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn eig_reconstruction_random() {
        let a = random_hermitian(5, 3);
        let e = hermitian_eig(&a);
        assert!(e.eigenvalues.windows(2).all(|w| w[0] >= w[1]));
        // independent reconstruction: sum of rank-one terms
        let mut rec = ComplexMatrix::zeros(5, 5);
        for k in 0..5 {
            let u = e.eigenvectors.column(k);
            rec += (u * u.adjoint()).scale(e.eigenvalues[k]);
        }
        assert!(frobenius_distance(&rec, a.as_matrix()) <= 1e-10 * a.frobenius_norm());
        let gram = e.eigenvectors.adjoint() * &e.eigenvectors;
        assert!(frobenius_distance(&gram, &ComplexMatrix::identity(5, 5)) <= 1e-10);
    }

    #[test]
    fn sqrt_examples() {
        let s = matrix_sqrt(&HermitianMatrix::identity(3), true).unwrap();
        assert!(frobenius_distance(s.as_matrix(), &ComplexMatrix::identity(3, 3)) < 1e-14);
        let s = matrix_sqrt(&HermitianMatrix::from_real_diagonal(&[4.0, 9.0]), true).unwrap();
        let want = HermitianMatrix::from_real_diagonal(&[2.0, 3.0]);
        assert!(frobenius_distance(s.as_matrix(), want.as_matrix()) < 1e-14);

        let a = random_psd(6, 6, 11);
        let s = matrix_sqrt(&a, true).unwrap();
        let back = s.as_matrix() * s.as_matrix();
        assert!(frobenius_distance(&back, a.as_matrix()) <= 1e-9 * a.frobenius_norm());
    }

    #[test]
    fn sqrt_errors() {
        let neg = HermitianMatrix::from_real_diagonal(&[1.0, -1.0]);
        assert!(matches!(matrix_sqrt(&neg, true), Err(Error::NotPsd { .. })));
        assert!(matrix_sqrt(&neg, false).is_ok());
        let sing = HermitianMatrix::from_real_diagonal(&[1.0, 0.0]);
        assert!(matches!(inverse_sqrt(&sing, DEFAULT_RANK_TOL), Err(Error::Singular { rank: 1, dim: 2 })));
        let a = random_psd(4, 4, 5);
        let is = inverse_sqrt(&a, DEFAULT_RANK_TOL).unwrap();
        let id = is.as_matrix() * a.as_matrix() * is.as_matrix();
        assert!(frobenius_distance(&id, &ComplexMatrix::identity(4, 4)) < 1e-9);
    }

    #[test]
    fn null_space_examples() {
        let id = ComplexMatrix::identity(2, 2);
        assert_eq!(null_space_basis(&id, 1e-10).ncols(), 0);

        let row = ComplexMatrix::from_row_slice(1, 2, &[Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)]);
        let n = null_space_basis(&row, 1e-10);
        assert_eq!(n.shape(), (2, 1));
        assert_abs_diff_eq!(n[(0, 0)].norm(), 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(n[(1, 0)].norm(), 1.0, epsilon = 1e-14);

        let a = complex_gaussian(3, 5, &mut rng(2));
        let n = null_space_basis(&a, 1e-10);
        assert_eq!(n.ncols(), 2);
        for k in 0..2 {
            assert!((&a * n.column(k)).norm() <= 1e-10);
        }
    }

    #[test]
    fn null_space_real() {
        let a = DMatrix::<f64>::from_row_slice(2, 4, &[1.0, 1.0, 0.0, 0.0, 2.0, 2.0, 0.0, 0.0]);
        let n = null_space_basis(&a, 1e-10);
        assert_eq!(n.ncols(), 3);
        assert!((&a * &n).norm() < 1e-12);
    }

    #[test]
    fn unitary_examples() {
        let x = random_unitary_seeded(1, 9);
        assert_abs_diff_eq!(x[(0, 0)].norm(), 1.0, epsilon = 1e-14);
        assert_eq!(random_unitary_seeded(4, 42), random_unitary_seeded(4, 42));
        let x = random_unitary_seeded(8, 1);
        let g = x.adjoint() * &x;
        assert!(frobenius_distance(&g, &ComplexMatrix::identity(8, 8)) <= 1e-10);
    }

    #[test]
    fn rank_examples() {
        assert_eq!(rank_estimate(&HermitianMatrix::identity(5), 1e-8), 5);
        assert_eq!(rank_estimate(&HermitianMatrix::from_real_diagonal(&[1.0, 1e-12, 0.0]), 1e-8), 1);
        assert_eq!(rank_estimate(&random_psd(8, 3, 17), 1e-8), 3);
        assert_eq!(rank_estimate(&HermitianMatrix::zeros(3), 1e-8), 0);
    }

    #[test]
    fn completion_keeps_first_column() {
        let v = complex_gaussian(5, 1, &mut rng(4)).column(0).into_owned();
        let u = orthonormal_completion(&v, &mut rng(5));
        let g = u.adjoint() * &u;
        assert!(frobenius_distance(&g, &ComplexMatrix::identity(5, 5)) < 1e-12);
        assert!((u.column(0) - v.unscale(v.norm())).norm() < 1e-14);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn sqrt_squares_back(n in 1usize..7, rank in 1usize..7, seed in any::<u64>()) {
            let a = random_psd(n, rank.min(n), seed);
            let s = matrix_sqrt(&a, true).unwrap();
            let back = s.as_matrix() * s.as_matrix();
            prop_assert!(frobenius_distance(&back, a.as_matrix()) <= 1e-9 * a.frobenius_norm());
        }

        #[test]
        fn eigenvalues_sum_to_trace(n in 1usize..8, seed in any::<u64>()) {
            let a = random_hermitian(n, seed);
            let sum: f64 = hermitian_eig(&a).eigenvalues.iter().sum();
            prop_assert!((sum - a.trace()).abs() <= 1e-10 * a.frobenius_norm().max(1.0));
        }

        #[test]
        fn null_space_orthogonal(rows in 1usize..5, cols in 1usize..7, seed in any::<u64>()) {
            let a = complex_gaussian(rows, cols, &mut rng(seed));
            let tol = 1e-10;
            let n = null_space_basis(&a, tol);
            prop_assert_eq!(n.ncols(), cols.saturating_sub(rows));
            let g = n.adjoint() * &n;
            prop_assert!(frobenius_distance(&g, &ComplexMatrix::identity(n.ncols(), n.ncols())) < 1e-10);
            prop_assert!((&a * &n).norm() <= tol * a.norm().max(1.0));
        }

        #[test]
        fn unitary_preserves_norms(n in 1usize..9, seed in any::<u64>()) {
            let x = random_unitary_seeded(n, seed);
            let w = complex_gaussian(n, 1, &mut rng(seed ^ 0xabcd));
            prop_assert!(((&x * &w).norm() - w.norm()).abs() <= 1e-10 * w.norm().max(1.0));
        }
    }
}
