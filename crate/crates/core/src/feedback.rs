//! UE-side feedback model: effective covariance, PMI and CQI.

use crate::codebook::Codebook;
use crate::error::{Error, Result};
use crate::matcore::{ComplexMatrix, HermitianMatrix};

/// Relative margin below which two quadratic-form values count as tied.
pub const TIE_TOL: f64 = 1e-12;

/// One round of feedback together with the weighting matrix that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct FeedbackRecord {
    pub round: usize,
    pub weighting: ComplexMatrix,
    /// Zero-based codeword index.
    pub pmi: usize,
    pub cqi: f64,
}

/// `Qᴴ C Q`.
pub fn effective_covariance(c: &HermitianMatrix, q: &ComplexMatrix) -> Result<HermitianMatrix> {
    if q.nrows() != c.dim() {
        return Err(Error::DimensionMismatch(format!(
            "weighting has {} rows, covariance is {}x{}",
            q.nrows(),
            c.dim(),
            c.dim()
        )));
    }
    let r = q.adjoint() * c.as_matrix() * q;
    let r = HermitianMatrix::from_symmetrized(r);
    Ok(if c.is_psd() { r.assume_psd() } else { r })
}

/// Codeword maximizing `v_mᴴ R v_m` (lowest index on ties) and the maximum.
pub fn select_pmi_and_cqi(r: &HermitianMatrix, book: &Codebook) -> Result<(usize, f64)> {
    if book.is_empty() {
        return Err(Error::EmptyCodebook);
    }
    if r.dim() != book.port_count() {
        return Err(Error::DimensionMismatch(format!(
            "effective covariance is {}x{}, codebook has {} ports",
            r.dim(),
            r.dim(),
            book.port_count()
        )));
    }
    let mut best = (0, r.quadratic_form(book.codeword(0)));
    for (m, v) in book.iter().enumerate().skip(1) {
        let val = r.quadratic_form(v);
        if val > best.1 + TIE_TOL * best.1.abs().max(1.0) {
            best = (m, val);
        }
    }
    Ok((best.0, best.1.max(0.0)))
}

/// Full UE step for one round: `R = QᴴCQ`, then PMI/CQI selection.
pub fn ue_feedback(
    c: &HermitianMatrix,
    q: &ComplexMatrix,
    book: &Codebook,
    round: usize,
) -> Result<FeedbackRecord> {
    let r = effective_covariance(c, q)?;
    let (pmi, cqi) = select_pmi_and_cqi(&r, book)?;
    Ok(FeedbackRecord {
        round,
        weighting: q.clone(),
        pmi,
        cqi,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codebook::{gen_type1_codebook, Type1Config};
    use crate::matcore::{complex_gaussian, random_unitary_seeded};
    use num_complex::Complex64;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn book16() -> Codebook {
        gen_type1_codebook(&Type1Config {
            n1: 2,
            n2: 1,
            o1: 4,
            o2: 1,
            cophase_count: 2,
            cross_polarized: true,
        })
        .unwrap()
    }

    fn random_psd(n: usize, seed: u64) -> HermitianMatrix {
        let b = complex_gaussian(n, n, &mut ChaCha8Rng::seed_from_u64(seed));
        HermitianMatrix::from_symmetrized(b.adjoint() * b).assume_psd()
    }

    #[test]
    fn isometry_gives_identity() {
        let x = random_unitary_seeded(6, 3);
        let q = x.columns(0, 4).into_owned();
        let r = effective_covariance(&HermitianMatrix::identity(6), &q).unwrap();
        assert!((r.as_matrix() - ComplexMatrix::identity(4, 4)).norm() < 1e-12);
    }

    #[test]
    fn zero_weighting() {
        let r = effective_covariance(&random_psd(5, 1), &ComplexMatrix::zeros(5, 3)).unwrap();
        assert_eq!(r.frobenius_norm(), 0.0);
    }

    #[test]
    fn matches_loop_oracle() {
        let c = random_psd(5, 2);
        let q = complex_gaussian(5, 3, &mut ChaCha8Rng::seed_from_u64(9));
        let r = effective_covariance(&c, &q).unwrap();
        for a in 0..3 {
            for b in 0..3 {
                let mut acc = Complex64::new(0.0, 0.0);
                for i in 0..5 {
                    for j in 0..5 {
                        acc += q[(i, a)].conj() * c.as_matrix()[(i, j)] * q[(j, b)];
                    }
                }
                assert!((acc - r.as_matrix()[(a, b)]).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn dimension_mismatch() {
        let c = HermitianMatrix::identity(4);
        assert!(effective_covariance(&c, &ComplexMatrix::zeros(3, 2)).is_err());
        let book = book16();
        assert!(select_pmi_and_cqi(&HermitianMatrix::identity(3), &book).is_err());
    }

    #[test]
    fn aligned_rank_one() {
        let book = book16();
        let r = HermitianMatrix::outer(book.codeword(3));
        assert_eq!(select_pmi_and_cqi(&r, &book).unwrap().0, 3);
        assert!((select_pmi_and_cqi(&r, &book).unwrap().1 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn isotropic_tie_breaks_low() {
        let (pmi, cqi) = select_pmi_and_cqi(&HermitianMatrix::identity(4), &book16()).unwrap();
        assert_eq!(pmi, 0);
        assert!((cqi - 1.0).abs() < 1e-12);
    }

    #[test]
    fn matches_exhaustive_oracle() {
        let book = book16();
        for seed in 0..20 {
            let r = random_psd(4, seed);
            let vals: Vec<f64> = book
                .iter()
                .map(|v| (v.adjoint() * r.as_matrix() * v)[(0, 0)].re)
                .collect();
            let oracle = (0..vals.len()).fold(0, |best, m| if vals[m] > vals[best] { m } else { best });
            let (pmi, cqi) = select_pmi_and_cqi(&r, &book).unwrap();
            assert_eq!(pmi, oracle);
            assert!((cqi - vals[oracle]).abs() < 1e-12 * vals[oracle]);
        }
    }

    proptest! {
        #[test]
        fn max_property_and_scaling(seed in any::<u64>(), gamma in 0.01f64..100.0) {
            let book = book16();
            let r = random_psd(4, seed);
            let (pmi, cqi) = select_pmi_and_cqi(&r, &book).unwrap();
            for v in book.iter() {
                prop_assert!(r.quadratic_form(v) <= cqi * (1.0 + 1e-12));
            }
            let (pmi2, cqi2) = select_pmi_and_cqi(&r.scaled(gamma), &book).unwrap();
            prop_assert_eq!(pmi, pmi2);
            prop_assert!((cqi2 - gamma * cqi).abs() <= 1e-10 * gamma * cqi);
        }

        #[test]
        fn cqi_ignores_null_perturbation(seed in any::<u64>()) {
            let book = book16();
            let r = random_psd(4, seed);
            let (pmi, cqi) = select_pmi_and_cqi(&r, &book).unwrap();
            // P = (I - v vᴴ) G (I - v vᴴ) has v_{m0} in its null space
            let v = book.codeword(pmi);
            let proj = ComplexMatrix::identity(4, 4) - v * v.adjoint();
            let g = random_psd(4, seed.wrapping_add(1));
            let p = HermitianMatrix::from_symmetrized(&proj * g.as_matrix() * &proj);
            let perturbed = HermitianMatrix::from_symmetrized(r.as_matrix() + p.as_matrix().scale(1e-9));
            let (pmi2, cqi2) = select_pmi_and_cqi(&perturbed, &book).unwrap();
            prop_assume!(pmi2 == pmi);
            prop_assert!((cqi2 - cqi).abs() <= 1e-10 * cqi.max(1.0));
        }
    }
}
