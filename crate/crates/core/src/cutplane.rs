//! Base-station weighting-matrix design.
//!
//! Given the current center estimate `Ĉ`, a weighting matrix `Q` is chosen so
//! that `Qᴴ Ĉ Q` equals a target `R = Σ σ_n w_n w_nᴴ` whose top eigenvector is
//! a chosen codeword `v_{m'}`. Feedback measured through such a `Q` then either
//! reports `m'` or produces a cut that excludes (or touches) `Ĉ`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::codebook::Codebook;
use crate::error::{Error, Result};
use crate::feedback::{effective_covariance, select_pmi_and_cqi};
use crate::matcore::{
    complex_gaussian, hermitian_eig, inverse_sqrt, null_space_basis, orthonormal_completion,
    random_unitary, ComplexMatrix, HermitianMatrix,
};

/// Margin a cut must clear against every non-parallel codeword to be strict.
pub const PROPER_CUT_MARGIN: f64 = 1e-12;

/// Hyper-parameters of one cut.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CutDesignParams {
    /// Zero-based index of the codeword placed on the top eigenvector.
    pub m_prime: usize,
    /// Target eigenvalues, non-increasing, one per port.
    pub sigmas: Vec<f64>,
    pub complement_seed: u64,
    pub unitary_seed: u64,
}

/// Eigenvalue profile of the target matrix.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SigmaSchedule {
    /// All ones: every cut is neutral.
    #[default]
    Isotropic,
    /// `σ_n = (1 - δ)^{n-1}`: strict cuts.
    Geometric { delta: f64 },
}

impl SigmaSchedule {
    pub fn strict() -> Self {
        SigmaSchedule::Geometric { delta: 0.1 }
    }

    pub fn sigmas(&self, ports: usize) -> Vec<f64> {
        match *self {
            SigmaSchedule::Isotropic => vec![1.0; ports],
            SigmaSchedule::Geometric { delta } => {
                (0..ports).map(|n| (1.0 - delta).powi(n as i32)).collect()
            }
        }
    }
}

/// Zero the trailing eigenvalues so the target has rank at most `rank`.
pub fn truncate_sigmas(sigmas: &[f64], rank: usize) -> Vec<f64> {
    sigmas
        .iter()
        .enumerate()
        .map(|(n, &s)| if n < rank { s } else { 0.0 })
        .collect()
}

impl CutDesignParams {
    pub fn validate(&self, book: &Codebook) -> Result<()> {
        let ports = book.port_count();
        if self.m_prime >= book.len() {
            return Err(Error::Config(format!(
                "m_prime {} out of range for {} codewords",
                self.m_prime,
                book.len()
            )));
        }
        if self.sigmas.len() != ports {
            return Err(Error::Config(format!(
                "expected {ports} sigmas, got {}",
                self.sigmas.len()
            )));
        }
        if !(self.sigmas[0] > 0.0) {
            return Err(Error::Config("sigma_1 must be positive".into()));
        }
        if self.sigmas.iter().any(|&s| !(s >= 0.0) || !s.is_finite()) {
            return Err(Error::Config("sigmas must be finite and non-negative".into()));
        }
        if self.sigmas.windows(2).any(|w| w[1] > w[0]) {
            return Err(Error::Config("sigmas must be non-increasing".into()));
        }
        Ok(())
    }

    /// Number of strictly positive sigmas, i.e. the rank of the target.
    pub fn target_rank(&self) -> usize {
        self.sigmas.iter().filter(|&&s| s > 0.0).count()
    }
}

/// `Y = [v_{m'}, u_1, …, u_{N_P-1}]`, unitary with first column `v_{m'}`.
pub fn completion_basis(params: &CutDesignParams, book: &Codebook) -> ComplexMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(params.complement_seed);
    orthonormal_completion(book.codeword(params.m_prime), &mut rng)
}

fn target_from_basis(y: &ComplexMatrix, sigmas: &[f64]) -> HermitianMatrix {
    let mut scaled = y.clone();
    for (n, &s) in sigmas.iter().enumerate() {
        scaled.column_mut(n).scale_mut(s);
    }
    HermitianMatrix::from_symmetrized(scaled * y.adjoint()).assume_psd()
}

/// `R = Σ σ_n w_n w_nᴴ` with `w_1 = v_{m'}`.
pub fn build_target_r(params: &CutDesignParams, book: &Codebook) -> Result<HermitianMatrix> {
    params.validate(book)?;
    Ok(target_from_basis(&completion_basis(params, book), &params.sigmas))
}

/// Full-rank design `Q = Ĉ^{-1/2} X Σ Yᴴ`.
///
/// `Σ` is the `N_A x N_P` rectangular diagonal of `√σ_n`, so only the first
/// `N_P` columns of the random unitary `X` contribute.
pub fn design_q_full_rank(
    c_hat: &HermitianMatrix,
    params: &CutDesignParams,
    book: &Codebook,
    rank_tol: f64,
) -> Result<ComplexMatrix> {
    params.validate(book)?;
    let (na, np) = (c_hat.dim(), book.port_count());
    if np > na {
        return Err(Error::DimensionMismatch(format!("{np} ports exceed {na} antennas")));
    }
    let inv_sqrt = inverse_sqrt(c_hat, rank_tol)?;
    let x = random_unitary(na, &mut ChaCha8Rng::seed_from_u64(params.unitary_seed));
    let mut x_sigma = x.columns(0, np).into_owned();
    for (n, &s) in params.sigmas.iter().enumerate() {
        x_sigma.column_mut(n).scale_mut(s.sqrt());
    }
    let y = completion_basis(params, book);
    Ok(inv_sqrt.as_matrix() * x_sigma * y.adjoint())
}

/// Optional component added from `Null(U₁ᴴ)` in the rank-deficient design.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum NullComponent {
    #[default]
    Zero,
    /// Gaussian combination of a null-space basis, scaled by `scale`.
    Random { seed: u64, scale: f64 },
}

/// Rank-deficient design `Q = (Ĉ^{1/2})† U₁ B + O`.
///
/// `U₁` holds the top `rank` eigenvectors of `Ĉ`; eigenvalues below those are
/// treated as zero. `B` is `rank x N_P` with `BᴴB = R`, built from the rows
/// `√σ_n w_nᴴ`, which requires `rank(R) <= rank`.
pub fn design_q_rank_deficient(
    c_hat: &HermitianMatrix,
    rank: usize,
    params: &CutDesignParams,
    book: &Codebook,
    null: NullComponent,
) -> Result<ComplexMatrix> {
    params.validate(book)?;
    let (na, np) = (c_hat.dim(), book.port_count());
    if rank == 0 || rank > na {
        return Err(Error::Config(format!("rank {rank} outside 1..={na}")));
    }
    let target_rank = params.target_rank();
    if target_rank > rank {
        return Err(Error::InfeasibleTarget { target_rank, rank });
    }
    if np < rank && rank < na && target_rank < np {
        return Err(Error::Config(format!(
            "with rank {rank} above {np} ports every sigma must be positive"
        )));
    }

    let eig = hermitian_eig(c_hat);
    if eig.eigenvalues[rank - 1] <= 0.0 {
        return Err(Error::Singular { rank: rank - 1, dim: na });
    }
    let y = completion_basis(params, book);
    let rows = rank.min(np);
    // F = U₁ B; then S† F = U₁ Λ₁^{-1/2} B
    let mut b = ComplexMatrix::zeros(rank, np);
    for n in 0..rows {
        let row = y.column(n).adjoint().scale(params.sigmas[n].sqrt());
        b.set_row(n, &row);
    }
    let u1 = eig.eigenvectors.columns(0, rank);
    let mut scaled_b = b;
    for k in 0..rank {
        scaled_b.row_mut(k).scale_mut(1.0 / eig.eigenvalues[k].sqrt());
    }
    let mut q = u1 * scaled_b;

    if let NullComponent::Random { seed, scale } = null {
        let basis = null_space_basis(&u1.adjoint(), 1e-10);
        if basis.ncols() > 0 {
            let g = complex_gaussian(basis.ncols(), np, &mut ChaCha8Rng::seed_from_u64(seed));
            q += (basis * g).scale(scale);
        }
    }
    Ok(q)
}

/// Which design was applied in a round.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CutBranch {
    FullRank,
    RankDeficient,
}

/// Outcome of checking a designed weighting matrix against the center.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CutReport {
    pub m_prime: usize,
    pub predicted_pmi: usize,
    /// `v_{m'}ᴴ R_c v_{m'}` with `R_c = Qᴴ Ĉ Q`.
    pub target_value: f64,
    /// Largest value over codewords not parallel to `v_{m'}`.
    pub max_other_value: f64,
    /// `target_value - max_other_value`.
    pub margin: f64,
    /// `v_{m'}` attains the maximum (within rounding).
    pub satisfies_cut: bool,
    pub cut_is_proper: bool,
    pub degenerate: bool,
    /// Codewords excluded from the margin because they are parallel to `v_{m'}`.
    pub parallel_excluded: Vec<usize>,
}

pub fn validate_cut(
    c_hat: &HermitianMatrix,
    q_next: &ComplexMatrix,
    params: &CutDesignParams,
    book: &Codebook,
) -> Result<CutReport> {
    params.validate(book)?;
    let rc = effective_covariance(c_hat, q_next)?;
    let scale = rc.frobenius_norm();
    let target_value = rc.quadratic_form(book.codeword(params.m_prime));
    let mut max_other = f64::NEG_INFINITY;
    let mut parallel_excluded = Vec::new();
    for (m, v) in book.iter().enumerate() {
        if m == params.m_prime {
            continue;
        }
        if book.is_parallel(m, params.m_prime) {
            parallel_excluded.push(m);
            continue;
        }
        max_other = max_other.max(rc.quadratic_form(v));
    }
    let (predicted_pmi, best) = select_pmi_and_cqi(&rc, book)?;
    let degenerate = scale == 0.0;
    let margin = target_value - max_other;
    let satisfies_cut = !degenerate && target_value >= best - 1e-10 * scale;
    Ok(CutReport {
        m_prime: params.m_prime,
        predicted_pmi,
        target_value,
        max_other_value: max_other,
        margin,
        satisfies_cut,
        cut_is_proper: satisfies_cut && margin > PROPER_CUT_MARGIN,
        degenerate,
        parallel_excluded,
    })
}

/// A designed weighting matrix with its branch and validation report.
#[derive(Debug, Clone)]
pub struct CutDesign {
    pub q: ComplexMatrix,
    pub branch: CutBranch,
    /// Numerical rank used for the design.
    pub rank: usize,
    pub report: CutReport,
}

/// Pick the design by the numerical rank of `c_hat` and validate the result.
/// In the rank-deficient branch the sigmas are truncated to the rank when it
/// does not exceed the port count.
pub fn design_cut(
    c_hat: &HermitianMatrix,
    params: &CutDesignParams,
    book: &Codebook,
    rank_tol: f64,
    null: NullComponent,
) -> Result<CutDesign> {
    let na = c_hat.dim();
    let rank = crate::matcore::rank_estimate(c_hat, rank_tol);
    let (q, branch, used) = if rank == na {
        (design_q_full_rank(c_hat, params, book, rank_tol)?, CutBranch::FullRank, params.clone())
    } else {
        let mut p = params.clone();
        if rank <= book.port_count() {
            p.sigmas = truncate_sigmas(&p.sigmas, rank);
        }
        (design_q_rank_deficient(c_hat, rank, &p, book, null)?, CutBranch::RankDeficient, p)
    };
    let report = validate_cut(c_hat, &q, &used, book)?;
    Ok(CutDesign {
        q,
        branch,
        rank,
        report,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codebook::{gen_type1_codebook, Type1Config};
    use crate::matcore::{frobenius_distance, DEFAULT_RANK_TOL};
    use proptest::prelude::*;
    use rand::Rng;

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

    fn params(m_prime: usize, sigmas: Vec<f64>, seed: u64) -> CutDesignParams {
        CutDesignParams {
            m_prime,
            sigmas,
            complement_seed: seed,
            unitary_seed: seed.wrapping_mul(31).wrapping_add(7),
        }
    }

    fn random_psd(n: usize, rank: usize, seed: u64) -> HermitianMatrix {
        let b = complex_gaussian(rank, n, &mut ChaCha8Rng::seed_from_u64(seed));
        HermitianMatrix::from_symmetrized(b.adjoint() * b).assume_psd()
    }

    fn residual(c: &HermitianMatrix, q: &ComplexMatrix, r: &HermitianMatrix) -> f64 {
        let back = q.adjoint() * c.as_matrix() * q;
        frobenius_distance(&back, r.as_matrix()) / r.frobenius_norm()
    }

    #[test]
    fn isotropic_target_is_identity() {
        let r = build_target_r(&params(5, vec![1.0; 4], 1), &book16()).unwrap();
        assert!(frobenius_distance(r.as_matrix(), &ComplexMatrix::identity(4, 4)) < 1e-12);
    }

    #[test]
    fn rank_one_target() {
        let book = book16();
        let r = build_target_r(&params(2, vec![1.0, 0.0, 0.0, 0.0], 1), &book).unwrap();
        let v = book.codeword(2);
        assert!(frobenius_distance(r.as_matrix(), &(v * v.adjoint())) < 1e-12);
    }

    #[test]
    fn target_spectrum_matches_sigmas() {
        let sig = vec![3.0, 2.0, 1.0, 0.0];
        let r = build_target_r(&params(7, sig.clone(), 99), &book16()).unwrap();
        let e = hermitian_eig(&r);
        for (a, b) in e.eigenvalues.iter().zip(&sig) {
            assert!((a - b).abs() < 1e-12);
        }
        // top eigenvector is v_{m'} up to phase
        assert!((e.principal_vector().dotc(book16().codeword(7)).norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sigma_validation() {
        let book = book16();
        assert!(build_target_r(&params(0, vec![1.0, 2.0, 0.5, 0.1], 0), &book).is_err());
        assert!(build_target_r(&params(0, vec![0.0; 4], 0), &book).is_err());
        assert!(build_target_r(&params(0, vec![1.0; 3], 0), &book).is_err());
        assert!(build_target_r(&params(16, vec![1.0; 4], 0), &book).is_err());
    }

    #[test]
    fn full_rank_identity_covariance() {
        let book = book16();
        let q = design_q_full_rank(&HermitianMatrix::identity(8), &params(3, vec![1.0; 4], 5), &book, DEFAULT_RANK_TOL)
            .unwrap();
        assert!(frobenius_distance(&(q.adjoint() * &q), &ComplexMatrix::identity(4, 4)) < 1e-12);
    }

    #[test]
    fn full_rank_multiply_back() {
        let book = book16();
        let c = random_psd(8, 8, 21);
        let p = params(9, vec![2.0, 1.5, 0.7, 0.2], 4);
        let q = design_q_full_rank(&c, &p, &book, DEFAULT_RANK_TOL).unwrap();
        assert_eq!(q.shape(), (8, 4));
        let r = build_target_r(&p, &book).unwrap();
        assert!(residual(&c, &q, &r) <= 1e-8);
    }

    #[test]
    fn full_rank_rejects_singular() {
        let c = random_psd(8, 3, 2);
        let err = design_q_full_rank(&c, &params(0, vec![1.0; 4], 0), &book16(), DEFAULT_RANK_TOL);
        assert!(matches!(err, Err(Error::Singular { .. })));
    }

    #[test]
    fn rank_one_estimate() {
        let book = book16();
        let v = complex_gaussian(8, 1, &mut ChaCha8Rng::seed_from_u64(1)).column(0).into_owned();
        let c = HermitianMatrix::outer(&v);
        let p = params(6, vec![1.0, 0.0, 0.0, 0.0], 3);
        let q = design_q_rank_deficient(&c, 1, &p, &book, NullComponent::Zero).unwrap();
        let w = book.codeword(6);
        let back = q.adjoint() * c.as_matrix() * &q;
        assert!(frobenius_distance(&back, &(w * w.adjoint())) <= 1e-8);
    }

    #[test]
    fn null_component_leaves_product_unchanged() {
        let book = book16();
        let c = random_psd(8, 3, 8);
        let p = params(1, vec![1.0, 0.5, 0.25, 0.0], 2);
        let q0 = design_q_rank_deficient(&c, 3, &p, &book, NullComponent::Zero).unwrap();
        let q1 = design_q_rank_deficient(&c, 3, &p, &book, NullComponent::Random { seed: 4, scale: 1.0 }).unwrap();
        assert!(frobenius_distance(&q0, &q1) > 0.1);
        let b0 = q0.adjoint() * c.as_matrix() * &q0;
        let b1 = q1.adjoint() * c.as_matrix() * &q1;
        assert!(frobenius_distance(&b0, &b1) <= 1e-10 * b0.norm().max(1.0));
    }

    #[test]
    fn rank_above_ports() {
        let book = book16();
        let c = random_psd(8, 5, 13);
        let p = params(11, vec![1.0, 0.8, 0.6, 0.3], 6);
        let q = design_q_rank_deficient(&c, 5, &p, &book, NullComponent::Zero).unwrap();
        assert!(residual(&c, &q, &build_target_r(&p, &book).unwrap()) <= 1e-8);
        let zeroed = params(11, vec![1.0, 0.8, 0.0, 0.0], 6);
        assert!(matches!(
            design_q_rank_deficient(&c, 5, &zeroed, &book, NullComponent::Zero),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn target_rank_too_large() {
        let c = random_psd(8, 2, 3);
        let err = design_q_rank_deficient(&c, 2, &params(0, vec![1.0; 4], 0), &book16(), NullComponent::Zero);
        assert!(matches!(err, Err(Error::InfeasibleTarget { target_rank: 4, rank: 2 })));
    }

    /// Block form: top K rows `([U₁ᴴ]_{:,1:K})^{-1} Λ₁^{-1/2} U₁ᴴ F`, zeros below.
    fn block_form(c: &HermitianMatrix, k: usize, f: &ComplexMatrix) -> ComplexMatrix {
        let eig = hermitian_eig(c);
        let u1h = eig.eigenvectors.columns(0, k).adjoint();
        let lead = u1h.columns(0, k).into_owned();
        let lead_inv = lead.try_inverse().expect("leading block invertible");
        let mut right = &u1h * f;
        for i in 0..k {
            right.row_mut(i).scale_mut(1.0 / eig.eigenvalues[i].sqrt());
        }
        let top = lead_inv * right;
        let mut q = ComplexMatrix::zeros(c.dim(), f.ncols());
        q.view_mut((0, 0), (k, f.ncols())).copy_from(&top);
        q
    }

    #[test]
    fn agrees_with_block_form_up_to_null_space() {
        let book = book16();
        let c = random_psd(8, 3, 40);
        let p = params(4, vec![1.0, 0.9, 0.5, 0.0], 8);
        let q = design_q_rank_deficient(&c, 3, &p, &book, NullComponent::Zero).unwrap();
        let eig = hermitian_eig(&c);
        let sqrt_c = eig.reconstruct_with(3, f64::sqrt);
        // F = Ĉ^{1/2} Q recovers U₁B
        let f = &sqrt_c * &q;
        let qb = block_form(&c, 3, &f);
        let r = build_target_r(&p, &book).unwrap();
        assert!(residual(&c, &qb, &r) <= 1e-8);
        assert!((&sqrt_c * (&qb - &q)).norm() <= 1e-8 * q.norm());
    }

    #[test]
    fn cut_isotropic_bound() {
        let book = book16();
        let c = random_psd(8, 8, 3);
        let p = params(5, vec![1.0; 4], 1);
        let q = design_q_full_rank(&c, &p, &book, DEFAULT_RANK_TOL).unwrap();
        let rep = validate_cut(&c, &q, &p, &book).unwrap();
        assert!((rep.target_value - 1.0).abs() < 1e-9);
        assert!(rep.max_other_value <= 1.0 + 1e-9);
        assert!(rep.satisfies_cut);
        assert!(!rep.cut_is_proper);
    }

    #[test]
    fn cut_strict_schedule_predicts_m_prime() {
        let book = book16();
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for t in 0..30 {
            let c = random_psd(8, 8, 100 + t);
            let p = params(rng.random_range(0..book.len()), SigmaSchedule::strict().sigmas(4), t);
            let q = design_q_full_rank(&c, &p, &book, DEFAULT_RANK_TOL).unwrap();
            let rep = validate_cut(&c, &q, &p, &book).unwrap();
            // exhaustive oracle over the codebook
            let rc = q.adjoint() * c.as_matrix() * &q;
            let vals: Vec<f64> = book.iter().map(|v| (v.adjoint() * &rc * v)[(0, 0)].re).collect();
            let best = (0..vals.len()).fold(0, |b, m| if vals[m] > vals[b] { m } else { b });
            assert_eq!(best, p.m_prime);
            assert_eq!(rep.predicted_pmi, p.m_prime);
            assert!(rep.cut_is_proper);
        }
    }

    #[test]
    fn cut_zero_weighting_is_degenerate() {
        let book = book16();
        let rep = validate_cut(
            &HermitianMatrix::identity(8),
            &ComplexMatrix::zeros(8, 4),
            &params(0, vec![1.0; 4], 0),
            &book,
        )
        .unwrap();
        assert!(rep.degenerate);
        assert!(!rep.cut_is_proper);
    }

    #[test]
    fn design_cut_branches() {
        let book = book16();
        let full = design_cut(&random_psd(8, 8, 1), &params(2, vec![1.0; 4], 1), &book, DEFAULT_RANK_TOL, NullComponent::Zero)
            .unwrap();
        assert_eq!(full.branch, CutBranch::FullRank);
        let low = design_cut(&random_psd(8, 2, 1), &params(2, vec![1.0; 4], 1), &book, DEFAULT_RANK_TOL, NullComponent::Zero)
            .unwrap();
        assert_eq!(low.branch, CutBranch::RankDeficient);
        assert_eq!(low.rank, 2);
        assert!(low.report.satisfies_cut);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn multiply_back_all_ranks(k in 1usize..=8, seed in any::<u64>(), m in 0usize..16) {
            let book = book16();
            let c = random_psd(8, k, seed);
            let mut sig: Vec<f64> = {
                let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 1);
                let mut s: Vec<f64> = (0..4).map(|_| rng.random_range(0.1..2.0)).collect();
                s.sort_by(|a, b| b.total_cmp(a));
                s
            };
            if k <= 4 {
                sig = truncate_sigmas(&sig, k);
            }
            let p = params(m, sig, seed);
            let r = build_target_r(&p, &book).unwrap();
            let q = if k == 8 {
                design_q_full_rank(&c, &p, &book, DEFAULT_RANK_TOL).unwrap()
            } else {
                design_q_rank_deficient(&c, k, &p, &book, NullComponent::Random { seed, scale: 0.5 }).unwrap()
            };
            prop_assert!(residual(&c, &q, &r) <= 1e-8);
        }

        #[test]
        fn different_unitaries_both_valid(seed in any::<u64>()) {
            let book = book16();
            let c = random_psd(8, 8, seed);
            let mut p = params(3, vec![1.0, 0.9, 0.8, 0.7], seed);
            let r = build_target_r(&p, &book).unwrap();
            let q1 = design_q_full_rank(&c, &p, &book, DEFAULT_RANK_TOL).unwrap();
            p.unitary_seed = p.unitary_seed.wrapping_add(1);
            let q2 = design_q_full_rank(&c, &p, &book, DEFAULT_RANK_TOL).unwrap();
            prop_assert!(frobenius_distance(&q1, &q2) > 1e-6);
            prop_assert!(residual(&c, &q1, &r) <= 1e-8);
            prop_assert!(residual(&c, &q2, &r) <= 1e-8);
        }
    }
}
