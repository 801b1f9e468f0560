//! Analytic-center estimation of the channel covariance.
//!
//! Given the feedback collected so far, the center `Ĉ` maximizes
//!
//! ```text
//! Σ_i Σ_{m≠m0(i)} (1/η_i) log s_im(C) + log det C + sign·λ·tr C
//!     + log(b - tr C) [+ log(tr C - a)]
//! ```
//!
//! subject to the CQI equalities `w_iᴴ C w_i = η_i` with `w_i = Q(i) v_{m0(i)}`,
//! where `s_im(C) = w_iᴴ C w_i - (Q(i) v_m)ᴴ C (Q(i) v_m)`. The nuclear norm is
//! taken as `tr C`, which it equals on the positive definite iterates.
//!
//! Hermitian matrices are handled in the isometric real coordinates of
//! [`hvec`]. Equalities are eliminated by restricting to their affine solution
//! set, a phase-I problem supplies a strictly feasible start, and damped Newton
//! ascent with backtracking finds the center.

mod barrier;
pub mod hvec;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::codebook::Codebook;
use crate::error::{Error, Result};
use crate::feedback::FeedbackRecord;
use crate::matcore::{hermitian_eig, null_space_basis, HermitianMatrix};
use barrier::{logdet_and_inverse, BarrierProgram, IterRecord, NewtonOptions};
use hvec::{hmat, hvec, identity_hvec};

/// Sign applied to `λ·‖C‖_*` in the objective.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegSign {
    /// `-λ tr C`: penalize the trace, favoring low rank.
    #[default]
    PromoteLowRank,
    /// `+λ tr C`.
    AsPrinted,
}

impl RegSign {
    pub fn sign(self) -> f64 {
        match self {
            RegSign::PromoteLowRank => -1.0,
            RegSign::AsPrinted => 1.0,
        }
    }
}

/// How CQI feedback constrains the estimate.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EqualityMode {
    /// `w_iᴴ C w_i = η_i` exactly.
    #[default]
    Exact,
    /// `|w_iᴴ C w_i - η_i| < width`, enforced with two log barriers. Intended
    /// for quantized CQI; not validated against a reference.
    Relaxed { width: f64 },
}

#[derive(Debug, Clone)]
pub struct CenterProblem<'a> {
    pub dim: usize,
    pub records: Vec<FeedbackRecord>,
    pub codebook: &'a Codebook,
    /// Lower trace bound `a`; `f64::NEG_INFINITY` disables its barrier.
    pub trace_lower: f64,
    pub trace_upper: f64,
    pub lambda: f64,
    pub reg_sign: RegSign,
    pub equality_mode: EqualityMode,
}

impl<'a> CenterProblem<'a> {
    /// Problem with no records, `a = -∞`, `λ = 1` and the low-rank sign.
    pub fn new(dim: usize, codebook: &'a Codebook, trace_upper: f64) -> Self {
        Self {
            dim,
            records: Vec::new(),
            codebook,
            trace_lower: f64::NEG_INFINITY,
            trace_upper,
            lambda: 1.0,
            reg_sign: RegSign::default(),
            equality_mode: EqualityMode::default(),
        }
    }

    pub fn with_lambda(mut self, lambda: f64) -> Self {
        self.lambda = lambda;
        self
    }

    pub fn with_records(mut self, records: Vec<FeedbackRecord>) -> Self {
        self.records = records;
        self
    }

    pub fn push(&mut self, record: FeedbackRecord) {
        self.records.push(record);
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(Error::Config("center problem dimension must be positive".into()));
        }
        if !self.trace_upper.is_finite() || !(self.trace_lower < self.trace_upper) {
            return Err(Error::Config(format!(
                "trace bounds must satisfy a < b with finite b (a = {}, b = {})",
                self.trace_lower, self.trace_upper
            )));
        }
        if !(self.lambda >= 0.0) || !self.lambda.is_finite() {
            return Err(Error::Config(format!("lambda must be finite and >= 0, got {}", self.lambda)));
        }
        if let EqualityMode::Relaxed { width } = self.equality_mode {
            if !(width > 0.0) {
                return Err(Error::Config("relaxed CQI width must be positive".into()));
            }
        }
        for r in &self.records {
            if r.weighting.nrows() != self.dim || r.weighting.ncols() != self.codebook.port_count() {
                return Err(Error::DimensionMismatch(format!(
                    "record {} weighting is {}x{}, expected {}x{}",
                    r.round,
                    r.weighting.nrows(),
                    r.weighting.ncols(),
                    self.dim,
                    self.codebook.port_count()
                )));
            }
            if r.pmi >= self.codebook.len() {
                return Err(Error::Config(format!("record {} has PMI {} out of range", r.round, r.pmi)));
            }
            if !(r.cqi >= 0.0) || !r.cqi.is_finite() {
                return Err(Error::Config(format!("record {} has invalid CQI {}", r.round, r.cqi)));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub tol: f64,
    pub max_iters: usize,
    /// Backtracking step shrink factor.
    pub shrink: f64,
    /// Armijo sufficient-increase slope.
    pub armijo: f64,
    pub record_trace: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol: 1e-7,
            max_iters: 200,
            shrink: 0.5,
            armijo: 0.01,
            record_trace: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverPhase {
    PhaseOne,
    Center,
}

/// One row of the optional solver trace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverTraceRow {
    pub phase: SolverPhase,
    pub iteration: usize,
    pub objective: f64,
    pub grad_norm: f64,
    pub step: f64,
}

#[derive(Debug, Clone)]
pub struct CenterSolution {
    pub estimate: HermitianMatrix,
    pub objective: f64,
    /// Norm of the gradient projected onto the equality subspace.
    pub kkt_residual: f64,
    pub iterations: usize,
    pub phase_one_iterations: usize,
    /// Smallest cut or trace-bound slack at the estimate.
    pub min_slack: f64,
    /// Largest `|w_iᴴ Ĉ w_i - η_i|` over the records.
    pub equality_residual: f64,
    pub converged: bool,
    pub trace: Vec<SolverTraceRow>,
}

/// Log barrier `weight·log(g·x + h)` in full Hermitian coordinates.
#[derive(Debug, Clone)]
struct LinearBarrier {
    g: DVector<f64>,
    h: f64,
    weight: f64,
}

struct Compiled {
    n: usize,
    barriers: Vec<LinearBarrier>,
    /// Unit-norm equality rows and matching right-hand sides.
    eq_rows: Vec<DVector<f64>>,
    eq_rhs: Vec<f64>,
    linear: DVector<f64>,
}

fn compile(prob: &CenterProblem<'_>) -> Result<Compiled> {
    prob.validate()?;
    let n = prob.dim;
    let e = identity_hvec(n);
    let mut barriers = Vec::new();
    let mut eq_rows = Vec::new();
    let mut eq_rhs = Vec::new();

    for rec in &prob.records {
        let w0 = &rec.weighting * prob.codebook.codeword(rec.pmi);
        let a = hvec(&(&w0 * w0.adjoint()));
        let a_norm = a.norm();
        match prob.equality_mode {
            EqualityMode::Exact => {
                if !(rec.cqi > 0.0) {
                    return Err(Error::InfeasibleProblem(format!(
                        "round {} reports zero CQI, which leaves no positive definite estimate",
                        rec.round
                    )));
                }
                eq_rows.push(&a / a_norm);
                eq_rhs.push(rec.cqi / a_norm);
            }
            EqualityMode::Relaxed { width } => {
                barriers.push(LinearBarrier {
                    g: a.clone(),
                    h: width - rec.cqi,
                    weight: 1.0,
                });
                barriers.push(LinearBarrier {
                    g: -a.clone(),
                    h: rec.cqi + width,
                    weight: 1.0,
                });
            }
        }
        let weight = 1.0 / rec.cqi.max(f64::MIN_POSITIVE);
        for (m, v) in prob.codebook.iter().enumerate() {
            if m == rec.pmi || prob.codebook.is_parallel(m, rec.pmi) {
                continue;
            }
            let wm = &rec.weighting * v;
            let g = &a - hvec(&(&wm * wm.adjoint()));
            // a cut that vanishes identically carries no information
            if g.norm() <= 1e-14 * a_norm.max(f64::MIN_POSITIVE) {
                continue;
            }
            barriers.push(LinearBarrier { g, h: 0.0, weight });
        }
    }

    barriers.push(LinearBarrier {
        g: -e.clone(),
        h: prob.trace_upper,
        weight: 1.0,
    });
    if prob.trace_lower.is_finite() {
        barriers.push(LinearBarrier {
            g: e.clone(),
            h: -prob.trace_lower,
            weight: 1.0,
        });
    }
    Ok(Compiled {
        n,
        barriers,
        eq_rows,
        eq_rhs,
        linear: e * (prob.reg_sign.sign() * prob.lambda),
    })
}

impl Compiled {
    fn len(&self) -> usize {
        self.n * self.n
    }

    fn slack(&self, b: &LinearBarrier, x: &DVector<f64>) -> f64 {
        b.g.dot(x) + b.h
    }

    /// Affine parameterization `x = x0 + Z y` of the equality solution set,
    /// with `x0` the projection of `init`.
    fn affine(&self, init: &DVector<f64>) -> Result<(DVector<f64>, DMatrix<f64>)> {
        let len = self.len();
        if self.eq_rows.is_empty() {
            return Ok((init.clone(), DMatrix::identity(len, len)));
        }
        let p = self.eq_rows.len();
        let a = DMatrix::from_fn(p, len, |i, j| self.eq_rows[i][j]);
        let rhs = DVector::from_column_slice(&self.eq_rhs);
        let svd = a.clone().svd(true, true);
        let (u, v_t) = (svd.u.as_ref().expect("u"), svd.v_t.as_ref().expect("v_t"));
        let smax = svd.singular_values.max();
        let tol = 1e-10 * smax.max(1.0);
        let resid = &rhs - &a * init;
        let mut x0 = init.clone();
        for k in 0..svd.singular_values.len() {
            let s = svd.singular_values[k];
            if s > tol {
                let coef = u.column(k).dot(&resid) / s;
                x0 += v_t.row(k).transpose() * coef;
            }
        }
        let viol = (&a * &x0 - &rhs).amax();
        if viol > 1e-9 * rhs.amax().max(1.0) {
            return Err(Error::InfeasibleProblem(format!(
                "CQI equalities are inconsistent (residual {viol:e})"
            )));
        }
        Ok((x0, null_space_basis(&a, tol)))
    }

    fn strictly_feasible(&self, x: &DVector<f64>) -> bool {
        self.barriers.iter().all(|b| self.slack(b, x) > 0.0)
            && logdet_and_inverse(&hmat(x, self.n)).is_some()
    }

    fn program(&self, x0: &DVector<f64>, z: &DMatrix<f64>) -> BarrierProgram {
        let k = self.barriers.len();
        let rows = DMatrix::from_fn(k, z.ncols(), |i, j| self.barriers[i].g.dot(&z.column(j)));
        let offsets = DVector::from_fn(k, |i, _| self.slack(&self.barriers[i], x0));
        let weights = DVector::from_fn(k, |i, _| self.barriers[i].weight);
        BarrierProgram::new(self.n, x0.clone(), z.clone(), rows, offsets, weights, z.transpose() * &self.linear)
    }

    /// Phase I: maximize `τ` subject to `s̄_k(x) > τ` (unit-normalized slacks)
    /// and `C - τI ≻ 0` over the equality subspace, stopping once `τ > 0`.
    fn phase_one(
        &self,
        x0: &DVector<f64>,
        z: &DMatrix<f64>,
        trace: &mut Vec<SolverTraceRow>,
        record: bool,
    ) -> Result<(DVector<f64>, usize)> {
        let r = z.ncols();
        if self.strictly_feasible(x0) {
            return Ok((DVector::zeros(r), 0));
        }
        let len = self.len();
        let e = identity_hvec(self.n);
        let mut map = DMatrix::zeros(len, r + 1);
        map.view_mut((0, 0), (len, r)).copy_from(z);
        map.set_column(r, &(-&e));

        let k = self.barriers.len();
        let mut rows = DMatrix::zeros(k, r + 1);
        let mut offsets = DVector::zeros(k);
        for (i, b) in self.barriers.iter().enumerate() {
            let gn = b.g.norm();
            for j in 0..r {
                rows[(i, j)] = b.g.dot(&z.column(j)) / gn;
            }
            rows[(i, r)] = -1.0;
            offsets[i] = self.slack(b, x0) / gn;
        }
        let min_slack = (0..k).map(|i| offsets[i]).fold(f64::INFINITY, f64::min);
        let c0 = HermitianMatrix::from_symmetrized(hmat(x0, self.n));
        let min_eig = hermitian_eig(&c0).eigenvalues.last().copied().unwrap_or(0.0);
        let worst = min_slack.min(min_eig);
        let scale = (self.barriers.last().map(|b| b.h.abs()).unwrap_or(1.0) / self.n as f64).max(1e-12);
        let tau0 = worst - (0.5 * worst.abs()).max(1e-3 * scale);

        let mut zext = DVector::zeros(r + 1);
        zext[r] = tau0;
        let barrier_count = (k + self.n) as f64;
        let opts = NewtonOptions {
            tol: 1e-9,
            max_iters: 100,
            armijo: 0.01,
            shrink: 0.5,
        };
        let mut weight = 1.0 / scale;
        let mut total = 0;
        for _ in 0..40 {
            let mut linear = DVector::zeros(r + 1);
            linear[r] = weight;
            let prog = BarrierProgram::new(
                self.n,
                x0.clone(),
                map.clone(),
                rows.clone(),
                offsets.clone(),
                DVector::from_element(k, 1.0),
                linear,
            );
            let mut iters = Vec::new();
            let out = prog
                .maximize(zext.clone(), &opts, |zz| zz[r] > 0.0, record.then_some(&mut iters))
                .ok_or_else(|| Error::InfeasibleProblem("phase I left its domain".into()))?;
            total += out.iterations;
            if record {
                trace.extend(iters.into_iter().map(|it| row(SolverPhase::PhaseOne, it)));
            }
            zext = out.z;
            let tau = zext[r];
            if out.stopped_early || tau > 0.0 {
                return Ok((zext.rows(0, r).into_owned(), total));
            }
            let gap = barrier_count / weight;
            if tau + gap <= 0.0 || gap < 1e-13 * scale {
                return Err(Error::InfeasibleProblem(format!(
                    "phase I certifies an empty interior (max-min slack <= {:e})",
                    tau + gap
                )));
            }
            weight *= 10.0;
        }
        Err(Error::InfeasibleProblem("phase I did not reach a strictly feasible point".into()))
    }

    fn evaluate(&self, x: &DVector<f64>) -> Result<(f64, DVector<f64>)> {
        let (logdet, inv) = logdet_and_inverse(&hmat(x, self.n))
            .ok_or_else(|| Error::InfeasibleEvaluation("estimate is not positive definite".into()))?;
        let mut value = logdet + self.linear.dot(x);
        let mut grad = hvec(&inv) + &self.linear;
        for b in &self.barriers {
            let s = self.slack(b, x);
            if !(s > 0.0) {
                return Err(Error::InfeasibleEvaluation(format!("barrier slack {s:e} is not positive")));
            }
            value += b.weight * s.ln();
            grad += &b.g * (b.weight / s);
        }
        Ok((value, grad))
    }
}

fn row(phase: SolverPhase, it: IterRecord) -> SolverTraceRow {
    SolverTraceRow {
        phase,
        iteration: it.iteration,
        objective: it.objective,
        grad_norm: it.grad_norm,
        step: it.step,
    }
}

/// Objective value and its Hermitian gradient (with respect to the trace inner
/// product) at a strictly feasible `c`. Equalities are not checked.
pub fn evaluate_center_objective(c: &HermitianMatrix, prob: &CenterProblem<'_>) -> Result<(f64, HermitianMatrix)> {
    if c.dim() != prob.dim {
        return Err(Error::DimensionMismatch(format!(
            "matrix is {}x{}, problem dimension {}",
            c.dim(),
            c.dim(),
            prob.dim
        )));
    }
    let compiled = compile(prob)?;
    let (value, grad) = compiled.evaluate(&hvec(c.as_matrix()))?;
    Ok((value, HermitianMatrix::from_symmetrized(hmat(&grad, prob.dim))))
}

fn default_init(prob: &CenterProblem<'_>) -> HermitianMatrix {
    let n = prob.dim;
    let level = if prob.trace_lower.is_finite() {
        0.5 * (prob.trace_lower.max(0.0) + prob.trace_upper) / n as f64
    } else {
        prob.trace_upper / (2.0 * n as f64)
    };
    HermitianMatrix::identity(n).scaled(level)
}

/// Strictly feasible point: the projection of `init` (default `(b/2N)·I`) onto
/// the equality subspace, moved into the interior by phase I when needed.
pub fn find_feasible_start(prob: &CenterProblem<'_>, init: Option<&HermitianMatrix>) -> Result<HermitianMatrix> {
    let compiled = compile(prob)?;
    let init = init.cloned().unwrap_or_else(|| default_init(prob));
    let (x0, z) = compiled.affine(&hvec(init.as_matrix()))?;
    let (y, _) = compiled.phase_one(&x0, &z, &mut Vec::new(), false)?;
    let x = &x0 + &z * y;
    Ok(HermitianMatrix::from_symmetrized(hmat(&x, prob.dim)).assume_psd())
}

pub fn solve_center(prob: &CenterProblem<'_>, opts: &SolverOptions) -> Result<CenterSolution> {
    solve_center_from(prob, opts, None)
}

/// As [`solve_center`], projecting `init` (e.g. the previous center) instead of
/// the scaled identity to start phase I.
pub fn solve_center_from(
    prob: &CenterProblem<'_>,
    opts: &SolverOptions,
    init: Option<&HermitianMatrix>,
) -> Result<CenterSolution> {
    let compiled = compile(prob)?;
    let init = init.cloned().unwrap_or_else(|| default_init(prob));
    let (x0, z) = compiled.affine(&hvec(init.as_matrix()))?;
    let mut trace = Vec::new();
    let (y_start, phase_one_iterations) = compiled.phase_one(&x0, &z, &mut trace, opts.record_trace)?;

    // re-anchor at the feasible start so reduced coordinates begin at zero
    let x_start = &x0 + &z * &y_start;
    let program = compiled.program(&x_start, &z);
    let newton = NewtonOptions {
        tol: opts.tol,
        max_iters: opts.max_iters,
        armijo: opts.armijo,
        shrink: opts.shrink,
    };
    let mut iters = Vec::new();
    let out = program
        .maximize(DVector::zeros(z.ncols()), &newton, |_| false, opts.record_trace.then_some(&mut iters))
        .ok_or_else(|| Error::InfeasibleProblem("feasible start rejected by the center objective".into()))?;
    trace.extend(iters.into_iter().map(|it| row(SolverPhase::Center, it)));

    let x = program.full_coords(&out.z);
    let (objective, _) = compiled.evaluate(&x)?;
    let estimate = HermitianMatrix::from_symmetrized(hmat(&x, prob.dim)).assume_psd();
    let min_slack = compiled
        .barriers
        .iter()
        .map(|b| compiled.slack(b, &x))
        .fold(f64::INFINITY, f64::min);
    let equality_residual = prob
        .records
        .iter()
        .map(|r| {
            let w0 = &r.weighting * prob.codebook.codeword(r.pmi);
            (estimate.quadratic_form(&w0) - r.cqi).abs()
        })
        .fold(0.0, f64::max);
    Ok(CenterSolution {
        estimate,
        objective,
        kkt_residual: out.grad_norm,
        iterations: out.iterations,
        phase_one_iterations,
        min_slack,
        equality_residual,
        converged: out.converged,
        trace,
    })
}
