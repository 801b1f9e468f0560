//! Damped Newton ascent for log-barrier programs of the form
//!
//! ```text
//! maximize  Σ_k w_k log(a_k·z + b_k) + log det C(z) + c·z,
//! C(z) = hmat(x0 + M z)
//! ```
//!
//! Both the analytic-center problem (in equality-reduced coordinates) and its
//! phase-I feasibility problem are instances.

use nalgebra::{Cholesky, DMatrix, DVector};

use super::hvec::{hmat, hvec};
use crate::matcore::ComplexMatrix;
use num_complex::Complex64;

pub(crate) struct BarrierProgram {
    pub n: usize,
    pub x0: DVector<f64>,
    pub map: DMatrix<f64>,
    pub rows: DMatrix<f64>,
    pub offsets: DVector<f64>,
    pub weights: DVector<f64>,
    pub linear: DVector<f64>,
    map_mats: Vec<ComplexMatrix>,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct NewtonOptions {
    pub tol: f64,
    pub max_iters: usize,
    pub armijo: f64,
    pub shrink: f64,
}

#[derive(Debug, Clone)]
pub(crate) struct NewtonOutcome {
    pub z: DVector<f64>,
    pub grad_norm: f64,
    pub iterations: usize,
    pub converged: bool,
    pub stopped_early: bool,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct IterRecord {
    pub iteration: usize,
    pub objective: f64,
    pub grad_norm: f64,
    pub step: f64,
}

struct Derivatives {
    value: f64,
    grad: DVector<f64>,
    /// Negated Hessian (positive definite).
    neg_hess: DMatrix<f64>,
}

/// `log det A` and `A^{-1}` for Hermitian positive definite `A`, or `None`
/// when a Cholesky pivot is not strictly positive.
pub(crate) fn logdet_and_inverse(a: &ComplexMatrix) -> Option<(f64, ComplexMatrix)> {
    // nalgebra's complex Cholesky takes complex square roots of negative
    // pivots instead of failing, so the factorization is done here
    let n = a.nrows();
    let mut l = ComplexMatrix::zeros(n, n);
    let mut logdet = 0.0;
    for j in 0..n {
        let mut d = a[(j, j)].re;
        for k in 0..j {
            d -= l[(j, k)].norm_sqr();
        }
        if !(d > 0.0) || !d.is_finite() {
            return None;
        }
        let djj = d.sqrt();
        l[(j, j)] = Complex64::new(djj, 0.0);
        logdet += 2.0 * djj.ln();
        for i in j + 1..n {
            let mut v = a[(i, j)];
            for k in 0..j {
                v -= l[(i, k)] * l[(j, k)].conj();
            }
            l[(i, j)] = v / djj;
        }
    }
    Some((logdet, Cholesky::pack_dirty(l).inverse()))
}

impl BarrierProgram {
    pub fn new(
        n: usize,
        x0: DVector<f64>,
        map: DMatrix<f64>,
        rows: DMatrix<f64>,
        offsets: DVector<f64>,
        weights: DVector<f64>,
        linear: DVector<f64>,
    ) -> Self {
        let map_mats = (0..map.ncols())
            .map(|j| hmat(&map.column(j).into_owned(), n))
            .collect();
        Self {
            n,
            x0,
            map,
            rows,
            offsets,
            weights,
            linear,
            map_mats,
        }
    }

    pub fn dim(&self) -> usize {
        self.map.ncols()
    }

    pub fn full_coords(&self, z: &DVector<f64>) -> DVector<f64> {
        &self.x0 + &self.map * z
    }

    pub fn matrix_at(&self, z: &DVector<f64>) -> ComplexMatrix {
        hmat(&self.full_coords(z), self.n)
    }

    pub fn slacks(&self, z: &DVector<f64>) -> DVector<f64> {
        &self.rows * z + &self.offsets
    }

    /// Objective value, or `None` outside the strict domain.
    pub fn value(&self, z: &DVector<f64>) -> Option<f64> {
        let s = self.slacks(z);
        if s.iter().any(|&v| !(v > 0.0)) {
            return None;
        }
        let (logdet, _) = logdet_and_inverse(&self.matrix_at(z))?;
        let barrier: f64 = s.iter().zip(self.weights.iter()).map(|(s, w)| w * s.ln()).sum();
        Some(barrier + logdet + self.linear.dot(z))
    }

    fn derivatives(&self, z: &DVector<f64>) -> Option<Derivatives> {
        let s = self.slacks(z);
        if s.iter().any(|&v| !(v > 0.0)) {
            return None;
        }
        let (logdet, w_inv) = logdet_and_inverse(&self.matrix_at(z))?;
        let d = self.dim();

        let inv_s = s.map(|v| 1.0 / v);
        let ws = self.weights.component_mul(&inv_s);
        let wss = ws.component_mul(&inv_s);
        let value = s.iter().zip(self.weights.iter()).map(|(s, w)| w * s.ln()).sum::<f64>()
            + logdet
            + self.linear.dot(z);

        let grad = self.map.transpose() * hvec(&w_inv) + self.rows.transpose() * &ws + &self.linear;
        if grad.iter().any(|g| !g.is_finite()) {
            return None;
        }

        // logdet curvature: columns hvec(W M_j W)
        let mut curv = DMatrix::<f64>::zeros(self.map.nrows(), d);
        for (j, mj) in self.map_mats.iter().enumerate() {
            let t = &w_inv * mj * &w_inv;
            curv.set_column(j, &hvec(&t));
        }
        let mut neg_hess = self.map.transpose() * curv;
        let mut scaled_rows = self.rows.clone();
        for (k, mut row) in scaled_rows.row_iter_mut().enumerate() {
            row *= wss[k].sqrt();
        }
        neg_hess += scaled_rows.transpose() * &scaled_rows;
        // symmetrize against rounding
        neg_hess = (&neg_hess + neg_hess.transpose()) * 0.5;
        Some(Derivatives {
            value,
            grad,
            neg_hess,
        })
    }

    /// Newton ascent from a strictly feasible `z`. `early_stop` is checked
    /// after every accepted step; returning true ends the run.
    pub fn maximize(
        &self,
        mut z: DVector<f64>,
        opts: &NewtonOptions,
        mut early_stop: impl FnMut(&DVector<f64>) -> bool,
        mut trace: Option<&mut Vec<IterRecord>>,
    ) -> Option<NewtonOutcome> {
        let mut der = self.derivatives(&z)?;
        let mut iterations = 0;
        let mut converged = false;
        let mut stopped_early = false;
        if let Some(t) = trace.as_deref_mut() {
            t.push(IterRecord {
                iteration: 0,
                objective: der.value,
                grad_norm: der.grad.norm(),
                step: 0.0,
            });
        }
        while iterations < opts.max_iters {
            if der.grad.norm() <= opts.tol {
                converged = true;
                break;
            }
            let dz = solve_spd(&der.neg_hess, &der.grad);
            let dec2 = der.grad.dot(&dz).max(0.0);

            // rounding allowance so the final quadratic-convergence steps are not rejected
            let slack = 1e-13 * der.value.abs().max(1.0);
            let mut step = 1.0;
            let mut accepted = None;
            while step > 1e-16 {
                let cand = &z + &dz * step;
                if let Some(v) = self.value(&cand) {
                    if v >= der.value + opts.armijo * step * dec2 - slack {
                        accepted = Some(cand);
                        break;
                    }
                }
                step *= opts.shrink;
            }
            let Some(next) = accepted else {
                // no ascent possible at working precision
                converged = dec2.sqrt() <= opts.tol;
                break;
            };
            z = next;
            iterations += 1;
            der = self.derivatives(&z)?;
            if let Some(t) = trace.as_deref_mut() {
                t.push(IterRecord {
                    iteration: iterations,
                    objective: der.value,
                    grad_norm: der.grad.norm(),
                    step,
                });
            }
            if early_stop(&z) {
                stopped_early = true;
                break;
            }
            if dec2.sqrt() <= opts.tol {
                converged = true;
                break;
            }
        }
        if !converged && der.grad.norm() <= opts.tol {
            converged = true;
        }
        Some(NewtonOutcome {
            grad_norm: der.grad.norm(),
            z,
            iterations,
            converged,
            stopped_early,
        })
    }
}

/// Solve `A x = b` for symmetric positive definite `A`, adding diagonal
/// regularization if the factorization fails.
fn solve_spd(a: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    if let Some(ch) = Cholesky::new(a.clone()) {
        return ch.solve(b);
    }
    let d = a.nrows();
    let scale = (a.trace() / d.max(1) as f64).abs().max(1e-300);
    let mut reg = 1e-14 * scale;
    loop {
        let shifted = a + DMatrix::<f64>::identity(d, d) * reg;
        if let Some(ch) = Cholesky::new(shifted) {
            return ch.solve(b);
        }
        reg *= 10.0;
        if reg > 1e6 * scale {
            return b.clone() / scale;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::center::hvec::{hvec_len, identity_hvec};

    #[test]
    fn logdet_of_diagonal() {
        let a = ComplexMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            num_complex::Complex64::new(2.0, 0.0),
            num_complex::Complex64::new(3.0, 0.0),
        ]));
        let (ld, inv) = logdet_and_inverse(&a).unwrap();
        assert!((ld - 6f64.ln()).abs() < 1e-14);
        assert!((inv[(1, 1)].re - 1.0 / 3.0).abs() < 1e-14);
        let neg = -a;
        assert!(logdet_and_inverse(&neg).is_none());
    }

    #[test]
    fn maximizes_logdet_with_trace_barrier() {
        // log det C + log(b - tr C) over 2x2 Hermitian: optimum b/3 · I
        let n = 2;
        let len = hvec_len(n);
        let e = identity_hvec(n);
        let b = 2.0;
        let prog = BarrierProgram::new(
            n,
            DVector::zeros(len),
            DMatrix::identity(len, len),
            DMatrix::from_row_slice(1, len, (-&e).as_slice()),
            DVector::from_element(1, b),
            DVector::from_element(1, 1.0),
            DVector::zeros(len),
        );
        let z0 = &e * 0.5;
        let opts = NewtonOptions {
            tol: 1e-10,
            max_iters: 100,
            armijo: 0.01,
            shrink: 0.5,
        };
        let out = prog.maximize(z0, &opts, |_| false, None).unwrap();
        assert!(out.converged);
        let c = prog.matrix_at(&out.z);
        assert!((c[(0, 0)].re - 2.0 / 3.0).abs() < 1e-9);
        assert!((c[(1, 1)].re - 2.0 / 3.0).abs() < 1e-9);
        assert!(c[(0, 1)].norm() < 1e-9);
    }
}
