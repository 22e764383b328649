//! Simplified QMR for symmetric indefinite systems with a symmetric
//! indefinite preconditioner.
//!
//! Coupled two-term recurrences of the preconditioned symmetric Lanczos
//! process with the preconditioner applied as a whole, so the recurrence only
//! needs `K q` and `M^{-1} r` per step. Convergence is never declared from the
//! quasi-residual alone: when it passes the gate (or every
//! `true_residual_period` steps) the true residual `||rhs - K x|| / ||rhs||`
//! is recomputed and must itself be at most `eta`.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::kkt::relative_residual;
use crate::ldl::MultilevelFactorization;
use crate::sparse::SymLowerMatrix;
use crate::vec_ops::{dot, norm2};

const BREAKDOWN: f64 = 1e-14;

#[derive(Clone, Debug, PartialEq)]
pub struct SqmrParams {
    /// Target relative residual, in `(0, 1)`.
    pub eta: f64,
    pub max_iters: usize,
    pub true_residual_period: usize,
}

impl Default for SqmrParams {
    fn default() -> Self {
        SqmrParams {
            eta: 0.1,
            max_iters: 1000,
            true_residual_period: 10,
        }
    }
}

impl SqmrParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.eta > 0.0 && self.eta < 1.0) {
            return Err(Error::Data("eta must lie in (0, 1)"));
        }
        if self.max_iters < 1 || self.true_residual_period < 1 {
            return Err(Error::Data(
                "max_iters and true_residual_period must be positive",
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SqmrStatus {
    Converged,
    MaxIters,
    Breakdown,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SqmrOutcome {
    pub solution: Vec<f64>,
    pub iterations: usize,
    /// True relative residual of `solution`.
    pub relres: f64,
    pub status: SqmrStatus,
}

/// Solves `K x = rhs` from a zero initial guess.
pub fn sqmr_solve(
    k: &SymLowerMatrix,
    m: &MultilevelFactorization,
    rhs: &[f64],
    p: &SqmrParams,
) -> Result<SqmrOutcome> {
    sqmr_solve_from(k, m, rhs, None, p)
}

/// Solves `K x = rhs` starting from `x0` (zero when `None`).
pub fn sqmr_solve_from(
    k: &SymLowerMatrix,
    m: &MultilevelFactorization,
    rhs: &[f64],
    x0: Option<&[f64]>,
    p: &SqmrParams,
) -> Result<SqmrOutcome> {
    p.validate()?;
    let n = k.order();
    if rhs.len() != n || m.order() != n || x0.is_some_and(|x| x.len() != n) {
        return Err(Error::Structure("sqmr: dimension mismatch"));
    }
    let rhs_norm = norm2(rhs);
    if rhs_norm == 0.0 {
        return Ok(SqmrOutcome {
            solution: vec![0.0; n],
            iterations: 0,
            relres: 0.0,
            status: SqmrStatus::Converged,
        });
    }

    let mut x = x0.map_or_else(|| vec![0.0; n], <[f64]>::to_vec);
    let mut r = vec![0.0; n];
    k.sym_spmv_into(&x, &mut r);
    for (ri, bi) in r.iter_mut().zip(rhs) {
        *ri = bi - *ri;
    }
    let mut best_relres = relative_residual(k, rhs, &x);
    let mut best_x = x.clone();
    if best_relres <= p.eta {
        return Ok(SqmrOutcome {
            solution: x,
            iterations: 0,
            relres: best_relres,
            status: SqmrStatus::Converged,
        });
    }

    let mut ws = m.workspace();
    let mut q = vec![0.0; n];
    m.apply_into(&r, &mut q, &mut ws)?;
    let mut t = vec![0.0; n];
    let mut u = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut tau = norm2(&r);
    let mut theta = 0.0f64;
    let mut rho = dot(&r, &q);

    let mut status = SqmrStatus::MaxIters;
    let mut iterations = 0;
    for it in 1..=p.max_iters {
        iterations = it;
        k.sym_spmv_into(&q, &mut t);
        let sigma = dot(&q, &t);
        if !(sigma.abs() > BREAKDOWN * norm2(&q) * norm2(&t)) {
            status = SqmrStatus::Breakdown;
            iterations = it - 1;
            break;
        }
        let alpha = rho / sigma;
        for (ri, ti) in r.iter_mut().zip(&t) {
            *ri -= alpha * ti;
        }
        let theta_prev = theta;
        theta = norm2(&r) / tau;
        let c2 = 1.0 / (1.0 + theta * theta);
        tau *= theta * libm::sqrt(c2);
        let keep = c2 * theta_prev * theta_prev;
        for ((di, xi), qi) in d.iter_mut().zip(x.iter_mut()).zip(&q) {
            *di = keep * *di + c2 * alpha * qi;
            *xi += *di;
        }

        if tau <= p.eta * rhs_norm || it % p.true_residual_period == 0 {
            let relres = relative_residual(k, rhs, &x);
            if relres < best_relres {
                best_relres = relres;
                best_x.copy_from_slice(&x);
            }
            if relres <= p.eta {
                return Ok(SqmrOutcome {
                    solution: x,
                    iterations: it,
                    relres,
                    status: SqmrStatus::Converged,
                });
            }
        }

        m.apply_into(&r, &mut u, &mut ws)?;
        let rho_new = dot(&r, &u);
        if !(rho_new.abs() > BREAKDOWN * norm2(&r) * norm2(&u)) || rho == 0.0 {
            status = SqmrStatus::Breakdown;
            break;
        }
        let beta = rho_new / rho;
        for (qi, ui) in q.iter_mut().zip(&u) {
            *qi = ui + beta * *qi;
        }
        rho = rho_new;
    }

    let relres = relative_residual(k, rhs, &x);
    if relres < best_relres {
        best_relres = relres;
        best_x.copy_from_slice(&x);
    }
    if status == SqmrStatus::Breakdown {
        // The Lanczos inner product r^T M^{-1} r can vanish for indefinite M
        // even when M is exact. One preconditioned correction from the best
        // point is tried before giving up; it is certified like any iterate.
        k.sym_spmv_into(&best_x, &mut t);
        for ((ri, bi), ti) in r.iter_mut().zip(rhs).zip(&t) {
            *ri = bi - ti;
        }
        m.apply_into(&r, &mut u, &mut ws)?;
        for (xi, (bi, ui)) in x.iter_mut().zip(best_x.iter().zip(&u)) {
            *xi = bi + ui;
        }
        let corrected = relative_residual(k, rhs, &x);
        if corrected < best_relres {
            best_relres = corrected;
            best_x = x;
            if corrected <= p.eta {
                status = SqmrStatus::Converged;
                iterations += 1;
            }
        }
    }
    Ok(SqmrOutcome {
        solution: best_x,
        iterations,
        relres: best_relres,
        status,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ldl::{factor_multilevel, FactorParams};
    use crate::sparse::Triplets;

    fn exact() -> FactorParams {
        FactorParams {
            tau_l: 0.0,
            tau_s: 0.0,
            kappa: 1e12,
            ..Default::default()
        }
    }

    #[test]
    fn identity_converges_in_one_step() {
        let k = SymLowerMatrix::identity(3);
        let m = factor_multilevel(&k, &exact()).unwrap();
        let out = sqmr_solve(&k, &m, &[1.0, 2.0, 3.0], &SqmrParams::default()).unwrap();
        assert_eq!(out.status, SqmrStatus::Converged);
        assert_eq!(out.iterations, 1);
        assert_eq!(out.solution, vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn permutation_matrix() {
        let mut t = Triplets::new(2, 2);
        t.push(1, 0, 1.0);
        let k = SymLowerMatrix::from_triplets(&t).unwrap();
        let m = factor_multilevel(&k, &exact()).unwrap();
        let p = SqmrParams {
            eta: 1e-10,
            ..Default::default()
        };
        let out = sqmr_solve(&k, &m, &[1.0, 0.0], &p).unwrap();
        assert_eq!(out.status, SqmrStatus::Converged);
        assert!(out.iterations <= 2);
        assert!((out.solution[0]).abs() < 1e-12 && (out.solution[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_rhs_returns_immediately() {
        let k = SymLowerMatrix::identity(2);
        let m = factor_multilevel(&k, &exact()).unwrap();
        let out = sqmr_solve(&k, &m, &[0.0, 0.0], &SqmrParams::default()).unwrap();
        assert_eq!((out.iterations, out.status), (0, SqmrStatus::Converged));
        assert_eq!(out.solution, vec![0.0, 0.0]);
    }

    #[test]
    fn validates_inputs() {
        let k = SymLowerMatrix::identity(2);
        let m = factor_multilevel(&k, &exact()).unwrap();
        assert!(sqmr_solve(&k, &m, &[1.0], &SqmrParams::default()).is_err());
        let bad = SqmrParams {
            eta: 1.0,
            ..Default::default()
        };
        assert!(sqmr_solve(&k, &m, &[1.0, 1.0], &bad).is_err());
    }
}
