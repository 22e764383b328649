//! The outer inexact interior point iteration.
//!
//! Each step targets `mu = sigma x^T z / n`, solves the augmented system to
//! relative residual `eta` with preconditioned SQMR, recovers the full
//! direction by elimination and takes fraction-to-boundary step lengths.
//! If the trial point does not reduce the primal (or dual) infeasibility by
//! at least `0.1 alpha` relative, `eta` is shrunk and the same factorization
//! is reused for a tighter solve; after three shrinks the drop tolerances are
//! cut tenfold and the matrix is refactored once.

use alloc::vec::Vec;

use crate::error::Result;
use crate::kkt::{
    assemble_kkt, assemble_rhs, compute_residuals, duality_mu, recover_directions, Directions,
    Iterate, KktSystem, Residuals,
};
use crate::ldl::{factor_multilevel, fill_ratio, FactorParams, MultilevelFactorization};
use crate::lp::StandardFormLP;
use crate::sqmr::{sqmr_solve_from, SqmrParams, SqmrStatus};
use crate::vec_ops::{dot, norm2, norm_inf};

/// Required relative decrease of infeasibility per unit step length.
const DECREASE: f64 = 0.1;
const MAX_SHRINKS: usize = 3;
const TIGHTEN: f64 = 0.1;
/// Relative diagonal shift for preconditioning a numerically singular K.
const PRECOND_SHIFT: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct IpmParams {
    pub tol_p: f64,
    pub tol_d: f64,
    pub tol_gap: f64,
    pub sigma: f64,
    pub boundary_fraction: f64,
    pub eta_max: f64,
    pub eta_min: f64,
    pub eta_shrink: f64,
    pub max_iters: usize,
    pub factor_params: FactorParams,
    /// Regularization of the (1,1) block.
    pub delta_p: f64,
    /// Regularization added to `X^-1 Z`.
    pub delta_d: f64,
    pub sqmr_max_iters: usize,
    pub true_residual_period: usize,
}

impl Default for IpmParams {
    fn default() -> Self {
        IpmParams {
            tol_p: 1e-8,
            tol_d: 1e-8,
            tol_gap: 1e-8,
            sigma: 0.1,
            boundary_fraction: 0.99,
            eta_max: 0.1,
            eta_min: 1e-6,
            eta_shrink: 0.1,
            max_iters: 200,
            factor_params: FactorParams::default(),
            delta_p: 0.0,
            delta_d: 0.0,
            sqmr_max_iters: 1000,
            true_residual_period: 10,
        }
    }
}

impl IpmParams {
    pub fn validate(&self) -> Result<()> {
        use crate::error::Error::Data;
        if !(self.tol_p > 0.0 && self.tol_d > 0.0 && self.tol_gap > 0.0) {
            return Err(Data("tolerances must be positive"));
        }
        if !(self.sigma > 0.0 && self.sigma < 1.0) {
            return Err(Data("sigma must lie in (0, 1)"));
        }
        if !(self.boundary_fraction > 0.0 && self.boundary_fraction < 1.0) {
            return Err(Data("boundary fraction must lie in (0, 1)"));
        }
        if !(0.0 < self.eta_min && self.eta_min <= self.eta_max && self.eta_max < 1.0) {
            return Err(Data("need 0 < eta_min <= eta_max < 1"));
        }
        if !(self.eta_shrink > 0.0 && self.eta_shrink < 1.0) {
            return Err(Data("eta_shrink must lie in (0, 1)"));
        }
        if !(self.delta_p >= 0.0 && self.delta_d >= 0.0) {
            return Err(Data("regularization must be nonnegative"));
        }
        self.factor_params.validate()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Optimal,
    MaxIters,
    NumericalFailure,
}

/// Statistics of one accepted step. Norms and the gap refer to the iterate
/// the step started from.
#[derive(Clone, Debug, PartialEq)]
pub struct IterationLog {
    pub iteration: usize,
    pub mu: f64,
    pub rp_norm: f64,
    pub rd_norm: f64,
    pub gap: f64,
    /// Tolerance the accepted direction was solved to.
    pub eta: f64,
    /// True relative residual of the accepted direction.
    pub relres: f64,
    /// SQMR iterations summed over all solves of the step.
    pub sqmr_iters: usize,
    /// Number of eta-tightening re-solves.
    pub resolves: usize,
    pub refactored: bool,
    pub fill_ratio: f64,
    pub alpha_p: f64,
    pub alpha_d: f64,
    pub t_factor: f64,
    pub t_solve: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Solution {
    pub status: Status,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub z: Vec<f64>,
    pub objective: f64,
    pub logs: Vec<IterationLog>,
}

/// Monotone time source in seconds. The core crate has no clock of its own.
pub trait Clock {
    fn seconds(&self) -> f64;
}

/// Reports zero for every reading.
#[derive(Clone, Copy, Debug, Default)]
pub struct NoClock;

impl Clock for NoClock {
    fn seconds(&self) -> f64 {
        0.0
    }
}

/// Everything that went into an accepted step.
pub struct StepRecord<'a> {
    pub iteration: usize,
    pub iterate: &'a Iterate,
    pub residuals: &'a Residuals,
    pub kkt: &'a KktSystem,
    pub factor: &'a MultilevelFactorization,
    pub rhs: &'a [f64],
    /// KKT solution `(dy, -dx)`.
    pub solution: &'a [f64],
    pub directions: &'a Directions,
    pub log: &'a IterationLog,
}

/// Hook called once per accepted step.
pub trait StepObserver {
    fn on_step(&mut self, record: &StepRecord<'_>);
}

impl StepObserver for () {
    fn on_step(&mut self, _: &StepRecord<'_>) {}
}

impl<F: FnMut(&StepRecord<'_>)> StepObserver for F {
    fn on_step(&mut self, record: &StepRecord<'_>) {
        self(record)
    }
}

/// `x = z = beta e` with `beta = max(1, ||b||_inf, ||c||_inf)`, `y = 0`.
pub fn initial_point(lp: &StandardFormLP) -> Iterate {
    let beta = 1f64.max(norm_inf(lp.b())).max(norm_inf(lp.c()));
    let n = lp.n();
    let x = alloc::vec![beta; n];
    let z = x.clone();
    let mu = if n == 0 { 0.0 } else { beta * beta };
    Iterate {
        x,
        y: alloc::vec![0.0; lp.m()],
        z,
        mu,
    }
}

/// Fraction-to-boundary step lengths for the primal and dual updates.
pub fn step_lengths(it: &Iterate, d: &Directions, boundary_fraction: f64) -> (f64, f64) {
    let ratio = |v: &[f64], dv: &[f64]| {
        let blocking = v
            .iter()
            .zip(dv)
            .filter(|(_, &dvi)| dvi < 0.0)
            .map(|(&vi, &dvi)| -vi / dvi)
            .fold(f64::INFINITY, f64::min);
        1f64.min(boundary_fraction * blocking)
    };
    (ratio(&it.x, &d.d_x), ratio(&it.z, &d.d_z))
}

/// Opening tolerance `clamp(x^T z / (n (1 + ||r_p|| + ||r_d||)), eta_min, eta_max)`.
pub fn choose_eta(it: &Iterate, res: &Residuals, p: &IpmParams) -> f64 {
    let n = it.x.len();
    if n == 0 {
        return p.eta_max;
    }
    let raw = it.gap() / (n as f64 * (1.0 + res.norm_p() + res.norm_d()));
    raw.clamp(p.eta_min, p.eta_max)
}

/// Relative primal, dual and gap tests.
pub fn check_convergence(lp: &StandardFormLP, it: &Iterate, p: &IpmParams) -> bool {
    let Ok(res) = compute_residuals(lp, it) else {
        return false;
    };
    let objective = dot(lp.c(), &it.x);
    res.norm_p() / (1.0 + norm2(lp.b())) <= p.tol_p
        && res.norm_d() / (1.0 + norm2(lp.c())) <= p.tol_d
        && it.gap() / (1.0 + objective.abs()) <= p.tol_gap
}

/// Why a step could not be completed.
#[derive(Clone, Debug, PartialEq)]
pub enum StepFailure {
    /// Tightening and refactoring did not produce an acceptable direction.
    Numerical,
    /// Invalid input (dimensions, non-interior iterate).
    Input(crate::error::Error),
}

/// Runs the iteration with a clock and a per-step observer.
pub struct Driver<'a, C: Clock, O: StepObserver> {
    lp: &'a StandardFormLP,
    params: IpmParams,
    factor_params: FactorParams,
    clock: C,
    observer: O,
    iteration: usize,
}

impl<'a> Driver<'a, NoClock, ()> {
    pub fn new(lp: &'a StandardFormLP, params: IpmParams) -> Self {
        Driver::with(lp, params, NoClock, ())
    }
}

impl<'a, C: Clock, O: StepObserver> Driver<'a, C, O> {
    pub fn with(lp: &'a StandardFormLP, params: IpmParams, clock: C, observer: O) -> Self {
        let factor_params = params.factor_params.clone();
        Driver {
            lp,
            params,
            factor_params,
            clock,
            observer,
            iteration: 0,
        }
    }

    /// Factor parameters in force, including any tightening so far.
    pub fn factor_params(&self) -> &FactorParams {
        &self.factor_params
    }

    pub fn into_observer(self) -> O {
        self.observer
    }

    /// One inexact Newton step from the strictly interior `it`.
    pub fn step(
        &mut self,
        it: &Iterate,
    ) -> core::result::Result<(Iterate, IterationLog), StepFailure> {
        let lp = self.lp;
        let p = &self.params;
        let mut it = it.clone();
        it.mu = duality_mu(&it, p.sigma);
        let res = compute_residuals(lp, &it).map_err(StepFailure::Input)?;
        let rhs = assemble_rhs(&res, &it).map_err(StepFailure::Input)?;
        let kkt = assemble_kkt(lp.a(), &it, p.delta_p, p.delta_d).map_err(StepFailure::Input)?;
        let m = lp.m();
        let guard_p = p.tol_p * (1.0 + norm2(lp.b()));
        let guard_d = p.tol_d * (1.0 + norm2(lp.c()));

        let mut eta = choose_eta(&it, &res, p);
        let (mut t_factor, mut t_solve) = (0.0, 0.0);
        let (mut sqmr_iters, mut resolves) = (0, 0);

        for phase in 0..2 {
            let refactored = phase == 1;
            if refactored {
                self.factor_params.tau_l *= TIGHTEN;
                self.factor_params.tau_s *= TIGHTEN;
            }
            let t0 = self.clock.seconds();
            // A numerically singular K is preconditioned through a shifted
            // copy; SQMR still solves with K itself.
            let factor = factor_multilevel(&kkt.k, &self.factor_params).or_else(|_| {
                let shift = PRECOND_SHIFT * kkt.k.max_abs();
                let shifted =
                    assemble_kkt(lp.a(), &it, p.delta_p.max(shift), p.delta_d.max(shift))?;
                factor_multilevel(&shifted.k, &self.factor_params)
            });
            t_factor += self.clock.seconds() - t0;
            let Ok(factor) = factor else {
                continue;
            };

            let mut warm: Option<Vec<f64>> = None;
            let mut shrinks = 0;
            loop {
                let sp = SqmrParams {
                    eta,
                    max_iters: p.sqmr_max_iters,
                    true_residual_period: p.true_residual_period,
                };
                let t0 = self.clock.seconds();
                let out = sqmr_solve_from(&kkt.k, &factor, &rhs, warm.as_deref(), &sp)
                    .map_err(StepFailure::Input)?;
                t_solve += self.clock.seconds() - t0;
                sqmr_iters += out.iterations;
                if out.status != SqmrStatus::Converged {
                    break;
                }
                let dirs = recover_directions(&out.solution[..m], &out.solution[m..], &it, &res)
                    .map_err(StepFailure::Input)?;
                let finite = dirs
                    .d_x
                    .iter()
                    .chain(&dirs.d_y)
                    .chain(&dirs.d_z)
                    .all(|v| v.is_finite());
                if finite {
                    let (alpha_p, alpha_d) = step_lengths(&it, &dirs, p.boundary_fraction);
                    let trial = take_step(&it, &dirs, alpha_p, alpha_d);
                    let trial_res = compute_residuals(lp, &trial).map_err(StepFailure::Input)?;
                    let primal_ok = res.norm_p() <= guard_p
                        || trial_res.norm_p() <= (1.0 - DECREASE * alpha_p) * res.norm_p();
                    let dual_ok = res.norm_d() <= guard_d
                        || trial_res.norm_d() <= (1.0 - DECREASE * alpha_d) * res.norm_d();
                    if primal_ok && dual_ok && trial.is_interior() {
                        let log = IterationLog {
                            iteration: self.iteration,
                            mu: it.mu,
                            rp_norm: res.norm_p(),
                            rd_norm: res.norm_d(),
                            gap: it.gap(),
                            eta,
                            relres: out.relres,
                            sqmr_iters,
                            resolves,
                            refactored,
                            fill_ratio: fill_ratio(&factor, lp.a()).unwrap_or(0.0),
                            alpha_p,
                            alpha_d,
                            t_factor,
                            t_solve,
                        };
                        self.observer.on_step(&StepRecord {
                            iteration: self.iteration,
                            iterate: &it,
                            residuals: &res,
                            kkt: &kkt,
                            factor: &factor,
                            rhs: &rhs,
                            solution: &out.solution,
                            directions: &dirs,
                            log: &log,
                        });
                        self.iteration += 1;
                        return Ok((trial, log));
                    }
                }
                if shrinks == MAX_SHRINKS {
                    break;
                }
                shrinks += 1;
                resolves += 1;
                eta *= p.eta_shrink;
                warm = Some(out.solution);
            }
        }
        Err(StepFailure::Numerical)
    }

    /// Iterates from [`initial_point`] until convergence, the iteration cap,
    /// or a numerical failure.
    pub fn solve(&mut self) -> Solution {
        let lp = self.lp;
        let mut it = initial_point(lp);
        let mut logs = Vec::new();
        let mut status = Status::MaxIters;
        if lp.n() == 0 {
            status = Status::Optimal;
        } else {
            for _ in 0..self.params.max_iters {
                if check_convergence(lp, &it, &self.params) {
                    status = Status::Optimal;
                    break;
                }
                match self.step(&it) {
                    Ok((next, log)) => {
                        it = next;
                        logs.push(log);
                    }
                    Err(_) => {
                        status = Status::NumericalFailure;
                        break;
                    }
                }
            }
            if status == Status::MaxIters && check_convergence(lp, &it, &self.params) {
                status = Status::Optimal;
            }
        }
        let objective = dot(lp.c(), &it.x);
        Solution {
            status,
            x: it.x,
            y: it.y,
            z: it.z,
            objective,
            logs,
        }
    }
}

fn take_step(it: &Iterate, d: &Directions, alpha_p: f64, alpha_d: f64) -> Iterate {
    let upd =
        |v: &[f64], dv: &[f64], a: f64| v.iter().zip(dv).map(|(vi, di)| vi + a * di).collect();
    Iterate {
        x: upd(&it.x, &d.d_x, alpha_p),
        y: upd(&it.y, &d.d_y, alpha_d),
        z: upd(&it.z, &d.d_z, alpha_d),
        mu: it.mu,
    }
}

/// One step without timing or observation.
pub fn ipm_step(
    lp: &StandardFormLP,
    it: &Iterate,
    p: &IpmParams,
) -> core::result::Result<(Iterate, IterationLog), StepFailure> {
    Driver::new(lp, p.clone()).step(it)
}

pub fn ipm_solve(lp: &StandardFormLP, p: &IpmParams) -> Solution {
    Driver::new(lp, p.clone()).solve()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sparse::{CscMatrix, Triplets};
    use alloc::vec;

    fn toy() -> StandardFormLP {
        let mut t = Triplets::new(1, 2);
        t.push(0, 0, 1.0);
        t.push(0, 1, 1.0);
        StandardFormLP::new(
            CscMatrix::from_triplets(&t).unwrap(),
            vec![1.0],
            vec![2.0, 1.0],
        )
        .unwrap()
    }

    #[test]
    fn initial_point_formula() {
        let it = initial_point(&toy());
        assert_eq!(
            (it.x.clone(), it.z.clone(), it.y.clone()),
            (vec![2.0, 2.0], vec![2.0, 2.0], vec![0.0])
        );
        let zero = StandardFormLP::new(CscMatrix::identity(2), vec![0.0; 2], vec![0.0; 2]).unwrap();
        let it = initial_point(&zero);
        assert_eq!(it.x, vec![1.0, 1.0]);
        assert!(it.is_interior());
    }

    #[test]
    fn step_length_rules() {
        let it = Iterate {
            x: vec![1.0, 1.0],
            y: vec![],
            z: vec![1.0, 1.0],
            mu: 0.0,
        };
        let d = Directions {
            d_y: vec![],
            d_x: vec![-2.0, 1.0],
            d_z: vec![1.0, 1.0],
        };
        assert_eq!(step_lengths(&it, &d, 0.9), (0.45, 1.0));
        let it = Iterate {
            x: vec![1.0],
            y: vec![],
            z: vec![1.0],
            mu: 0.0,
        };
        let d = Directions {
            d_y: vec![],
            d_x: vec![-1.0],
            d_z: vec![0.0],
        };
        let (ap, _) = step_lengths(&it, &d, 0.99);
        assert_eq!(ap, 0.99);
        assert!(it.x[0] + ap * d.d_x[0] > 0.0);
    }

    #[test]
    fn eta_schedule() {
        let p = IpmParams::default();
        let big = Residuals::new(vec![100.0], vec![0.0, 0.0], vec![0.0, 0.0]);
        let it = Iterate {
            x: vec![20.0, 20.0],
            y: vec![0.0],
            z: vec![20.0, 20.0],
            mu: 0.0,
        };
        assert_eq!(choose_eta(&it, &big, &p), 0.1);
        let feasible = Residuals::new(vec![0.0], vec![0.0, 0.0], vec![0.0, 0.0]);
        let it = Iterate {
            x: vec![1e-9, 1.0],
            y: vec![0.0],
            z: vec![1.0, 1e-9],
            mu: 0.0,
        };
        assert_eq!(choose_eta(&it, &feasible, &p), 1e-6);
        let it = Iterate {
            x: vec![0.05, 0.05],
            y: vec![0.0],
            z: vec![1.0, 1.0],
            mu: 0.0,
        };
        assert!((choose_eta(&it, &feasible, &p) - 0.05).abs() < 1e-17);
    }

    #[test]
    fn convergence_test() {
        let p = IpmParams::default();
        let opt = Iterate {
            x: vec![0.0, 1.0],
            y: vec![1.0],
            z: vec![1.0, 0.0],
            mu: 0.0,
        };
        assert!(check_convergence(&toy(), &opt, &p));
        assert!(!check_convergence(&toy(), &initial_point(&toy()), &p));
        let near = Iterate {
            x: vec![1e-9, 1.0 - 1e-9],
            y: vec![1.0],
            z: vec![1.0, 0.0],
            mu: 0.0,
        };
        assert!(check_convergence(&toy(), &near, &p));
    }

    #[test]
    fn toy_lp_solves() {
        let sol = ipm_solve(&toy(), &IpmParams::default());
        assert_eq!(sol.status, Status::Optimal);
        assert!((sol.objective - 1.0).abs() <= 1e-7);
        assert!(sol.x[0].abs() < 1e-6 && (sol.x[1] - 1.0).abs() < 1e-6);
    }

    #[test]
    fn empty_lp_is_optimal() {
        let lp = StandardFormLP::new(CscMatrix::zeros(0, 0), vec![], vec![]).unwrap();
        let sol = ipm_solve(&lp, &IpmParams::default());
        assert_eq!(sol.status, Status::Optimal);
        assert_eq!(sol.objective, 0.0);
        assert!(sol.logs.is_empty());
    }

    #[test]
    fn params_validation() {
        assert!(IpmParams::default().validate().is_ok());
        assert!(IpmParams {
            eta_min: 0.5,
            eta_max: 0.1,
            ..Default::default()
        }
        .validate()
        .is_err());
        assert!(IpmParams {
            sigma: 1.0,
            ..Default::default()
        }
        .validate()
        .is_err());
    }
}
