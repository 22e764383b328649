//! Machine-readable run statistics.

use inexact_ipm_core::{IterationLog, Status};
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub instance: String,
    pub rows: usize,
    pub cols: usize,
    pub nnz_a: usize,
    pub status: String,
    pub objective: f64,
    pub wall_seconds: f64,
    pub iterations: Vec<IterationReport>,
    pub totals: Totals,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationReport {
    pub k: usize,
    pub mu: f64,
    pub rp: f64,
    pub rd: f64,
    pub gap: f64,
    pub eta: f64,
    pub sqmr_iters: usize,
    pub resolves: usize,
    pub fill_ratio: f64,
    pub t_factor: f64,
    pub t_solve: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Totals {
    pub sqmr_iters: usize,
    /// Mean of the per-iteration fill ratios.
    pub fill_ratio_avg: f64,
}

pub fn status_name(s: Status) -> &'static str {
    match s {
        Status::Optimal => "optimal",
        Status::MaxIters => "max_iters",
        Status::NumericalFailure => "numerical_failure",
    }
}

impl From<&IterationLog> for IterationReport {
    fn from(l: &IterationLog) -> Self {
        IterationReport {
            k: l.iteration,
            mu: l.mu,
            rp: l.rp_norm,
            rd: l.rd_norm,
            gap: l.gap,
            eta: l.eta,
            sqmr_iters: l.sqmr_iters,
            resolves: l.resolves,
            fill_ratio: l.fill_ratio,
            t_factor: l.t_factor,
            t_solve: l.t_solve,
        }
    }
}

impl Totals {
    pub fn from_logs(logs: &[IterationLog]) -> Self {
        let fill_ratio_avg = if logs.is_empty() {
            0.0
        } else {
            logs.iter().map(|l| l.fill_ratio).sum::<f64>() / logs.len() as f64
        };
        Totals {
            sqmr_iters: logs.iter().map(|l| l.sqmr_iters).sum(),
            fill_ratio_avg,
        }
    }
}

impl RunReport {
    /// Copy with every timing field zeroed, for reproducibility checks.
    pub fn without_timings(&self) -> RunReport {
        let mut r = self.clone();
        r.wall_seconds = 0.0;
        for it in &mut r.iterations {
            it.t_factor = 0.0;
            it.t_solve = 0.0;
        }
        r
    }
}
