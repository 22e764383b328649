//! Reduction of an [`LpModel`] to `min c^T x, A x = b, x >= 0`.
//!
//! Per original column with bounds `[l, u]`:
//! - `l == u`: the value is substituted and the column disappears;
//! - `l` finite: `x = l + x'`, plus a row `x' + s = u - l` when `u` is finite;
//! - `l = -inf`, `u` finite: `x = u - x'`;
//! - both infinite: `x = x+ - x-`.
//!
//! L rows get a slack `+s`, G rows a surplus `-s`. Columns are ordered as
//! structural columns, then row slacks, then upper-bound slacks; rows as the
//! model's constraint rows followed by upper-bound rows.

use indexmap::IndexMap;
use inexact_ipm_core::{CscMatrix, StandardFormLP, Triplets};
use log::warn;
use thiserror::Error;

use crate::mps::{LpModel, RowSense};

/// How an original column is expressed in standard-form variables.
#[derive(Clone, Debug, PartialEq)]
pub enum ColumnMap {
    Fixed(f64),
    /// `x = shift + sum(sign * x_std[index])`.
    Affine {
        shift: f64,
        terms: Vec<(usize, f64)>,
    },
}

/// What a slack column stands for.
#[derive(Clone, Debug, PartialEq)]
pub enum SlackOrigin {
    Row(String),
    UpperBound(String),
}

#[derive(Clone, Debug, PartialEq)]
pub struct VarMap {
    pub columns: Vec<(String, ColumnMap)>,
    pub slacks: Vec<(usize, SlackOrigin)>,
    /// Number of standard-form columns.
    pub n_std: usize,
    /// Added to `c^T x_std` to obtain the model objective.
    pub objective_constant: f64,
    /// Rows left without coefficients and with zero right-hand side.
    pub dropped_rows: Vec<String>,
}

#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error("column `{column}` has lower bound {lower} above upper bound {upper}")]
    InfeasibleBounds {
        column: String,
        lower: f64,
        upper: f64,
    },
    #[error("row `{row}` has no coefficients but right-hand side {rhs}")]
    InfeasibleEmptyRow { row: String, rhs: f64 },
    #[error("expected {expected} standard-form values, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error(transparent)]
    Lp(#[from] inexact_ipm_core::Error),
}

struct Builder {
    /// Per standard-form column: entries `(row, value)` and cost.
    cols: Vec<(Vec<(usize, f64)>, f64)>,
}

impl Builder {
    fn push(&mut self, entries: Vec<(usize, f64)>, cost: f64) -> usize {
        self.cols.push((entries, cost));
        self.cols.len() - 1
    }
}

pub fn to_standard_form(model: &LpModel) -> Result<(StandardFormLP, VarMap), ModelError> {
    let row_index: IndexMap<&str, usize> = model
        .rows
        .iter()
        .enumerate()
        .map(|(i, (name, _))| (name.as_str(), i))
        .collect();
    let mut b: Vec<f64> = model
        .rows
        .iter()
        .map(|(r, _)| model.rhs.get(r).copied().unwrap_or(0.0))
        .collect();
    let mut constant = model.objective_constant;
    let mut builder = Builder { cols: Vec::new() };
    let mut columns = Vec::with_capacity(model.columns.len());
    let mut upper_rows: Vec<(usize, f64, &str)> = Vec::new();

    for ((name, raw), &cost) in model.columns.iter().zip(&model.cost) {
        let (lo, up) = model.bounds[name];
        if lo > up {
            return Err(ModelError::InfeasibleBounds {
                column: name.clone(),
                lower: lo,
                upper: up,
            });
        }
        let entries: Vec<(usize, f64)> = raw
            .iter()
            .filter(|(_, v)| *v != 0.0)
            .map(|(r, v)| (row_index[r.as_str()], *v))
            .collect();
        let mut substitute = |value: f64, b: &mut [f64]| {
            for &(i, a) in &entries {
                b[i] -= a * value;
            }
            constant += cost * value;
        };
        let negated = || entries.iter().map(|&(i, a)| (i, -a)).collect::<Vec<_>>();
        let map = match (lo.is_finite(), up.is_finite()) {
            (true, true) if lo == up => {
                substitute(lo, &mut b);
                ColumnMap::Fixed(lo)
            }
            (true, _) => {
                substitute(lo, &mut b);
                let k = builder.push(entries.clone(), cost);
                if up.is_finite() {
                    upper_rows.push((k, up - lo, name));
                }
                ColumnMap::Affine {
                    shift: lo,
                    terms: vec![(k, 1.0)],
                }
            }
            (false, true) => {
                substitute(up, &mut b);
                let k = builder.push(negated(), -cost);
                ColumnMap::Affine {
                    shift: up,
                    terms: vec![(k, -1.0)],
                }
            }
            (false, false) => {
                let plus = builder.push(entries.clone(), cost);
                let minus = builder.push(negated(), -cost);
                ColumnMap::Affine {
                    shift: 0.0,
                    terms: vec![(plus, 1.0), (minus, -1.0)],
                }
            }
        };
        columns.push((name.clone(), map));
    }

    let mut slacks = Vec::new();
    for (i, (name, sense)) in model.rows.iter().enumerate() {
        let sign = match sense {
            RowSense::L => 1.0,
            RowSense::G => -1.0,
            RowSense::E | RowSense::N => continue,
        };
        slacks.push((
            builder.push(vec![(i, sign)], 0.0),
            SlackOrigin::Row(name.clone()),
        ));
    }
    let m_model = model.rows.len();
    for (r, &(k, width, name)) in upper_rows.iter().enumerate() {
        let row = m_model + r;
        builder.cols[k].0.push((row, 1.0));
        b.push(width);
        slacks.push((
            builder.push(vec![(row, 1.0)], 0.0),
            SlackOrigin::UpperBound(name.to_string()),
        ));
    }

    // Renumber rows, dropping those left without coefficients.
    let mut used = vec![false; b.len()];
    for (entries, _) in &builder.cols {
        for &(i, _) in entries {
            used[i] = true;
        }
    }
    let mut new_row = vec![usize::MAX; b.len()];
    let mut kept_b = Vec::with_capacity(b.len());
    let mut dropped_rows = Vec::new();
    for (i, &bi) in b.iter().enumerate() {
        if used[i] {
            new_row[i] = kept_b.len();
            kept_b.push(bi);
            continue;
        }
        let name = &model.rows[i].0;
        let original = model.rhs.get(name).copied().unwrap_or(0.0);
        if bi.abs() > 1e-9 * (1.0 + original.abs()) {
            return Err(ModelError::InfeasibleEmptyRow {
                row: name.clone(),
                rhs: bi,
            });
        }
        warn!("dropping row `{name}` with no coefficients");
        dropped_rows.push(name.clone());
    }

    let n_std = builder.cols.len();
    let mut t = Triplets::new(kept_b.len(), n_std);
    let mut c = Vec::with_capacity(n_std);
    for (j, (entries, cost)) in builder.cols.iter().enumerate() {
        for &(i, v) in entries {
            t.push(new_row[i], j, v);
        }
        c.push(*cost);
    }
    let lp = StandardFormLP::new(CscMatrix::from_triplets(&t)?, kept_b, c)?;
    let map = VarMap {
        columns,
        slacks,
        n_std,
        objective_constant: constant,
        dropped_rows,
    };
    Ok((lp, map))
}

/// Values of the original columns for a standard-form point.
pub fn recover_solution(map: &VarMap, x_std: &[f64]) -> Result<IndexMap<String, f64>, ModelError> {
    if x_std.len() != map.n_std {
        return Err(ModelError::Dimension {
            expected: map.n_std,
            got: x_std.len(),
        });
    }
    Ok(map
        .columns
        .iter()
        .map(|(name, cm)| {
            let value = match cm {
                ColumnMap::Fixed(v) => *v,
                ColumnMap::Affine { shift, terms } => terms
                    .iter()
                    .fold(*shift, |acc, &(k, sign)| acc + sign * x_std[k]),
            };
            (name.clone(), value)
        })
        .collect())
}
