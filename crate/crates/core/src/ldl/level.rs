//! One level of the incomplete indefinite factorization.
//!
//! Indices are visited in order. Each one is tried as a 1x1 pivot, then as a
//! 2x2 pivot with its largest pending off-diagonal partner; a pivot is
//! accepted only when it is numerically nonzero and the inverse-norm
//! estimator stays within `kappa`. Everything else is postponed and, after
//! the right-looking updates of all accepted pivots, forms the Schur
//! complement handed to the next level.

use alloc::vec;
use alloc::vec::Vec;

use super::estimator::InvNormEstimator;
use super::{FactorParams, LevelFactor, PivotBlock};
use crate::sparse::{CscMatrix, Permutation, SymLowerMatrix, Triplets};

const TINY: f64 = 1e-14;

#[derive(Clone, Copy, PartialEq, Eq)]
enum Status {
    Pending,
    Accepted,
    Postponed,
}

/// Active part of the matrix: one sorted `(index, value)` row per index,
/// both triangles and the diagonal stored.
struct ActiveMatrix {
    rows: Vec<Vec<(usize, f64)>>,
}

impl ActiveMatrix {
    fn from_sym(s: &SymLowerMatrix) -> Self {
        let mut rows = vec![Vec::new(); s.order()];
        for (i, j, v) in s.storage().iter() {
            rows[i].push((j, v));
            if i != j {
                rows[j].push((i, v));
            }
        }
        for row in &mut rows {
            row.sort_unstable_by_key(|e| e.0);
        }
        ActiveMatrix { rows }
    }

    fn diag(&self, j: usize) -> f64 {
        let row = &self.rows[j];
        match row.binary_search_by_key(&j, |e| e.0) {
            Ok(k) => row[k].1,
            Err(_) => 0.0,
        }
    }

    fn off_diag(&self, j: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.rows[j].iter().copied().filter(move |e| e.0 != j)
    }

    /// `row_i <- row_i - update`, dropping the entries of eliminated pivots.
    fn subtract(&mut self, i: usize, update: &[(usize, f64)], eliminated: &[usize]) {
        let row = core::mem::take(&mut self.rows[i]);
        let mut merged = Vec::with_capacity(row.len() + update.len());
        let (mut a, mut b) = (0, 0);
        while a < row.len() || b < update.len() {
            let next = match (row.get(a), update.get(b)) {
                (Some(&(ra, va)), Some(&(rb, vb))) => {
                    if ra < rb {
                        a += 1;
                        (ra, va)
                    } else if rb < ra {
                        b += 1;
                        (rb, -vb)
                    } else {
                        a += 1;
                        b += 1;
                        (ra, va - vb)
                    }
                }
                (Some(&e), None) => {
                    a += 1;
                    e
                }
                (None, Some(&(rb, vb))) => {
                    b += 1;
                    (rb, -vb)
                }
                (None, None) => unreachable!(),
            };
            if !eliminated.contains(&next.0) {
                merged.push(next);
            }
        }
        self.rows[i] = merged;
    }
}

/// Indices `i` with `|l_i| < tau * max |l|` are removed.
fn drop_small(rows: &mut Vec<usize>, vals: &mut Vec<f64>, tau: f64) {
    if tau <= 0.0 || vals.is_empty() {
        return;
    }
    let cut = tau * vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut k = 0;
    for r in 0..rows.len() {
        if vals[r].abs() >= cut {
            rows[k] = rows[r];
            vals[k] = vals[r];
            k += 1;
        }
    }
    rows.truncate(k);
    vals.truncate(k);
}

/// Factors one level and returns the Schur complement on the postponed set
/// (in postponement order).
pub fn factor_level(s: &SymLowerMatrix, p: &FactorParams) -> (LevelFactor, SymLowerMatrix) {
    let n = s.order();
    let tiny = TINY * s.max_abs();
    let mut active = ActiveMatrix::from_sym(s);
    let mut status = vec![Status::Pending; n];
    let mut est = InvNormEstimator::new(n, p.kappa);

    let mut accepted: Vec<usize> = Vec::new();
    let mut l_cols: Vec<(Vec<usize>, Vec<f64>)> = Vec::new();
    let mut blocks = Vec::new();
    let mut postponed = Vec::new();

    for j in 0..n {
        if status[j] != Status::Pending {
            continue;
        }
        let d = active.diag(j);
        let (nbr, col): (Vec<usize>, Vec<f64>) = active.off_diag(j).unzip();

        if d.abs() > tiny {
            let l: Vec<f64> = col.iter().map(|v| v / d).collect();
            if est.try_accept(j, &nbr, &l) {
                let (mut rows, mut vals) = (nbr.clone(), l);
                drop_small(&mut rows, &mut vals, p.tau_l);
                // S_ik -= l_i d l_k over the kept multipliers.
                let upd: Vec<(usize, f64)> = rows
                    .iter()
                    .zip(&vals)
                    .map(|(&k, &lk)| (k, lk * d))
                    .collect();
                for &i in &nbr {
                    let li = rows.binary_search(&i).map(|r| vals[r]).unwrap_or(0.0);
                    let scaled: Vec<(usize, f64)> = if li == 0.0 {
                        Vec::new()
                    } else {
                        upd.iter().map(|&(k, w)| (k, li * w)).collect()
                    };
                    active.subtract(i, &scaled, &[j]);
                }
                active.rows[j] = Vec::new();
                status[j] = Status::Accepted;
                accepted.push(j);
                l_cols.push((rows, vals));
                blocks.push(PivotBlock::One(d));
                continue;
            }
        }

        if let Some(partner) = pick_partner(&nbr, &col, &status, j, tiny) {
            if try_pair(
                &mut active,
                &mut est,
                &mut status,
                p,
                (j, partner),
                tiny,
                &mut l_cols,
                &mut blocks,
            ) {
                accepted.push(j);
                accepted.push(partner);
                continue;
            }
        }
        status[j] = Status::Postponed;
        postponed.push(j);
    }

    let acc = accepted.len();
    let mut new_of_old = vec![0usize; n];
    for (pos, &i) in accepted.iter().chain(&postponed).enumerate() {
        new_of_old[i] = pos;
    }

    let mut lt = Triplets::new(n, n);
    for (c, (rows, vals)) in l_cols.iter().enumerate() {
        for (&i, &v) in rows.iter().zip(vals) {
            lt.push(new_of_old[i], c, v);
        }
    }
    let l = CscMatrix::from_triplets(&lt).expect("L entries are finite and in range");

    let schur = schur_complement(&active, &postponed, acc, &new_of_old, p.tau_s);
    let factor = LevelFactor {
        accepted_count: acc,
        l,
        d: blocks,
        local_perm: Permutation::from_new_of_old(new_of_old).expect("positions form a bijection"),
        postponed,
        schur: None,
    };
    (factor, schur)
}

/// Largest-magnitude pending off-diagonal in column `j`; ties go to the
/// smaller index.
fn pick_partner(
    nbr: &[usize],
    col: &[f64],
    status: &[Status],
    j: usize,
    tiny: f64,
) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (&i, &v) in nbr.iter().zip(col) {
        if i == j || status[i] != Status::Pending || v.abs() <= tiny {
            continue;
        }
        match best {
            Some((bi, bv)) if v.abs() < bv || (v.abs() == bv && i > bi) => {}
            _ => best = Some((i, v.abs())),
        }
    }
    best.map(|b| b.0)
}

#[allow(clippy::too_many_arguments)]
fn try_pair(
    active: &mut ActiveMatrix,
    est: &mut InvNormEstimator,
    status: &mut [Status],
    p: &FactorParams,
    (j, q): (usize, usize),
    tiny: f64,
    l_cols: &mut Vec<(Vec<usize>, Vec<f64>)>,
    blocks: &mut Vec<PivotBlock>,
) -> bool {
    let (a, c) = (active.diag(j), active.diag(q));
    let b = active.rows[j]
        .iter()
        .find(|e| e.0 == q)
        .map(|e| e.1)
        .unwrap_or(0.0);
    let det = a * c - b * b;
    let det_scale = (a * c).abs().max(b * b);
    if !(det.abs() > TINY * det_scale && det_scale > tiny * tiny) {
        return false;
    }

    // Union of both neighbour lists, pivots excluded.
    let mut rows: Vec<usize> = active
        .off_diag(j)
        .chain(active.off_diag(q))
        .map(|e| e.0)
        .filter(|&i| i != j && i != q)
        .collect();
    rows.sort_unstable();
    rows.dedup();
    let s_j: Vec<f64> = rows.iter().map(|&i| lookup(&active.rows[j], i)).collect();
    let s_q: Vec<f64> = rows.iter().map(|&i| lookup(&active.rows[q], i)).collect();
    // [l_ij, l_iq] = [s_ij, s_iq] D^{-1}
    let l_j: Vec<f64> = s_j
        .iter()
        .zip(&s_q)
        .map(|(&u, &v)| (u * c - v * b) / det)
        .collect();
    let l_q: Vec<f64> = s_j
        .iter()
        .zip(&s_q)
        .map(|(&u, &v)| (v * a - u * b) / det)
        .collect();
    if !est.try_accept_pair((j, q), &rows, &l_j, &l_q) {
        return false;
    }

    let (mut rj, mut vj) = (rows.clone(), l_j);
    let (mut rq, mut vq) = (rows.clone(), l_q);
    drop_small(&mut rj, &mut vj, p.tau_l);
    drop_small(&mut rq, &mut vq, p.tau_l);
    // Kept multipliers scattered back onto the union row list.
    let kept_j: Vec<f64> = rows.iter().map(|&i| lookup_split(&rj, &vj, i)).collect();
    let kept_q: Vec<f64> = rows.iter().map(|&i| lookup_split(&rq, &vq, i)).collect();
    // w_k = D [l_kj, l_kq]^T
    let w: Vec<(usize, f64, f64)> = rows
        .iter()
        .enumerate()
        .map(|(r, &k)| {
            (
                k,
                a * kept_j[r] + b * kept_q[r],
                b * kept_j[r] + c * kept_q[r],
            )
        })
        .filter(|e| e.1 != 0.0 || e.2 != 0.0)
        .collect();
    for (r, &i) in rows.iter().enumerate() {
        let (li, lq) = (kept_j[r], kept_q[r]);
        let update: Vec<(usize, f64)> = if li == 0.0 && lq == 0.0 {
            Vec::new()
        } else {
            w.iter()
                .map(|&(k, w1, w2)| (k, li * w1 + lq * w2))
                .collect()
        };
        active.subtract(i, &update, &[j, q]);
    }
    active.rows[j] = Vec::new();
    active.rows[q] = Vec::new();
    status[j] = Status::Accepted;
    status[q] = Status::Accepted;
    l_cols.push((rj, vj));
    l_cols.push((rq, vq));
    blocks.push(PivotBlock::Two([a, b, c]));
    true
}

fn lookup(row: &[(usize, f64)], i: usize) -> f64 {
    match row.binary_search_by_key(&i, |e| e.0) {
        Ok(k) => row[k].1,
        Err(_) => 0.0,
    }
}

fn lookup_split(rows: &[usize], vals: &[f64], i: usize) -> f64 {
    rows.binary_search(&i).map(|r| vals[r]).unwrap_or(0.0)
}

/// Remaining active block on the postponed set, renumbered `0..|postponed|`.
/// Off-diagonal entries below `tau_s` times the largest magnitude of their
/// column are dropped; diagonal entries are always kept.
fn schur_complement(
    active: &ActiveMatrix,
    postponed: &[usize],
    acc: usize,
    new_of_old: &[usize],
    tau_s: f64,
) -> SymLowerMatrix {
    let np = postponed.len();
    let mut t = Triplets::new(np, np);
    for &j in postponed {
        let cj = new_of_old[j] - acc;
        let row = &active.rows[j];
        let cut = tau_s * row.iter().fold(0.0f64, |m, e| m.max(e.1.abs()));
        for &(i, v) in row {
            let ci = new_of_old[i] - acc;
            if ci < cj {
                continue;
            }
            if ci == cj || tau_s <= 0.0 || v.abs() >= cut {
                t.push(ci, cj, v);
            }
        }
    }
    SymLowerMatrix::from_triplets(&t).expect("Schur entries are finite and in range")
}
