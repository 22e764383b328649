//! Incremental lower estimate of `||L^{-1}||_inf` for a unit lower factor
//! that is built one (block) column at a time.
//!
//! Each sweep runs a forward substitution `L v = s` with `s_k = +-1`
//! alongside the factorization; `t_k = sum_{j<k} l_kj v_j` is accumulated
//! right-looking as columns are accepted, so `v_k = s_k - t_k`, and any
//! choice of signs gives `max_k |v_k| <= ||L^{-1}||_inf`. Two sweeps run
//! side by side. The greedy one maximizes `|v_k|`. The look-ahead one
//! maximizes `|v_k| + sum_i |t_i + l_ik v_k|` over the rows the column
//! touches, which catches growth along long elimination chains that the
//! greedy sweep misses. A column is accepted only if every `1 + |t_k|` it
//! touches stays within `kappa` in both sweeps.

use alloc::vec;
use alloc::vec::Vec;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Signs {
    Greedy,
    LookAhead,
    Peak,
}

#[derive(Clone, Debug)]
struct Sweep {
    signs: Signs,
    t: Vec<f64>,
    pending: Vec<f64>,
}

impl Sweep {
    /// The two values `v_j` can take.
    fn pivot_values(&self, j: usize) -> [f64; 2] {
        let t = self.t[j];
        [1.0 - t, -1.0 - t]
    }

    /// Picks the signs for the pivot columns, stores the updated `t` of
    /// `rows` in `pending` and returns the largest `1 + |t_k|` among them.
    fn propose(
        &mut self,
        rows: &[usize],
        candidates: &[(f64, f64)],
        contribution: &impl Fn(usize, (f64, f64)) -> f64,
    ) -> f64 {
        let score = |v: (f64, f64)| {
            let own = v.0.abs() + v.1.abs();
            match self.signs {
                Signs::Greedy => own,
                Signs::Peak => rows
                    .iter()
                    .enumerate()
                    .map(|(r, &k)| (self.t[k] + contribution(r, v)).abs())
                    .fold(own, f64::max),
                Signs::LookAhead => {
                    own + rows
                        .iter()
                        .enumerate()
                        .map(|(r, &k)| (self.t[k] + contribution(r, v)).abs())
                        .sum::<f64>()
                }
            }
        };
        let mut best = candidates[0];
        let mut best_score = score(best);
        for &v in &candidates[1..] {
            let s = score(v);
            if s > best_score {
                (best, best_score) = (v, s);
            }
        }
        self.pending.clear();
        let mut worst = 1.0f64;
        for (r, &k) in rows.iter().enumerate() {
            let t = self.t[k] + contribution(r, best);
            self.pending.push(t);
            worst = worst.max(1.0 + t.abs());
        }
        if best_score.is_nan() {
            f64::NAN
        } else {
            worst
        }
    }

    fn commit(&mut self, rows: &[usize]) {
        for (&k, &t) in rows.iter().zip(&self.pending) {
            self.t[k] = t;
        }
    }
}

#[derive(Clone, Debug)]
pub struct InvNormEstimator {
    kappa: f64,
    sweeps: [Sweep; 3],
    estimate: f64,
}

impl InvNormEstimator {
    pub fn new(order: usize, kappa: f64) -> Self {
        let sweep = |signs| Sweep {
            signs,
            t: vec![0.0; order],
            pending: Vec::new(),
        };
        InvNormEstimator {
            kappa,
            sweeps: [
                sweep(Signs::Greedy),
                sweep(Signs::LookAhead),
                sweep(Signs::Peak),
            ],
            estimate: 1.0,
        }
    }

    /// Current estimate of `||L^{-1}||_inf` (1 for `L = I`): the largest
    /// `1 + |t_k|` seen by either sweep.
    pub fn estimate(&self) -> f64 {
        self.estimate
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    /// Tests a 1x1 pivot column `j` with multipliers `l[r]` in rows `rows[r]`.
    /// The state changes only when the column is accepted.
    pub fn try_accept(&mut self, j: usize, rows: &[usize], l: &[f64]) -> bool {
        self.try_update(
            rows,
            |s| {
                let [a, b] = s.pivot_values(j);
                vec![(a, 0.0), (b, 0.0)]
            },
            |r, (vj, _)| l[r] * vj,
        )
    }

    /// Tests a 2x2 pivot block `(j, p)` whose two L columns share the row
    /// list `rows`. The diagonal block of L is the identity, so both pivot
    /// values only depend on earlier columns.
    pub fn try_accept_pair(
        &mut self,
        (j, p): (usize, usize),
        rows: &[usize],
        l_j: &[f64],
        l_p: &[f64],
    ) -> bool {
        self.try_update(
            rows,
            |s| {
                let ([a, b], [c, d]) = (s.pivot_values(j), s.pivot_values(p));
                vec![(a, c), (a, d), (b, c), (b, d)]
            },
            |r, (vj, vp)| l_j[r] * vj + l_p[r] * vp,
        )
    }

    fn try_update(
        &mut self,
        rows: &[usize],
        candidates: impl Fn(&Sweep) -> Vec<(f64, f64)>,
        contribution: impl Fn(usize, (f64, f64)) -> f64,
    ) -> bool {
        let mut worst = self.estimate;
        for sweep in &mut self.sweeps {
            let c = candidates(sweep);
            let w = sweep.propose(rows, &c, &contribution);
            if !(w <= self.kappa) {
                return false;
            }
            worst = worst.max(w);
        }
        for sweep in &mut self.sweeps {
            sweep.commit(rows);
        }
        self.estimate = worst;
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_column_keeps_estimate() {
        let mut est = InvNormEstimator::new(3, 2.0);
        assert!(est.try_accept(0, &[], &[]));
        assert_eq!(est.estimate(), 1.0);
    }

    #[test]
    fn bidiagonal_growth_rejects_past_kappa() {
        // Unit bidiagonal with subdiagonal 2: row sums of |L^{-1}| are
        // 1, 3, 7, 15.
        let mut est = InvNormEstimator::new(4, 10.0);
        assert!(est.try_accept(0, &[1], &[2.0]));
        assert_eq!(est.estimate(), 3.0);
        assert!(est.try_accept(1, &[2], &[2.0]));
        assert_eq!(est.estimate(), 7.0);
        assert!(!est.try_accept(2, &[3], &[2.0]));
        assert_eq!(est.estimate(), 7.0);
    }

    #[test]
    fn single_large_multiplier_rejects() {
        let kappa = 5.0;
        let mut est = InvNormEstimator::new(2, kappa);
        assert!(!est.try_accept(0, &[1], &[kappa + 1.0]));
        assert!(est.try_accept(0, &[1], &[kappa - 1.0]));
        assert_eq!(est.estimate(), kappa);
    }

    #[test]
    fn nan_multiplier_rejects() {
        let mut est = InvNormEstimator::new(2, 5.0);
        assert!(!est.try_accept(0, &[1], &[f64::NAN]));
    }
}
