//! Dense symmetric indefinite `LDL^T` with complete (Bunch–Parlett) pivoting,
//! used for the last Schur complement of the multilevel chain.

use alloc::vec;
use alloc::vec::Vec;

use super::PivotBlock;
use crate::sparse::SymLowerMatrix;

/// Bunch–Parlett growth constant `(1 + sqrt(17)) / 8`.
const ALPHA: f64 = 0.640_388_203_202_208_4;
const TINY: f64 = 1e-14;

/// `P S P^T = L D L^T` for a dense symmetric `S`.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseLdl {
    order: usize,
    /// `perm[pos] = original index`.
    perm: Vec<usize>,
    /// Column-major `order x order`; only the strictly lower part is used.
    l: Vec<f64>,
    blocks: Vec<PivotBlock>,
}

impl DenseLdl {
    pub fn empty() -> Self {
        DenseLdl {
            order: 0,
            perm: Vec::new(),
            l: Vec::new(),
            blocks: Vec::new(),
        }
    }

    /// Factors `s`. On failure returns the pivot position at which the
    /// remaining block was numerically zero.
    pub fn factor(s: &SymLowerMatrix) -> Result<Self, usize> {
        let n = s.order();
        let mut a = vec![0.0; n * n];
        for (i, j, v) in s.storage().iter() {
            a[i + j * n] = v;
            a[j + i * n] = v;
        }
        let scale = a.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let tiny = TINY * scale;
        let mut perm: Vec<usize> = (0..n).collect();
        let mut l = vec![0.0; n * n];
        let mut blocks = Vec::new();

        let swap = |a: &mut [f64], l: &mut [f64], perm: &mut [usize], p: usize, q: usize| {
            if p == q {
                return;
            }
            for k in 0..n {
                a.swap(p + k * n, q + k * n);
            }
            for k in 0..n {
                a.swap(k + p * n, k + q * n);
            }
            for k in 0..n {
                l.swap(p + k * n, q + k * n);
            }
            perm.swap(p, q);
        };

        let mut k = 0;
        while k < n {
            let (mut mu0, mut r, mut c) = (0.0f64, k, k);
            let (mut mu1, mut q) = (0.0f64, k);
            for j in k..n {
                let d = a[j + j * n].abs();
                if d > mu1 {
                    mu1 = d;
                    q = j;
                }
                for i in j + 1..n {
                    let v = a[i + j * n].abs();
                    if v > mu0 {
                        mu0 = v;
                        r = i;
                        c = j;
                    }
                }
            }
            if mu0.max(mu1) <= tiny {
                return Err(k);
            }
            if mu1 >= ALPHA * mu0 {
                swap(&mut a, &mut l, &mut perm, k, q);
                let d = a[k + k * n];
                for i in k + 1..n {
                    l[i + k * n] = a[i + k * n] / d;
                }
                for j in k + 1..n {
                    let ljd = l[j + k * n] * d;
                    if ljd == 0.0 {
                        continue;
                    }
                    for i in k + 1..n {
                        a[i + j * n] -= l[i + k * n] * ljd;
                    }
                }
                blocks.push(PivotBlock::One(d));
                k += 1;
            } else {
                swap(&mut a, &mut l, &mut perm, k, c);
                // r > c >= k, and r was not moved by the first swap unless r == k,
                // which cannot happen since r > c >= k.
                swap(&mut a, &mut l, &mut perm, k + 1, r);
                let (d11, d21, d22) = (a[k + k * n], a[k + 1 + k * n], a[k + 1 + (k + 1) * n]);
                let det = d11 * d22 - d21 * d21;
                if det == 0.0 || !det.is_finite() {
                    return Err(k);
                }
                for i in k + 2..n {
                    let (s1, s2) = (a[i + k * n], a[i + (k + 1) * n]);
                    l[i + k * n] = (s1 * d22 - s2 * d21) / det;
                    l[i + (k + 1) * n] = (s2 * d11 - s1 * d21) / det;
                }
                for j in k + 2..n {
                    let (w1, w2) = (a[j + k * n], a[j + (k + 1) * n]);
                    for i in k + 2..n {
                        a[i + j * n] -= l[i + k * n] * w1 + l[i + (k + 1) * n] * w2;
                    }
                }
                blocks.push(PivotBlock::Two([d11, d21, d22]));
                k += 2;
            }
        }
        Ok(DenseLdl {
            order: n,
            perm,
            l,
            blocks,
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// `perm[pos]` is the remainder index placed at `pos`.
    pub fn perm(&self) -> &[usize] {
        &self.perm
    }

    pub fn blocks(&self) -> &[PivotBlock] {
        &self.blocks
    }

    /// Entry `(i, j)` of the unit lower factor, in pivot order.
    pub fn l(&self, i: usize, j: usize) -> f64 {
        match i.cmp(&j) {
            core::cmp::Ordering::Equal => 1.0,
            core::cmp::Ordering::Less => 0.0,
            core::cmp::Ordering::Greater => self.l[i + j * self.order],
        }
    }

    /// Nonzero strictly-lower L entries plus stored D entries.
    pub fn nnz(&self) -> usize {
        let n = self.order;
        let l = (0..n)
            .flat_map(|j| (j + 1..n).map(move |i| (i, j)))
            .filter(|&(i, j)| self.l[i + j * n] != 0.0)
            .count();
        l + self
            .blocks
            .iter()
            .map(PivotBlock::stored_entries)
            .sum::<usize>()
    }

    /// Solves `S x = b` in place; `scratch` must have length `order`.
    pub fn solve_in_place(&self, b: &mut [f64], scratch: &mut [f64]) {
        let n = self.order;
        for (pos, &i) in self.perm.iter().enumerate() {
            scratch[pos] = b[i];
        }
        for j in 0..n {
            let yj = scratch[j];
            if yj != 0.0 {
                for i in j + 1..n {
                    scratch[i] -= self.l[i + j * n] * yj;
                }
            }
        }
        let mut pos = 0;
        for block in &self.blocks {
            pos += block.solve(&mut scratch[pos..]);
        }
        for j in (0..n).rev() {
            let mut acc = scratch[j];
            for i in j + 1..n {
                acc -= self.l[i + j * n] * scratch[i];
            }
            scratch[j] = acc;
        }
        for (pos, &i) in self.perm.iter().enumerate() {
            b[i] = scratch[pos];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sparse::Triplets;

    fn sym(n: usize, entries: &[(usize, usize, f64)]) -> SymLowerMatrix {
        let mut t = Triplets::new(n, n);
        for &(i, j, v) in entries {
            t.push(i, j, v);
        }
        SymLowerMatrix::from_triplets(&t).unwrap()
    }

    #[test]
    fn saddle_uses_two_by_two() {
        let f = DenseLdl::factor(&sym(2, &[(1, 0, 1.0)])).unwrap();
        assert_eq!(f.blocks(), &[PivotBlock::Two([0.0, 1.0, 0.0])]);
        let mut b = [1.0, 0.0];
        let mut s = [0.0; 2];
        f.solve_in_place(&mut b, &mut s);
        assert_eq!(b, [0.0, 1.0]);
    }

    #[test]
    fn singular_is_reported() {
        let s = sym(3, &[(0, 0, 1.0), (1, 0, 1.0), (1, 1, 1.0), (2, 2, 2.0)]);
        assert!(DenseLdl::factor(&s).is_err());
    }

    #[test]
    fn solves_small_indefinite() {
        let s = sym(3, &[(0, 0, 1.0), (1, 0, 2.0), (2, 1, 3.0), (2, 2, -1.0)]);
        let f = DenseLdl::factor(&s).unwrap();
        let x = [1.0, -2.0, 0.5];
        let mut b = s.sym_spmv(&x).unwrap();
        let mut scratch = [0.0; 3];
        f.solve_in_place(&mut b, &mut scratch);
        for (u, v) in b.iter().zip(x) {
            assert!((u - v).abs() < 1e-13);
        }
    }
}
