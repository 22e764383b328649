//! Multilevel incomplete indefinite `LDL^T` preconditioner.
//!
//! After a fill-reducing symmetric permutation, each level accepts the 1x1
//! and 2x2 pivots that keep an estimate of `||L^{-1}||_inf` below `kappa` and
//! postpones the rest. The postponed indices, with the Schur complement
//! update of all accepted pivots, become the next level. Entries of `L` and
//! of the carried Schur complement are dropped by two independent relative
//! tolerances. The last remainder is factored densely.
//!
//! With the local permutation `Q` of a level, accepted pivots first:
//!
//! ```text
//! Q S Q^T ~ [ L11  0 ] [ D  0  ] [ L11^T  L21^T ]
//!           [ L21  I ] [ 0  S2 ] [ 0      I     ]
//! ```

pub mod dense;
pub mod estimator;
mod level;

use alloc::vec;
use alloc::vec::Vec;

pub use dense::DenseLdl;
pub use estimator::InvNormEstimator;
pub use level::factor_level;

use crate::error::{Error, Result};
use crate::ordering::fill_reducing_order;
use crate::sparse::{CscMatrix, Permutation, SymLowerMatrix};

#[derive(Clone, Debug, PartialEq)]
pub struct FactorParams {
    /// Bound on the `||L^{-1}||_inf` estimate; must exceed 1.
    pub kappa: f64,
    /// Relative drop tolerance for entries of `L`.
    pub tau_l: f64,
    /// Relative drop tolerance for the carried Schur complement.
    pub tau_s: f64,
    pub max_levels: usize,
    /// Remainders of at most this order are factored densely.
    pub final_dense_threshold: usize,
    /// Keep each level's Schur complement on the factor (debug dumps).
    pub retain_schur: bool,
}

impl Default for FactorParams {
    fn default() -> Self {
        FactorParams {
            kappa: 5.0,
            tau_l: 1e-3,
            tau_s: 1e-3,
            max_levels: 20,
            final_dense_threshold: 200,
            retain_schur: false,
        }
    }
}

impl FactorParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.kappa > 1.0) {
            return Err(Error::Data("kappa must exceed 1"));
        }
        if !(self.tau_l >= 0.0 && self.tau_s >= 0.0) {
            return Err(Error::Data("drop tolerances must be nonnegative"));
        }
        if self.max_levels < 1 {
            return Err(Error::Data("max_levels must be at least 1"));
        }
        Ok(())
    }
}

/// A 1x1 pivot `d` or a 2x2 pivot `[[a, b], [b, c]]` stored as `[a, b, c]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PivotBlock {
    One(f64),
    Two([f64; 3]),
}

impl PivotBlock {
    pub fn size(&self) -> usize {
        match self {
            PivotBlock::One(_) => 1,
            PivotBlock::Two(_) => 2,
        }
    }

    /// Lower-triangle entries the block stores.
    pub fn stored_entries(&self) -> usize {
        match self {
            PivotBlock::One(_) => 1,
            PivotBlock::Two(_) => 3,
        }
    }

    /// Solves with the block on the leading entries of `x`; returns the size.
    pub(crate) fn solve(&self, x: &mut [f64]) -> usize {
        match *self {
            PivotBlock::One(d) => {
                x[0] /= d;
                1
            }
            PivotBlock::Two([a, b, c]) => {
                let det = a * c - b * b;
                let (u, v) = (x[0], x[1]);
                x[0] = (c * u - b * v) / det;
                x[1] = (a * v - b * u) / det;
                2
            }
        }
    }
}

/// One level of the chain. `l` is unit lower triangular in level order
/// (accepted pivots first); only its strictly lower part is stored and only
/// the first `accepted_count` columns are nonempty.
#[derive(Clone, Debug, PartialEq)]
pub struct LevelFactor {
    pub accepted_count: usize,
    pub l: CscMatrix,
    pub d: Vec<PivotBlock>,
    /// Maps a level-local index to its position in level order.
    pub local_perm: Permutation,
    /// Postponed local indices; position `k` here is index `k` of the next level.
    pub postponed: Vec<usize>,
    /// Schur complement handed to the next level, when retained.
    pub schur: Option<SymLowerMatrix>,
}

impl LevelFactor {
    pub fn order(&self) -> usize {
        self.local_perm.len()
    }

    /// Stored strictly-lower `L` entries plus `D` entries.
    pub fn nnz(&self) -> usize {
        self.l.nnz() + self.d.iter().map(PivotBlock::stored_entries).sum::<usize>()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MultilevelFactorization {
    pub global_perm: Permutation,
    pub levels: Vec<LevelFactor>,
    pub final_dense: DenseLdl,
    pub nnz_total: usize,
}

/// Fill-reducing ordering followed by levels of [`factor_level`] until the
/// remainder is small enough (or `max_levels` is hit, or a level accepts no
/// pivot); the remainder is then factored densely.
pub fn factor_multilevel(k: &SymLowerMatrix, p: &FactorParams) -> Result<MultilevelFactorization> {
    factor_multilevel_with_order(k, fill_reducing_order(k), p)
}

/// As [`factor_multilevel`] with a caller-chosen global permutation.
pub fn factor_multilevel_with_order(
    k: &SymLowerMatrix,
    global_perm: Permutation,
    p: &FactorParams,
) -> Result<MultilevelFactorization> {
    p.validate()?;
    let mut current = k.sym_permute(&global_perm)?;
    let mut levels = Vec::new();
    while current.order() > p.final_dense_threshold && levels.len() < p.max_levels {
        let (mut level, next) = factor_level(&current, p);
        let progressed = level.accepted_count > 0;
        if p.retain_schur {
            level.schur = Some(next.clone());
        }
        levels.push(level);
        current = next;
        if !progressed {
            break;
        }
    }
    let final_dense = DenseLdl::factor(&current).map_err(|index| Error::SingularFactor {
        level: levels.len(),
        index,
    })?;
    let nnz_total = levels.iter().map(LevelFactor::nnz).sum::<usize>() + final_dense.nnz();
    Ok(MultilevelFactorization {
        global_perm,
        levels,
        final_dense,
        nnz_total,
    })
}

/// Per-level scratch buffers for [`MultilevelFactorization::apply_into`].
#[derive(Clone, Debug, Default)]
pub struct ApplyWorkspace {
    buffers: Vec<Vec<f64>>,
}

impl MultilevelFactorization {
    pub fn order(&self) -> usize {
        self.global_perm.len()
    }

    pub fn workspace(&self) -> ApplyWorkspace {
        let mut buffers: Vec<Vec<f64>> = self.levels.iter().map(|l| vec![0.0; l.order()]).collect();
        buffers.push(vec![0.0; self.final_dense.order()]);
        ApplyWorkspace { buffers }
    }

    /// `M^{-1} r`.
    pub fn apply(&self, r: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; r.len()];
        let mut ws = self.workspace();
        self.apply_into(r, &mut out, &mut ws)?;
        Ok(out)
    }

    /// `out = M^{-1} r` using the caller's workspace.
    pub fn apply_into(&self, r: &[f64], out: &mut [f64], ws: &mut ApplyWorkspace) -> Result<()> {
        if r.len() != self.order() || out.len() != self.order() {
            return Err(Error::Structure("preconditioner: dimension mismatch"));
        }
        if ws.buffers.len() != self.levels.len() + 1 {
            *ws = self.workspace();
        }
        for (i, &v) in r.iter().enumerate() {
            out[self.global_perm.new_of(i)] = v;
        }
        self.solve_level(0, out, &mut ws.buffers);
        let permuted: Vec<f64> = out.to_vec();
        for (i, o) in out.iter_mut().enumerate() {
            *o = permuted[self.global_perm.new_of(i)];
        }
        Ok(())
    }

    fn solve_level(&self, k: usize, x: &mut [f64], buffers: &mut [Vec<f64>]) {
        let (buf, rest) = buffers.split_first_mut().expect("one buffer per level");
        let Some(level) = self.levels.get(k) else {
            self.final_dense.solve_in_place(x, buf);
            return;
        };
        let acc = level.accepted_count;
        let y = buf;
        for (i, &v) in x.iter().enumerate() {
            y[level.local_perm.new_of(i)] = v;
        }
        for c in 0..acc {
            let yc = y[c];
            if yc != 0.0 {
                let (rows, vals) = level.l.col(c);
                for (&i, &l) in rows.iter().zip(vals) {
                    y[i] -= l * yc;
                }
            }
        }
        self.solve_level(k + 1, &mut y[acc..], rest);
        let mut pos = 0;
        for block in &level.d {
            pos += block.solve(&mut y[pos..acc]);
        }
        for c in (0..acc).rev() {
            let (rows, vals) = level.l.col(c);
            let mut acc_c = y[c];
            for (&i, &l) in rows.iter().zip(vals) {
                acc_c -= l * y[i];
            }
            y[c] = acc_c;
        }
        for (i, xi) in x.iter_mut().enumerate() {
            *xi = y[level.local_perm.new_of(i)];
        }
    }

    /// Total of each level's accepted count plus the dense remainder order.
    pub fn eliminated_count(&self) -> usize {
        self.levels.iter().map(|l| l.accepted_count).sum::<usize>() + self.final_dense.order()
    }
}

/// Stored factor entries divided by `nnz(A)`.
pub fn fill_ratio(f: &MultilevelFactorization, a: &CscMatrix) -> Result<f64> {
    if a.nnz() == 0 {
        return Err(Error::Data("fill ratio undefined for nnz(A) = 0"));
    }
    Ok(f.nnz_total as f64 / a.nnz() as f64)
}
