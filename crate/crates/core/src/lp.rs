use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::sparse::CscMatrix;

/// `min c^T x  s.t.  A x = b, x >= 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct StandardFormLP {
    a: CscMatrix,
    b: Vec<f64>,
    c: Vec<f64>,
}

impl StandardFormLP {
    /// Validates dimensions, finiteness, and that every row of `A` has at
    /// least one stored entry.
    pub fn new(a: CscMatrix, b: Vec<f64>, c: Vec<f64>) -> Result<Self> {
        if b.len() != a.nrows() || c.len() != a.ncols() {
            return Err(Error::Structure("b/c lengths do not match A"));
        }
        if b.iter().chain(&c).any(|v| !v.is_finite()) {
            return Err(Error::Data("non-finite entry in b or c"));
        }
        let mut row_seen = vec![false; a.nrows()];
        for &i in a.rowind() {
            row_seen[i] = true;
        }
        if row_seen.iter().any(|s| !s) {
            return Err(Error::Structure("A has an empty row"));
        }
        Ok(StandardFormLP { a, b, c })
    }

    pub fn a(&self) -> &CscMatrix {
        &self.a
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn c(&self) -> &[f64] {
        &self.c
    }

    /// Number of equality rows.
    pub fn m(&self) -> usize {
        self.a.nrows()
    }

    /// Number of nonnegative variables.
    pub fn n(&self) -> usize {
        self.a.ncols()
    }
}
