//! Residuals, the augmented KKT matrix and its right-hand side, and recovery
//! of the eliminated Newton components.
//!
//! The Newton equations at `(x, y, z)` with target `mu` are
//!
//! ```text
//! A dx          = -r_p
//! A^T dy + dz   = -r_d
//! Z dx + X dz   = -r_c
//! ```
//!
//! Eliminating `dz` with the last row gives the symmetric indefinite system
//!
//! ```text
//! [ 0    A      ] [  dy ]   [  r_p            ]
//! [ A^T  X^-1 Z ] [ -dx ] = [ -r_d + X^-1 r_c ]
//! ```
//!
//! The x-block unknown is `-dx` so that the (2,2) block stays positive. The
//! right-hand side carries `X^-1 r_c`; the variant `X^-1 Z r_c` does not
//! reproduce the Newton equations under `r_c = Xz - mu e`.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::lp::StandardFormLP;
use crate::sparse::{CscMatrix, SymLowerMatrix};
use crate::vec_ops::{dot, norm2};

/// Primal-dual point with its centering target.
#[derive(Clone, Debug, PartialEq)]
pub struct Iterate {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub z: Vec<f64>,
    pub mu: f64,
}

impl Iterate {
    /// `x^T z`.
    pub fn gap(&self) -> f64 {
        dot(&self.x, &self.z)
    }

    /// Index of the first nonpositive `x_i` or `z_i`, if any.
    pub fn first_non_interior(&self) -> Option<usize> {
        self.x
            .iter()
            .zip(&self.z)
            .position(|(&x, &z)| !(x > 0.0 && z > 0.0))
    }

    pub fn is_interior(&self) -> bool {
        self.first_non_interior().is_none() && self.mu >= 0.0
    }
}

/// `r_p = A x - b`, `r_d = A^T y + z - c`, `r_c = x.*z - mu e`.
#[derive(Clone, Debug, PartialEq)]
pub struct Residuals {
    pub r_p: Vec<f64>,
    pub r_d: Vec<f64>,
    pub r_c: Vec<f64>,
    norms: [f64; 3],
}

impl Residuals {
    pub fn new(r_p: Vec<f64>, r_d: Vec<f64>, r_c: Vec<f64>) -> Self {
        let norms = [norm2(&r_p), norm2(&r_d), norm2(&r_c)];
        Residuals {
            r_p,
            r_d,
            r_c,
            norms,
        }
    }

    pub fn norm_p(&self) -> f64 {
        self.norms[0]
    }

    pub fn norm_d(&self) -> f64 {
        self.norms[1]
    }

    pub fn norm_c(&self) -> f64 {
        self.norms[2]
    }
}

/// The assembled augmented matrix. Indices `0..m` carry `dy`, indices
/// `m..m+n` carry the x-block unknown `-dx`.
#[derive(Clone, Debug, PartialEq)]
pub struct KktSystem {
    pub k: SymLowerMatrix,
    pub delta_p: f64,
    pub delta_d: f64,
    pub m: usize,
    pub n: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Directions {
    pub d_y: Vec<f64>,
    pub d_x: Vec<f64>,
    pub d_z: Vec<f64>,
}

pub fn compute_residuals(lp: &StandardFormLP, it: &Iterate) -> Result<Residuals> {
    if it.x.len() != lp.n() || it.z.len() != lp.n() || it.y.len() != lp.m() {
        return Err(Error::Structure("iterate dimensions do not match the LP"));
    }
    let mut r_p = lp.a().spmv(&it.x)?;
    for (r, b) in r_p.iter_mut().zip(lp.b()) {
        *r -= b;
    }
    let mut r_d = lp.a().spmv_transpose(&it.y)?;
    for ((r, z), c) in r_d.iter_mut().zip(&it.z).zip(lp.c()) {
        *r += z - c;
    }
    let r_c = it.x.iter().zip(&it.z).map(|(x, z)| x * z - it.mu).collect();
    Ok(Residuals::new(r_p, r_d, r_c))
}

/// `sigma * x^T z / n`; zero for an empty problem.
pub fn duality_mu(it: &Iterate, sigma: f64) -> f64 {
    let n = it.x.len();
    if n == 0 {
        return 0.0;
    }
    sigma * it.gap() / n as f64
}

/// Builds the lower triangle of `[[-delta_p I, A], [A^T, X^-1 Z + delta_d I]]`.
/// The (1,1) block stores nothing when `delta_p == 0`.
pub fn assemble_kkt(a: &CscMatrix, it: &Iterate, delta_p: f64, delta_d: f64) -> Result<KktSystem> {
    let (m, n) = (a.nrows(), a.ncols());
    if it.x.len() != n || it.z.len() != n {
        return Err(Error::Structure("iterate dimensions do not match A"));
    }
    if let Some(index) = it.first_non_interior() {
        return Err(Error::State { index });
    }
    if !(delta_p >= 0.0 && delta_d >= 0.0) {
        return Err(Error::Data("regularization must be nonnegative"));
    }
    // Column j < m of the lower triangle holds row j of A, shifted by m.
    let at = a.transpose();
    let order = m + n;
    let diag_p = usize::from(delta_p > 0.0);
    let mut colptr = Vec::with_capacity(order + 1);
    let mut rowind = Vec::with_capacity(a.nnz() + m * diag_p + n);
    let mut values = Vec::with_capacity(rowind.capacity());
    colptr.push(0);
    for j in 0..m {
        if delta_p > 0.0 {
            rowind.push(j);
            values.push(-delta_p);
        }
        let (cols, vals) = at.col(j);
        rowind.extend(cols.iter().map(|&i| m + i));
        values.extend_from_slice(vals);
        colptr.push(rowind.len());
    }
    for i in 0..n {
        rowind.push(m + i);
        values.push(it.z[i] / it.x[i] + delta_d);
        colptr.push(rowind.len());
    }
    let k = SymLowerMatrix::new(CscMatrix::new(order, order, colptr, rowind, values)?)?;
    Ok(KktSystem {
        k,
        delta_p,
        delta_d,
        m,
        n,
    })
}

/// `[r_p; -r_d + X^-1 r_c]`, paired with the unknown `(dy, -dx)`.
pub fn assemble_rhs(res: &Residuals, it: &Iterate) -> Result<Vec<f64>> {
    let n = it.x.len();
    if res.r_d.len() != n || res.r_c.len() != n {
        return Err(Error::Structure(
            "residual dimensions do not match the iterate",
        ));
    }
    let mut rhs = Vec::with_capacity(res.r_p.len() + n);
    rhs.extend_from_slice(&res.r_p);
    rhs.extend((0..n).map(|i| -res.r_d[i] + res.r_c[i] / it.x[i]));
    Ok(rhs)
}

/// `dx = -d_xblock`, `dz = -X^-1 (r_c + Z dx)`.
pub fn recover_directions(
    d_y: &[f64],
    d_xblock: &[f64],
    it: &Iterate,
    res: &Residuals,
) -> Result<Directions> {
    let n = it.x.len();
    if d_xblock.len() != n || res.r_c.len() != n || d_y.len() != it.y.len() {
        return Err(Error::Structure(
            "direction dimensions do not match the iterate",
        ));
    }
    let d_x: Vec<f64> = d_xblock.iter().map(|v| -v).collect();
    let d_z = (0..n)
        .map(|i| -(res.r_c[i] + it.z[i] * d_x[i]) / it.x[i])
        .collect();
    Ok(Directions {
        d_y: d_y.to_vec(),
        d_x,
        d_z,
    })
}

/// `||rhs - K d|| / ||rhs||`. Zero when both are zero, `+inf` for a zero
/// right-hand side with nonzero `d`.
pub fn inexactness_ratio(sys: &KktSystem, rhs: &[f64], d: &[f64]) -> Result<f64> {
    if rhs.len() != sys.k.order() || d.len() != rhs.len() {
        return Err(Error::Structure("inexactness_ratio: dimension mismatch"));
    }
    Ok(relative_residual(&sys.k, rhs, d))
}

/// Shared by the Krylov stopping test so that certified and audited ratios
/// are computed by the same arithmetic.
pub(crate) fn relative_residual(k: &SymLowerMatrix, rhs: &[f64], d: &[f64]) -> f64 {
    let mut kd = vec![0.0; rhs.len()];
    k.sym_spmv_into(d, &mut kd);
    let res: Vec<f64> = rhs.iter().zip(&kd).map(|(r, q)| r - q).collect();
    let rhs_norm = norm2(rhs);
    if rhs_norm == 0.0 {
        return if d.iter().all(|&v| v == 0.0) {
            0.0
        } else {
            f64::INFINITY
        };
    }
    norm2(&res) / rhs_norm
}
