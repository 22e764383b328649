//! Dense reference computations used only by tests.
//!
//! Nothing here depends on the solver crates: matrices are plain row-major
//! `Vec<Vec<f64>>` and every algorithm is written independently of the
//! sparse code it is used to check.

use rand::Rng;

pub type Dense = Vec<Vec<f64>>;

#[derive(Debug, Clone, PartialEq)]
pub enum OracleError {
    Singular,
    Infeasible,
}

pub fn zeros(r: usize, c: usize) -> Dense {
    vec![vec![0.0; c]; r]
}

pub fn identity(n: usize) -> Dense {
    let mut a = zeros(n, n);
    for (i, row) in a.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    a
}

pub fn matvec(a: &Dense, x: &[f64]) -> Vec<f64> {
    a.iter()
        .map(|row| row.iter().zip(x).map(|(u, v)| u * v).sum())
        .collect()
}

pub fn transpose(a: &Dense) -> Dense {
    if a.is_empty() {
        return Vec::new();
    }
    (0..a[0].len())
        .map(|j| a.iter().map(|row| row[j]).collect())
        .collect()
}

pub fn matmul(a: &Dense, b: &Dense) -> Dense {
    let inner = b.len();
    let cols = if inner == 0 { 0 } else { b[0].len() };
    a.iter()
        .map(|row| {
            (0..cols)
                .map(|j| (0..inner).map(|k| row[k] * b[k][j]).sum())
                .collect()
        })
        .collect()
}

pub fn frobenius(a: &Dense) -> f64 {
    a.iter().flatten().map(|v| v * v).sum::<f64>().sqrt()
}

pub fn sub(a: &Dense, b: &Dense) -> Dense {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.iter().zip(y).map(|(u, v)| u - v).collect())
        .collect()
}

pub fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Dense symmetric solve by Bunch–Kaufman partial pivoting (`LDL^T`).
pub fn dense_sym_solve(k: &Dense, rhs: &[f64]) -> Result<Vec<f64>, OracleError> {
    let n = k.len();
    let alpha = (1.0 + 17f64.sqrt()) / 8.0;
    let mut a = k.clone();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut l = identity(n);
    // (start, size) of each diagonal block
    let mut blocks: Vec<(usize, usize)> = Vec::new();
    let scale = a.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
    let tiny = 1e-300f64.max(1e-15 * scale);

    let swap =
        |a: &mut Dense, l: &mut Dense, perm: &mut Vec<usize>, p: usize, q: usize, k: usize| {
            if p == q {
                return;
            }
            a.swap(p, q);
            for row in a.iter_mut() {
                row.swap(p, q);
            }
            for j in 0..k {
                let t = l[p][j];
                l[p][j] = l[q][j];
                l[q][j] = t;
            }
            perm.swap(p, q);
        };

    let mut k0 = 0;
    while k0 < n {
        let a_kk = a[k0][k0].abs();
        let (mut r, mut lambda) = (k0, 0.0f64);
        for i in k0 + 1..n {
            if a[i][k0].abs() > lambda {
                lambda = a[i][k0].abs();
                r = i;
            }
        }
        if a_kk.max(lambda) <= tiny {
            return Err(OracleError::Singular);
        }
        let choice = if a_kk >= alpha * lambda {
            Some(k0)
        } else {
            let sigma = (k0..n)
                .filter(|&j| j != r)
                .map(|j| a[r][j].abs())
                .fold(0.0, f64::max);
            if a_kk * sigma >= alpha * lambda * lambda {
                Some(k0)
            } else if a[r][r].abs() >= alpha * sigma {
                Some(r)
            } else {
                None
            }
        };
        match choice {
            Some(p) => {
                swap(&mut a, &mut l, &mut perm, k0, p, k0);
                pivot1(&mut a, &mut l, k0);
                blocks.push((k0, 1));
                k0 += 1;
            }
            None => {
                swap(&mut a, &mut l, &mut perm, k0 + 1, r, k0);
                let (d11, d21, d22) = (a[k0][k0], a[k0 + 1][k0], a[k0 + 1][k0 + 1]);
                let det = d11 * d22 - d21 * d21;
                if det == 0.0 {
                    return Err(OracleError::Singular);
                }
                for i in k0 + 2..n {
                    let (s1, s2) = (a[i][k0], a[i][k0 + 1]);
                    l[i][k0] = (s1 * d22 - s2 * d21) / det;
                    l[i][k0 + 1] = (s2 * d11 - s1 * d21) / det;
                }
                for i in k0 + 2..n {
                    for j in k0 + 2..n {
                        a[i][j] -= l[i][k0] * a[j][k0] + l[i][k0 + 1] * a[j][k0 + 1];
                    }
                }
                blocks.push((k0, 2));
                k0 += 2;
            }
        }
    }
    // Solve P K P^T (P x) = P b.
    let mut y: Vec<f64> = perm.iter().map(|&i| rhs[i]).collect();
    for j in 0..n {
        for i in j + 1..n {
            y[i] -= l[i][j] * y[j];
        }
    }
    for &(s, size) in &blocks {
        if size == 1 {
            y[s] /= a[s][s];
        } else {
            let (d11, d21, d22) = (a[s][s], a[s + 1][s], a[s + 1][s + 1]);
            let det = d11 * d22 - d21 * d21;
            let (u, v) = (y[s], y[s + 1]);
            y[s] = (d22 * u - d21 * v) / det;
            y[s + 1] = (d11 * v - d21 * u) / det;
        }
    }
    for j in (0..n).rev() {
        for i in j + 1..n {
            y[j] -= l[i][j] * y[i];
        }
    }
    let mut x = vec![0.0; n];
    for (pos, &i) in perm.iter().enumerate() {
        x[i] = y[pos];
    }
    Ok(x)
}

fn pivot1(a: &mut Dense, l: &mut Dense, k: usize) {
    let n = a.len();
    let d = a[k][k];
    for i in k + 1..n {
        l[i][k] = a[i][k] / d;
    }
    for i in k + 1..n {
        for j in k + 1..n {
            a[i][j] -= l[i][k] * a[j][k];
        }
    }
}

/// Conjugate-direction solve for SPD `k`: A-orthogonalize the unit vectors
/// by Gram–Schmidt and expand the solution in that basis.
pub fn conjugate_directions_solve(k: &Dense, rhs: &[f64]) -> Vec<f64> {
    let n = k.len();
    let mut dirs: Vec<(Vec<f64>, Vec<f64>, f64)> = Vec::with_capacity(n);
    let mut x = vec![0.0; n];
    for i in 0..n {
        let mut p = vec![0.0; n];
        p[i] = 1.0;
        for _pass in 0..2 {
            for (q, kq, qkq) in &dirs {
                let c: f64 = p.iter().zip(kq).map(|(u, v)| u * v).sum::<f64>() / qkq;
                for (pj, qj) in p.iter_mut().zip(q) {
                    *pj -= c * qj;
                }
            }
        }
        let kp = matvec(k, &p);
        let pkp: f64 = p.iter().zip(&kp).map(|(u, v)| u * v).sum();
        let coef = p.iter().zip(rhs).map(|(u, v)| u * v).sum::<f64>() / pkp;
        for (xj, pj) in x.iter_mut().zip(&p) {
            *xj += coef * pj;
        }
        dirs.push((p, kp, pkp));
    }
    x
}

/// General dense solve by Gaussian elimination with partial pivoting.
pub fn dense_lu_solve(a: &Dense, rhs: &[f64]) -> Result<Vec<f64>, OracleError> {
    let n = a.len();
    let mut m: Dense = a
        .iter()
        .zip(rhs)
        .map(|(row, &b)| {
            let mut r = row.clone();
            r.push(b);
            r
        })
        .collect();
    let scale = a.iter().flatten().fold(0.0f64, |s, v| s.max(v.abs()));
    for k in 0..n {
        let p = (k..n)
            .max_by(|&i, &j| m[i][k].abs().total_cmp(&m[j][k].abs()))
            .unwrap();
        if m[p][k].abs() <= 1e-13 * scale.max(1e-300) {
            return Err(OracleError::Singular);
        }
        m.swap(k, p);
        for i in k + 1..n {
            let f = m[i][k] / m[k][k];
            if f != 0.0 {
                for j in k..=n {
                    m[i][j] -= f * m[k][j];
                }
            }
        }
    }
    let mut x = vec![0.0; n];
    for k in (0..n).rev() {
        let s: f64 = (k + 1..n).map(|j| m[k][j] * x[j]).sum();
        x[k] = (m[k][n] - s) / m[k][k];
    }
    Ok(x)
}

/// Exact `||L^{-1}||_inf` for unit lower triangular `l` by explicit
/// column-by-column inversion.
pub fn dense_inv_norm(l: &Dense) -> f64 {
    let n = l.len();
    let mut inv = zeros(n, n);
    for c in 0..n {
        for i in 0..n {
            let mut v = if i == c { 1.0 } else { 0.0 };
            for j in 0..i {
                v -= l[i][j] * inv[j][c];
            }
            inv[i][c] = v;
        }
    }
    inv.iter()
        .map(|row| row.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Minimum over all basic feasible solutions of `min c^T x, A x = b, x >= 0`.
/// Returns `(objective, x)`.
pub fn lp_vertex_oracle(a: &Dense, b: &[f64], c: &[f64]) -> Result<(f64, Vec<f64>), OracleError> {
    let m = a.len();
    let n = c.len();
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut subset: Vec<usize> = (0..m).collect();
    if m > n {
        return Err(OracleError::Infeasible);
    }
    loop {
        let basis: Dense = (0..m)
            .map(|i| subset.iter().map(|&j| a[i][j]).collect())
            .collect();
        if let Ok(xb) = dense_lu_solve(&basis, b) {
            if xb.iter().all(|&v| v >= -1e-10) {
                let mut x = vec![0.0; n];
                for (k, &j) in subset.iter().enumerate() {
                    x[j] = xb[k].max(0.0);
                }
                let obj: f64 = c.iter().zip(&x).map(|(u, v)| u * v).sum();
                if best.as_ref().is_none_or(|(bo, _)| obj < *bo) {
                    best = Some((obj, x));
                }
            }
        }
        // next m-subset of 0..n in lexicographic order
        let mut i = m;
        loop {
            if i == 0 {
                return best.ok_or(OracleError::Infeasible);
            }
            i -= 1;
            if subset[i] < n - m + i {
                subset[i] += 1;
                for k in i + 1..m {
                    subset[k] = subset[k - 1] + 1;
                }
                break;
            }
        }
        if m == 0 {
            return best.ok_or(OracleError::Infeasible);
        }
    }
}

/// Number of nonzeros in the exact Cholesky-pattern factor (diagonal
/// included) when eliminating in `order`, by explicit elimination-graph
/// simulation on the pattern of `adj`.
pub fn symbolic_factor_nnz(adj: &[Vec<usize>], order: &[usize]) -> usize {
    let n = adj.len();
    let mut graph: Vec<std::collections::BTreeSet<usize>> =
        adj.iter().map(|r| r.iter().copied().collect()).collect();
    let mut done = vec![false; n];
    let mut nnz = 0;
    for &v in order {
        let nbrs: Vec<usize> = graph[v].iter().copied().filter(|&u| !done[u]).collect();
        nnz += 1 + nbrs.len();
        for &a in &nbrs {
            for &b in &nbrs {
                if a != b {
                    graph[a].insert(b);
                }
            }
        }
        done[v] = true;
    }
    nnz
}

/// A feasible LP with a planted primal-dual optimum.
#[derive(Debug, Clone)]
pub struct PlantedLp {
    pub a: Dense,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub z: Vec<f64>,
}

impl PlantedLp {
    pub fn objective(&self) -> f64 {
        self.c.iter().zip(&self.x).map(|(u, v)| u * v).sum()
    }
}

/// Random `m x n` LP with optimal pair `(x*, y*, z*)`: `x*` is positive on
/// `m` random columns, `z*` positive elsewhere, `b = A x*`, `c = A^T y* + z*`.
/// `A` has roughly `density` of its entries nonzero, at least one per row
/// and column, and full row rank (rejection sampled).
pub fn planted_lp<R: Rng>(rng: &mut R, m: usize, n: usize, density: f64) -> PlantedLp {
    assert!(m <= n);
    loop {
        let mut a = zeros(m, n);
        for row in a.iter_mut() {
            for v in row.iter_mut() {
                if rng.gen::<f64>() < density {
                    *v = rng.gen_range(-1.0..1.0);
                }
            }
        }
        for i in 0..m {
            let j = rng.gen_range(0..n);
            a[i][j] = rng.gen_range(0.5..1.5);
        }
        for j in 0..n {
            if a.iter().all(|row| row[j] == 0.0) {
                let i = rng.gen_range(0..m);
                a[i][j] = rng.gen_range(-1.0..1.0);
            }
        }
        if rank(&a) < m {
            continue;
        }
        let mut cols: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let s = rng.gen_range(k..n);
            cols.swap(k, s);
        }
        let support = &cols[..m];
        let mut x = vec![0.0; n];
        let mut z = vec![0.0; n];
        for j in 0..n {
            if support.contains(&j) {
                x[j] = rng.gen_range(0.5..2.0);
            } else {
                z[j] = rng.gen_range(0.5..2.0);
            }
        }
        let y: Vec<f64> = (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let b = matvec(&a, &x);
        let at = transpose(&a);
        let c: Vec<f64> = matvec(&at, &y).iter().zip(&z).map(|(u, v)| u + v).collect();
        return PlantedLp { a, b, c, x, y, z };
    }
}

/// Numerical rank by Gaussian elimination with partial pivoting.
pub fn rank(a: &Dense) -> usize {
    let mut m = a.clone();
    let rows = m.len();
    if rows == 0 {
        return 0;
    }
    let cols = m[0].len();
    let scale = m
        .iter()
        .flatten()
        .fold(0.0f64, |s, v| s.max(v.abs()))
        .max(1e-300);
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let p = (r..rows)
            .max_by(|&i, &j| m[i][c].abs().total_cmp(&m[j][c].abs()))
            .unwrap();
        if m[p][c].abs() <= 1e-10 * scale {
            continue;
        }
        m.swap(r, p);
        for i in r + 1..rows {
            let f = m[i][c] / m[r][c];
            for j in c..cols {
                m[i][j] -= f * m[r][j];
            }
        }
        r += 1;
    }
    r
}

/// Random symmetric matrix with roughly `density` off-diagonal fill and
/// diagonal entries of random sign (indefinite in general).
pub fn random_symmetric<R: Rng>(rng: &mut R, n: usize, density: f64) -> Dense {
    let mut a = zeros(n, n);
    for i in 0..n {
        a[i][i] = rng.gen_range(-2.0..2.0);
        for j in 0..i {
            if rng.gen::<f64>() < density {
                let v = rng.gen_range(-1.0..1.0);
                a[i][j] = v;
                a[j][i] = v;
            }
        }
    }
    a
}
