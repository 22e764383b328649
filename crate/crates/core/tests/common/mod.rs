#![allow(dead_code)]

use inexact_ipm_core::kkt::{assemble_kkt, Iterate, KktSystem};
use inexact_ipm_core::ldl::{MultilevelFactorization, PivotBlock};
use inexact_ipm_core::{CscMatrix, StandardFormLP, SymLowerMatrix, Triplets};
use inexact_ipm_oracles::{zeros, Dense, PlantedLp};
use rand::Rng;

pub fn csc_from_dense(a: &Dense, ncols: usize) -> CscMatrix {
    let mut t = Triplets::new(a.len(), ncols);
    for (i, row) in a.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            if v != 0.0 {
                t.push(i, j, v);
            }
        }
    }
    CscMatrix::from_triplets(&t).unwrap()
}

pub fn dense_from_csc(a: &CscMatrix) -> Dense {
    let mut d = zeros(a.nrows(), a.ncols());
    for (i, j, v) in a.iter() {
        d[i][j] += v;
    }
    d
}

pub fn sym_from_dense(k: &Dense) -> SymLowerMatrix {
    let n = k.len();
    let mut t = Triplets::new(n, n);
    for j in 0..n {
        for i in j..n {
            if k[i][j] != 0.0 {
                t.push(i, j, k[i][j]);
            }
        }
    }
    SymLowerMatrix::from_triplets(&t).unwrap()
}

pub fn dense_from_sym(k: &SymLowerMatrix) -> Dense {
    let n = k.order();
    let mut d = zeros(n, n);
    for (i, j, v) in k.storage().iter() {
        d[i][j] = v;
        d[j][i] = v;
    }
    d
}

pub fn lp_from_planted(p: &PlantedLp) -> StandardFormLP {
    let a = csc_from_dense(&p.a, p.c.len());
    StandardFormLP::new(a, p.b.clone(), p.c.clone()).unwrap()
}

/// Random sparse `m x n` matrix with a guaranteed nonzero in every row.
pub fn random_a<R: Rng>(rng: &mut R, m: usize, n: usize, density: f64) -> Dense {
    let mut a = zeros(m, n);
    for (i, row) in a.iter_mut().enumerate() {
        for v in row.iter_mut() {
            if rng.gen::<f64>() < density {
                *v = rng.gen_range(-1.0..1.0);
            }
        }
        row[(i * 7 + 3) % n] = rng.gen_range(0.5..1.5);
    }
    a
}

pub fn random_iterate<R: Rng>(rng: &mut R, m: usize, n: usize) -> Iterate {
    Iterate {
        x: (0..n)
            .map(|_| 10f64.powf(rng.gen_range(-2.0..2.0)))
            .collect(),
        y: (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect(),
        z: (0..n)
            .map(|_| 10f64.powf(rng.gen_range(-2.0..2.0)))
            .collect(),
        mu: rng.gen_range(0.0..1.0),
    }
}

/// KKT matrix from a random LP with a full-rank `A` (unit block plus noise).
pub fn random_kkt<R: Rng>(rng: &mut R, m: usize, n: usize) -> KktSystem {
    let mut a = random_a(rng, m, n, 3.0 / n as f64);
    for (i, row) in a.iter_mut().enumerate() {
        row[i] = 2.0 + rng.gen::<f64>();
    }
    let it = random_iterate(rng, m, n);
    assemble_kkt(&csc_from_dense(&a, n), &it, 0.0, 0.0).unwrap()
}

fn block_dense(blocks: &[PivotBlock], size: usize) -> Dense {
    let mut d = zeros(size, size);
    let mut pos = 0;
    for b in blocks {
        match *b {
            PivotBlock::One(v) => {
                d[pos][pos] = v;
                pos += 1;
            }
            PivotBlock::Two([a, b, c]) => {
                d[pos][pos] = a;
                d[pos + 1][pos] = b;
                d[pos][pos + 1] = b;
                d[pos + 1][pos + 1] = c;
                pos += 2;
            }
        }
    }
    d
}

/// Unit lower factor of a level, in level order, as a dense matrix.
pub fn level_l(f: &MultilevelFactorization, k: usize) -> Dense {
    let level = &f.levels[k];
    let mut l = inexact_ipm_oracles::identity(level.order());
    for (i, j, v) in level.l.iter() {
        l[i][j] = v;
    }
    l
}

/// Rebuilds `P L D L^T P^T` for the whole chain.
pub fn expand(f: &MultilevelFactorization) -> Dense {
    let fd = &f.final_dense;
    let nf = fd.order();
    let mut lf = zeros(nf, nf);
    for i in 0..nf {
        for j in 0..nf {
            lf[i][j] = fd.l(i, j);
        }
    }
    let t = sandwich(&lf, &block_dense(fd.blocks(), nf));
    let mut s = zeros(nf, nf);
    for (a, &pa) in fd.perm().iter().enumerate() {
        for (b, &pb) in fd.perm().iter().enumerate() {
            s[pa][pb] = t[a][b];
        }
    }
    for k in (0..f.levels.len()).rev() {
        let level = &f.levels[k];
        let n = level.order();
        let acc = level.accepted_count;
        let mut mid = block_dense(&level.d, n);
        for i in 0..n - acc {
            for j in 0..n - acc {
                mid[acc + i][acc + j] = s[i][j];
            }
        }
        let t = sandwich(&level_l(f, k), &mid);
        let mut next = zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                next[i][j] = t[level.local_perm.new_of(i)][level.local_perm.new_of(j)];
            }
        }
        s = next;
    }
    let n = f.order();
    let mut k = zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            k[i][j] = s[f.global_perm.new_of(i)][f.global_perm.new_of(j)];
        }
    }
    k
}

fn sandwich(l: &Dense, d: &Dense) -> Dense {
    use inexact_ipm_oracles::{matmul, transpose};
    matmul(&matmul(l, d), &transpose(l))
}
