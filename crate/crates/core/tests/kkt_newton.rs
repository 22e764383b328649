mod common;

use common::{csc_from_dense, dense_from_sym, random_a, random_iterate};
use inexact_ipm_core::kkt::{
    assemble_kkt, assemble_rhs, compute_residuals, inexactness_ratio, recover_directions,
};
use inexact_ipm_core::StandardFormLP;
use inexact_ipm_oracles::{dense_lu_solve, dense_sym_solve, matvec, zeros};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn assembly_matches_block_construction() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..15 {
        let m = rng.gen_range(1..15);
        let n = rng.gen_range(m..=35);
        let a = random_a(&mut rng, m, n, 0.3);
        let it = random_iterate(&mut rng, m, n);
        let k = dense_from_sym(
            &assemble_kkt(&csc_from_dense(&a, n), &it, 0.0, 0.0)
                .unwrap()
                .k,
        );
        let mut want = zeros(m + n, m + n);
        for i in 0..m {
            for j in 0..n {
                want[i][m + j] = a[i][j];
                want[m + j][i] = a[i][j];
            }
        }
        for j in 0..n {
            want[m + j][m + j] = it.z[j] / it.x[j];
        }
        assert_eq!(k, want);
    }
}

#[test]
fn reduced_system_reproduces_newton_step() {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    for _ in 0..10 {
        let m = rng.gen_range(2..10);
        let n = rng.gen_range(m + 1..25);
        let mut a = random_a(&mut rng, m, n, 0.4);
        for (i, row) in a.iter_mut().enumerate() {
            row[i] += 3.0;
        }
        let b: Vec<f64> = (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let c: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let lp = StandardFormLP::new(csc_from_dense(&a, n), b, c).unwrap();
        let mut it = random_iterate(&mut rng, m, n);
        for v in it.x.iter_mut().chain(it.z.iter_mut()) {
            *v = v.clamp(0.1, 10.0);
        }
        let res = compute_residuals(&lp, &it).unwrap();

        // Unknown ordering (dx, dy, dz).
        let size = 2 * n + m;
        let mut big = zeros(size, size);
        let mut rhs = vec![0.0; size];
        for i in 0..m {
            for j in 0..n {
                big[i][j] = a[i][j];
                big[m + j][n + i] = a[i][j];
            }
            rhs[i] = -res.r_p[i];
        }
        for j in 0..n {
            big[m + j][n + m + j] = 1.0;
            rhs[m + j] = -res.r_d[j];
            big[m + n + j][j] = it.z[j];
            big[m + n + j][n + m + j] = it.x[j];
            rhs[m + n + j] = -res.r_c[j];
        }
        let newton = dense_lu_solve(&big, &rhs).unwrap();

        let kkt = assemble_kkt(lp.a(), &it, 0.0, 0.0).unwrap();
        let r = assemble_rhs(&res, &it).unwrap();
        let sol = dense_sym_solve(&dense_from_sym(&kkt.k), &r).unwrap();
        let d = recover_directions(&sol[..m], &sol[m..], &it, &res).unwrap();
        let want = |k: usize| newton[k];
        for j in 0..n {
            assert!((d.d_x[j] - want(j)).abs() <= 1e-9 * (1.0 + want(j).abs()));
            assert!((d.d_z[j] - want(n + m + j)).abs() <= 1e-9 * (1.0 + want(n + m + j).abs()));
        }
        for i in 0..m {
            assert!((d.d_y[i] - want(n + i)).abs() <= 1e-9 * (1.0 + want(n + i).abs()));
        }
        assert!(inexactness_ratio(&kkt, &r, &sol).unwrap() < 1e-10);
    }
}

proptest! {
    #[test]
    fn complementarity_row_holds_for_any_solution(
        n in 1usize..20,
        seed in any::<u64>(),
        noise in 0.0f64..10.0,
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let it = random_iterate(&mut rng, 1, n);
        let res = inexact_ipm_core::Residuals::new(
            vec![0.0],
            (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect(),
            it.x.iter().zip(&it.z).map(|(x, z)| x * z - it.mu).collect(),
        );
        let xblock: Vec<f64> = (0..n).map(|_| noise * rng.gen_range(-1.0..1.0)).collect();
        let d = recover_directions(&[0.0], &xblock, &it, &res).unwrap();
        for j in 0..n {
            let row = it.z[j] * d.d_x[j] + it.x[j] * d.d_z[j] + res.r_c[j];
            let scale = (it.z[j] * d.d_x[j]).abs() + res.r_c[j].abs() + 1e-300;
            prop_assert!(row.abs() <= 1e-13 * scale);
        }
    }

    #[test]
    fn primal_residual_is_affine_in_the_step(seed in any::<u64>(), alpha in 0.0f64..=1.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (m, n) = (4, 9);
        let a = random_a(&mut rng, m, n, 0.5);
        let b: Vec<f64> = (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let c: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let lp = StandardFormLP::new(csc_from_dense(&a, n), b, c).unwrap();
        let mut it = random_iterate(&mut rng, m, n);
        let dx: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let before = compute_residuals(&lp, &it).unwrap();
        let adx = matvec(&a, &dx);
        for (x, d) in it.x.iter_mut().zip(&dx) {
            *x += alpha * d;
        }
        let after = compute_residuals(&lp, &it).unwrap();
        for i in 0..m {
            let want = (1.0 - alpha) * before.r_p[i] + alpha * (before.r_p[i] + adx[i]);
            prop_assert!((after.r_p[i] - want).abs() <= 1e-12 * (1.0 + want.abs() + before.r_p[i].abs()));
        }
    }
}
