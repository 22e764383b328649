mod common;

use common::lp_from_planted;
use inexact_ipm_core::ipm::{initial_point, Driver, NoClock, StepRecord};
use inexact_ipm_core::kkt::{compute_residuals, inexactness_ratio};
use inexact_ipm_core::{CscMatrix, FactorParams, IpmParams, StandardFormLP, Status, Triplets};
use inexact_ipm_oracles::planted_lp;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Default)]
struct Audit {
    steps: usize,
    worst_slack: f64,
    contract_violations: usize,
    complementarity: f64,
    gaps: Vec<f64>,
}

impl Audit {
    fn record(&mut self, r: &StepRecord<'_>) {
        self.steps += 1;
        let ratio = inexactness_ratio(r.kkt, r.rhs, r.solution).unwrap();
        if !(ratio <= r.log.eta) {
            self.contract_violations += 1;
        }
        let it = r.iterate;
        let d = r.directions;
        for j in 0..it.x.len() {
            let row = it.z[j] * d.d_x[j] + it.x[j] * d.d_z[j] + r.residuals.r_c[j];
            let scale =
                (it.z[j] * d.d_x[j]).abs() + (it.x[j] * d.d_z[j]).abs() + r.residuals.r_c[j].abs();
            if scale > 0.0 {
                self.complementarity = self.complementarity.max(row.abs() / scale);
            }
        }
        self.gaps.push(it.gap());
    }
}

fn solve_audited(lp: &StandardFormLP, params: IpmParams) -> (inexact_ipm_core::Solution, Audit) {
    let mut audit = Audit {
        worst_slack: f64::INFINITY,
        ..Default::default()
    };
    let sol = {
        let observer = |r: &StepRecord<'_>| audit.record(r);
        let mut driver = Driver::with(lp, params, NoClock, observer);
        driver.solve()
    };
    audit.worst_slack = sol
        .x
        .iter()
        .chain(&sol.z)
        .fold(f64::INFINITY, |m, v| m.min(*v));
    (sol, audit)
}

fn multilevel() -> IpmParams {
    IpmParams {
        factor_params: FactorParams {
            final_dense_threshold: 8,
            ..Default::default()
        },
        ..Default::default()
    }
}

#[test]
fn planted_instances_reach_the_planted_optimum() {
    for (seed, m, n) in [(1u64, 20, 40), (2, 20, 40), (3, 50, 100), (4, 50, 100)] {
        let p = planted_lp(&mut ChaCha8Rng::seed_from_u64(seed), m, n, 0.15);
        let lp = lp_from_planted(&p);
        let (sol, audit) = solve_audited(&lp, multilevel());
        assert_eq!(sol.status, Status::Optimal, "seed {seed}");
        assert!(sol.logs.len() <= 60);
        let want = p.objective();
        assert!(
            (sol.objective - want).abs() <= 1e-6 * (1.0 + want.abs()),
            "{} vs {want}",
            sol.objective
        );
        assert_eq!(audit.contract_violations, 0);
        assert!(audit.worst_slack > 0.0);
        assert!(audit.complementarity <= 1e-12, "{}", audit.complementarity);
        for w in audit.gaps.windows(6) {
            assert!(w[5] <= 0.999 * w[0]);
        }
    }
}

#[test]
fn accepted_iterates_stay_interior() {
    let p = planted_lp(&mut ChaCha8Rng::seed_from_u64(5), 15, 30, 0.2);
    let lp = lp_from_planted(&p);
    let mut driver = Driver::new(&lp, multilevel());
    let mut it = initial_point(&lp);
    for _ in 0..15 {
        let (next, _) = driver.step(&it).unwrap();
        assert!(next.x.iter().chain(&next.z).all(|&v| v > 0.0));
        it = next;
    }
}

fn exact() -> IpmParams {
    IpmParams {
        eta_max: 1e-10,
        eta_min: 1e-10,
        factor_params: FactorParams {
            kappa: 1e12,
            tau_l: 0.0,
            tau_s: 0.0,
            max_levels: 100,
            final_dense_threshold: 4,
            ..Default::default()
        },
        ..Default::default()
    }
}

#[test]
fn exact_solves_shrink_infeasibility_by_the_step_length() {
    let p = planted_lp(&mut ChaCha8Rng::seed_from_u64(6), 10, 25, 0.3);
    let lp = lp_from_planted(&p);
    let mut driver = Driver::new(&lp, exact());
    let mut it = initial_point(&lp);
    for _ in 0..25 {
        let before = compute_residuals(&lp, &it).unwrap().norm_p();
        let (next, log) = driver.step(&it).unwrap();
        let after = compute_residuals(&lp, &next).unwrap().norm_p();
        // Normwise: near the floating-point floor of A x - b the plain
        // relative test cannot hold.
        let scale = before + 1.0 + inexact_ipm_oracles::norm2(lp.b());
        assert!(
            after <= (1.0 - log.alpha_p) * before + 1e-9 * scale,
            "{after} vs {before}"
        );
        it = next;
    }
}

#[test]
fn toy_problem_solves_to_one() {
    let mut t = Triplets::new(1, 2);
    t.push(0, 0, 1.0);
    t.push(0, 1, 1.0);
    let lp = StandardFormLP::new(
        CscMatrix::from_triplets(&t).unwrap(),
        vec![1.0],
        vec![2.0, 1.0],
    )
    .unwrap();
    let (sol, audit) = solve_audited(&lp, exact());
    assert_eq!(sol.status, Status::Optimal);
    assert!((sol.objective - 1.0).abs() <= 1e-7);
    assert_eq!(audit.contract_violations, 0);
}
