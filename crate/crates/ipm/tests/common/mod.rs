#![allow(dead_code)]

use std::path::PathBuf;

use indexmap::IndexMap;
use inexact_ipm::mps::{parse_mps, LpModel};
use inexact_ipm::standard_form::{recover_solution, to_standard_form};
use inexact_ipm_core::ipm::ipm_solve;
use inexact_ipm_core::{IpmParams, Status};

pub fn fixture_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

/// Valid fixtures with their known optimal objectives.
pub const FIXTURES: &[(&str, f64)] = &[
    ("toy.mps", 1.0),
    ("lg_rows.mps", -2.8),
    ("bounds.mps", 18.0),
    ("free_format.mps", -0.5),
    ("negative_upper.mps", -10.0),
    ("transport.mps", 515.0),
    ("mixed_bounds.mps", -7.25),
];

pub struct Solved {
    pub model: LpModel,
    pub status: Status,
    pub values: IndexMap<String, f64>,
    pub objective: f64,
    pub violation: f64,
}

pub fn solve_fixture(name: &str, params: &IpmParams) -> Solved {
    let text = std::fs::read_to_string(fixture_dir().join(name)).unwrap();
    let model = parse_mps(&text).unwrap();
    let (lp, map) = to_standard_form(&model).unwrap();
    let sol = ipm_solve(&lp, params);
    let values = recover_solution(&map, &sol.x).unwrap();
    Solved {
        objective: model.objective_value(&values),
        violation: model.max_violation(&values),
        status: sol.status,
        values,
        model,
    }
}
