//! MPS input, standard-form reduction, Matrix Market dumps, JSON reports and
//! the command-line driver around [`inexact_ipm_core`].

pub mod cli;
pub mod matrix_market;
pub mod mps;
pub mod report;
pub mod standard_form;

pub use mps::{parse_mps, LpModel, MpsError, RowSense};
pub use report::RunReport;
pub use standard_form::{recover_solution, to_standard_form, ModelError, VarMap};
