//! Inexact primal-dual interior point method for linear programs in standard
//! form, working only with the augmented (indefinite) KKT system.
//!
//! Each Newton system is solved to a relative residual `eta` with the
//! simplified QMR iteration, preconditioned by a multilevel incomplete
//! indefinite `LDL^T` factorization whose inverse-factor norm is bounded by
//! `kappa`. The normal-equation matrix `A D^{-1} A^T` is never formed.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, timing and the
//! command line live in the `inexact-ipm` companion crate.

#![no_std]

extern crate alloc;

pub mod error;
pub mod ipm;
pub mod kkt;
pub mod ldl;
pub mod lp;
pub mod ordering;
pub mod sparse;
pub mod sqmr;
pub mod vec_ops;

pub use error::{Error, Result};
pub use ipm::{IpmParams, IterationLog, Solution, Status};
pub use kkt::{Directions, Iterate, KktSystem, Residuals};
pub use ldl::{FactorParams, MultilevelFactorization};
pub use lp::StandardFormLP;
pub use sparse::{CscMatrix, Permutation, SymLowerMatrix, Triplets};
pub use sqmr::{SqmrOutcome, SqmrParams, SqmrStatus};
