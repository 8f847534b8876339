//! Proper dependence measurement for nominal variables.
//!
//! The central quantity is γ*, Goodman–Kruskal's γ maximized over every way of
//! numbering the categories of the nominal variable(s). The crate provides the
//! exact estimator, its population counterpart, the classical contingency
//! measures it is compared against, asymptotic confidence intervals and an
//! independence test, and a Monte Carlo harness for coverage, bias, size and
//! power studies.

pub mod classical;
pub mod concordance;
pub mod crosstab;
pub mod distributions;
mod error;
pub mod gamma_star;
pub mod inference;
pub mod numbering;
pub mod sample;
pub mod simulation;
pub mod table;

pub use error::{Error, Result};
pub use numbering::Numbering;
pub use sample::{ColumnRef, ColumnSpec, NominalValue, PairedSample, Response, SampleKind};
pub use table::{ContingencyTable, TableMode};
