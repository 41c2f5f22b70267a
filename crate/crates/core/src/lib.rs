//! Simulation lab for learning from evaluation queries.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod ensembles;
pub mod error;
pub mod exec;
pub mod hardness;
pub mod learners;
pub mod oracles;
pub mod problems;
pub mod qmath;

pub use error::{Error, Result};
pub use exec::{Estimate, Execution, LabRng, MonteCarlo};
