//! Chance-corrected evaluation of classifiers from contingency tables.
//!
//! Informedness, markedness, their correlation, significance tests,
//! confidence intervals and a Monte Carlo harness for checking them.

pub mod confidence;
pub mod contingency;
pub mod dichotomous;
pub mod error;
pub mod io;
pub mod montecarlo;
pub mod multiclass;
pub mod rng;
pub mod significance;
pub mod special;

pub use contingency::{ContingencyTable, MarginPolicy};
pub use error::{Error, Result};
