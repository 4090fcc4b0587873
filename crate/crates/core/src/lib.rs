//! Exact verification of hidden-variable models for the Peres 33-ray spin
//! experiment: the SPIN, TWIN, and MIN conditions, the coloring
//! impossibility for deterministic models, and the effect of pre-sampling
//! randomness on parameter independence.

pub mod cli;
pub mod conditions;
pub mod error;
pub mod exactgeom;
pub mod models;
pub mod montecarlo;
pub mod report;
pub mod suite;
pub mod theorems;
pub mod verdict;

pub use error::{Error, Result};
pub use verdict::{Verdict, Witness};
