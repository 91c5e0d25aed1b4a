//! AODE ensembles weighted by likelihood or compression, and their credal
//! extensions that return sets of non-dominated classes.

pub mod cli;
pub mod credal;
pub mod dataset;
pub mod ensemble;
mod error;
pub mod eval;
pub mod mass;
pub mod optimize;
pub mod spode;

pub use error::{Error, Result};
