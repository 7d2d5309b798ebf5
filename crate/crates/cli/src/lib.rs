//! Command-line front end for the slow-light SFG model.

pub mod checks;
pub mod error;
pub mod output;
pub mod phasematch;
pub mod run;
pub mod scenario;
