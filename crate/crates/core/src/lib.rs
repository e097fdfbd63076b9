//! Numerical tractability of linear ill-posed problems.
//!
//! Given the singular values of a compact operator and an index function
//! describing the smoothness of the solution set, the library computes the
//! information complexity of reaching worst-case error `δ` in dimension `d`,
//! the tractability quotient and an empirical classification of the family.

pub mod cli;
pub mod config;
pub mod discretize;
pub mod error;
pub mod index_fn;
pub mod recon;
pub mod report;
pub mod spectrum;
pub mod tract;

pub use error::{Error, Result};
