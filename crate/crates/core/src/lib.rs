//! Homological invariants of FI-modules over prime fields.

pub mod cli;
pub mod comb;
pub mod error;
pub mod exactlin;
pub mod free;
pub mod harness;
pub mod functors;
pub mod invariants;
pub mod koszul;
pub mod module;
pub mod oracles;
pub mod presentation;
pub mod resolution;

pub use error::{Error, Result};
