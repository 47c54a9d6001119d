//! Exact certification of ReLU network properties.

pub mod exact;
pub mod lp;
pub mod arrangement;
pub mod injectivity;
pub mod range;
pub mod zonotope;
pub mod verification;
pub mod reductions;
pub mod io;
pub mod generate;
pub mod cli;
