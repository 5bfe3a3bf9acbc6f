//! Weakly homogeneous generalized variational inequalities: set algebra,
//! maps with declared leading parts, merit functions, solvers, and numeric
//! checks of the existence and uniqueness hypotheses.

pub mod analysis;
pub mod corpus;
pub mod error;
pub mod linalg;
pub mod lp;
pub mod maps;
pub mod problem;
pub mod residuals;
pub mod sets;
pub mod solvers;
pub mod synthetic;

pub use error::{Error, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
