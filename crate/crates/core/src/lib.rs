//! Sparse linear regression with two-stage refinements and the spectral and
//! oracle quantities that govern their error bounds.
//!
//! * [`lasso`]: weighted Lasso by coordinate descent with a KKT certificate.
//! * [`two_stage`]: adaptive Lasso, thresholded Lasso with refitting, tuning levels.
//! * [`eigen`]: sparse, restricted and minimal restricted eigenvalues.
//! * [`oracle`]: the oracle set search and derived scalars.
//! * [`irrep`]: the weighted irrepresentable condition.
//! * [`harness`]: scenario generation, simulation and bound verification.
//!
//! Designs are column-normalized on construction so that `XᵀX/n` has unit
//! diagonal. Indices are 0-based.

pub mod cli;
pub mod eigen;
pub mod error;
pub mod harness;
pub mod irrep;
pub mod lasso;
pub mod linalg;
pub mod oracle;
pub mod report;
pub mod subsets;
pub mod two_stage;

use serde::{Deserialize, Serialize};

pub use error::{Error, Result};

/// Whether the response carries noise (`Y = f⁰ + ε`) or is the target itself.
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq, Hash)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Noisy,
    Noiseless,
}
