//! Sublinear low-rank linear-system solving from length-squared sampling access.

pub mod error;
pub mod estimators;
pub mod instance;
pub mod io;
pub mod ledger;
pub mod linalg;
pub mod oracle;
pub mod rng;
pub mod sampled_matrix;
pub mod sampled_vector;
pub mod solver;
pub mod subsample;

pub use error::{Error, Result};
pub use ledger::{LedgerSnapshot, QueryLedger};
pub use rng::{StreamRng, StreamSplitter};
pub use sampled_matrix::SampledMatrix;
pub use sampled_vector::SampledVector;
pub use solver::{prepare, prepare_psd, query_entry, sample_solution, SolveState, SolverConfig};
pub use subsample::{subsample, SuccinctDescription};
pub use num_complex::Complex64;
