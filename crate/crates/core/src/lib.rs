//! Optimal asymmetric quantum cloning via the Choi-Jamiołkowski isomorphism.
//!
//! The optimal single-copy fidelity of a cloning task is the largest
//! eigenvalue of an operator `R` built from the input ensemble and the
//! per-clone weights. This crate builds those operators ([`tasks`]),
//! diagonalizes them densely, per conserved-charge sector, or through the
//! reduced subspace matrices ([`solve`]), and analyzes the optimal cloners:
//! per-clone fidelities, monogamy slacks, and whether an ancilla is needed
//! ([`analyze`]).
//!
//! ```
//! use asymclone::tasks::{CloningTask, Variant, Weights};
//! use asymclone::solve::{optimal_fidelity, Method};
//!
//! let task = CloningTask::new(Variant::UniversalQudit { d: 2, n: 2 }, Weights::uniform(2)).unwrap();
//! let report = optimal_fidelity(&task, Method::Dense).unwrap();
//! assert!((report.fidelity - 5.0 / 6.0).abs() < 1e-10);
//! ```

pub mod analyze;
pub mod densemath;
pub mod error;
pub mod solve;
pub mod spinsym;
pub mod tasks;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
