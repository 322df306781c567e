//! Guiding-state variational training on a dense statevector simulator,
//! with quantum tangent-kernel diagnostics and seeded experiment drivers.

pub mod ansatz;
pub mod error;
pub mod experiments;
pub mod hamiltonians;
pub mod ntk;
pub mod quantum;
pub mod rng;
pub mod stats;
pub mod training;

pub use error::{Error, Result};
