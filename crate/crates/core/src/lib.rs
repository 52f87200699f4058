//! Nondeterministic communication tensors: construction, rank brackets,
//! lower-bound certificates and simulation of quantum multiparty protocols.

pub mod error;
pub mod functions;
pub mod io;
pub mod matrix;
pub mod protocol;
pub mod rank_bounds;
pub mod report;
pub mod scalar;
pub mod seed;
pub mod tensor;
pub mod verify;

pub use error::{Error, Result};
