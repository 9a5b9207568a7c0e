//! Nonlinear balanced truncation for input-affine polynomial systems.
//!
//! The pipeline computes polynomial energy functions, an input-normal /
//! output-diagonal transformation, the balancing transformation, and the
//! balanced realization from which reduced models are truncated.

pub mod energy;
pub mod error;
pub mod inod;
pub mod kron;
pub mod linalg;
pub mod models;
pub mod newton;
pub mod pipeline;
pub mod realization;
pub mod scaling;
pub mod sim;
pub mod system;

pub use error::{NlbtError, Result};
pub use kron::{Mat, PolyVectorField};
pub use system::PolySystem;
