//! Quantum Rényi divergences on finite-dimensional operators.
//!
//! The crate covers the (α, z) family and its limits, the max-relative
//! entropy, Umegaki's relative entropy, measured and maximal variants,
//! channel divergences, and generators for a handful of boundary-case
//! families. Everything works on dense complex matrices of modest size.

pub mod channels;
pub mod classical;
pub mod divergences;
mod error;
mod extended;
pub mod families;
pub mod lab;
pub mod measured;
pub mod opcore;
pub mod random;
pub mod reversetests;
pub mod zlimits;

pub use error::{Error, Result};
pub use extended::ExtendedReal;
pub use opcore::{CMat, HermitianOperator, Projection, SupportCutoff};
