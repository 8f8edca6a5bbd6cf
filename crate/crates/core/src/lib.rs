//! Finite-dimensional algebraic quantum mechanics for a measuring system
//! that contains its own observer.
//!
//! The crate models a two-level system `S` measured by an observer `O` with a
//! three-state pointer. It builds the entangled post-measurement state,
//! restricts states to observer subalgebras, turns commutative restrictions
//! into classical outcome distributions, and samples per-event pointer
//! records.

pub mod algebra;
pub mod cli;
pub mod error;
pub mod linalg;
pub mod measurement;
pub mod states;
pub mod stochastic;
pub mod table;
pub mod tolerance;

pub use error::{Error, Result};
