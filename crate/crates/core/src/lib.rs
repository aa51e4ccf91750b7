//! Cost-weighted spectral adversary bounds for small Boolean functions.
//!
//! The crate is organised bottom-up:
//!
//! * [`boolfn`]: Boolean functions (total or partial), read-once formulas,
//!   block composition and iteration.
//! * [`specmat`]: dense symmetric matrices labelled by bit strings, Hadamard
//!   products, difference masks and a Jacobi / shifted power eigensolver.
//! * [`adversary`]: adversary matrices with costs, the spectral value
//!   `ADV_α`, the minimax value `MM_α` and the three composition
//!   constructions (matrix, eigenvector, distributions).
//! * [`solver`]: numerical search for lower (matrix) and upper (distribution)
//!   certificates, closed-form AND/OR gadgets, the read-once recursion and the
//!   composition / iteration verifiers.
//! * [`io`] and [`cli`]: JSON file formats and the command-line front end.

pub mod adversary;
pub mod boolfn;
pub mod cli;
pub mod error;
pub mod io;
pub mod solver;
pub mod specmat;

pub use error::{Error, Result};
