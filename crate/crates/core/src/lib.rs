//! Exact and empirical machinery for small solutions of ternary diagonal
//! quadratic congruences
//!
//! ```text
//! x1^2 + a2 x2^2 + a3 x3^2 = 0 (mod q),   q odd
//! ```
//!
//! The crate is organised bottom-up:
//!
//! * [`arith`]: factorisation, Jacobi symbols and multiplicative functions.
//! * [`characters`]: the Dirichlet character group modulo odd `q` with exact
//!   root-of-unity values, conductors, and short character-sum audits.
//! * [`gauss`]: quadratic Gauss sums and the complete Jacobi sum `T(q1)`.
//! * [`counting`]: box counts `S(a3)`, the main term `M`, the local constant
//!   `C_q`, and smallest-solution search.
//! * [`variance`]: the variance of the error term over `a3` and its split into
//!   quadratic and non-quadratic character contributions.
//! * [`diophantine`]: nearest-integer remainders and the coefficient-aware
//!   height bound, with the small-solution exclusion test.
//!
//! Data-parallel loops go through [`exec::Exec`], which uses rayon when the
//! `parallel` feature is enabled and runs sequentially otherwise.
//! [`audit`] bundles the identity suites and sampled bound tables.

pub mod arith;
pub mod audit;
pub mod characters;
pub mod conv;
pub mod counting;
pub mod diophantine;
mod error;
pub mod exec;
pub mod gauss;
pub mod variance;

pub use arith::{Modulus, Rational};
pub use error::{Error, Result};
pub use exec::Exec;

/// Crate version, echoed in emitted records.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
