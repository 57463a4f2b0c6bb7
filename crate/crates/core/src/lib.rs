//! Exact moment engine for type-B Gaussian statistics.
//!
//! The crate is `no_std` (with `alloc`) and contains only the algorithms:
//!
//! - [`partitions`]: pairings, type-B colorings, crossing/nesting statistics,
//!   set partitions of index tuples.
//! - [`wick`]: closed-form moments as exact polynomials in `(q, rho)`.
//! - [`coxeter_b`]: the hyperoctahedral group, its length statistics and the
//!   symmetrizer `P^(n)` on tensor powers.
//! - [`fock`]: the truncated `(alpha, q)`-Fock space with right creation.
//! - [`spins`]: mixed-spin elements as abstract words and as a Jordan-Wigner
//!   tensor model, with a hypothesis checker.
//! - [`clt`]: finite-`N` moments of the normalized sums, exact expectations
//!   over random commutation signs, and convergence rows.
#![no_std]

extern crate alloc;

pub mod clt;
pub mod coxeter_b;
pub mod error;
pub mod fock;
pub mod linalg;
pub mod partitions;
pub mod poly;
pub mod spins;
pub mod wick;

pub use error::{Error, Result};
pub use nalgebra;
