//! Coset states over finite groups, the measurements that discriminate
//! them, and the closed-form sample-complexity bounds they obey.
//!
//! The crate is `no_std` + `alloc` when built without the default `std`
//! feature; `std` only switches on the faster SIMD kernels in the
//! eigensolver.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod bounds;
mod error;
pub mod group;
pub mod linop;
mod math;
pub mod measurements;
pub mod qes;
pub mod states;

pub use error::{Error, Result};
pub use faer::c64;

/// Numerical limits and tolerances shared by every computation.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct Settings {
    /// Largest dimension for which dense operators are materialized.
    pub dense_cap: usize,
    /// Largest weighted Gram matrix the factored path will diagonalize.
    pub gram_cap: usize,
    /// Largest `|G|^k` handled by the symmetry-reduced block route.
    pub symmetry_cap: usize,
    /// Eigenvalue cutoff relative to the largest eigenvalue.
    pub rank_tol: f64,
}

impl Default for Settings {
    fn default() -> Self {
        Settings {
            dense_cap: 4096,
            gram_cap: 6000,
            symmetry_cap: 1 << 22,
            rank_tol: 1e-9,
        }
    }
}
