//! Dirichlet character sums over non-homogeneous Beatty sequences.
//!
//! The crate evaluates `S_k(α, β, χ; N) = Σ_{n ≤ N} χ(⌊αn + β⌋)` exactly, together
//! with the hybrid sums `U_k(t, χ; M₀, M)`, a smoothed interval indicator and
//! the discrepancy of `{αm + β}`, and runs decay experiments over moduli.
//!
//! All reals that enter a floor or a comparison are [`exact::QuadraticReal`]s.

pub mod beatty;
pub mod characters;
pub mod diophantine;
pub mod error;
pub mod exact;
pub mod harness;
pub mod sums;

pub use error::{Error, Result};

pub use num_bigint;
pub use num_complex;
