//! Resonant sets, coupling functions and scattering data for
//! one-dimensional Schrödinger operators with δ′-like potentials
//! `ε⁻² α Ψ(x/ε)`, plus a discretized check of their ε → 0 resolvent limits.
//!
//! * [`potential`]: profiles Ψ and their moments
//! * [`shooting`]: boundary data of the fundamental solutions on [-1, 1]
//! * [`resonance`]: resonant set, coupling function, classification of α
//! * [`scattering`]: reflection/transmission in the limit, at finite ε, and
//!   for small ϰ = εk
//! * [`convergence`]: finite-difference resolvent comparison as ε → 0

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod convergence;
pub mod error;
pub mod potential;
pub mod resonance;
pub mod scattering;
pub mod shooting;

pub use error::{Error, Result};
pub use potential::{load_profile, Moments, PotentialProfile, ProfileKind, Segment};
pub use resonance::{classify, coupling, find_resonances, Classification, ResonantValue};
pub use shooting::{neumann_mismatch, shoot, shoot_with, Direction, FundamentalData, ShootOptions};
