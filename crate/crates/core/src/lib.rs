//! Numerical machinery for ultrahyperbolic operators on `R^m x R^n`:
//! point-centred null-coordinate geometry, the associated Carleman weight,
//! boundary/interior observation regions, deterministic quadrature over the
//! cone exterior, and verification of the weighted energy estimates that the
//! weight supports.
//!
//! The crate is `no_std`-compatible (with `alloc`); the default `std` feature
//! routes float math through the standard library, otherwise `libm` is used.
//!
//! Everything here is pure and reentrant: domains, rules, fields, and
//! parameter sets are immutable after construction, and integration uses a
//! fixed pairwise reduction so results do not depend on evaluation order.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod domain;
pub mod error;
pub mod fields;
pub(crate) mod fmath;
pub mod geometry;
pub mod logsum;
pub mod par;
pub mod quadrature;
pub mod regions;
pub mod rng;
pub mod verify;
pub mod weight;

pub use error::Error;
pub use geometry::{GradientSplit, NullFrame, PointRef, ReferencePoint, Signature, SpaceTimePoint};

/// Crate-wide result alias.
pub type Result<T> = core::result::Result<T, Error>;
