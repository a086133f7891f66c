//! Primitive integer points on light cones of rational quadratic forms of
//! signature `(n+1, 1)`.
//!
//! The crate enumerates the cone points exactly, evaluates counting
//! functions over caps, sectors and shrinking approximation regions, and
//! compares them with closed-form volume predictions. The [`experiments`]
//! module wraps these into seeded, reproducible campaigns.
//!
//! Vectors are row vectors throughout: a group element `g` acts by
//! `v ↦ v·g`, and a form with Gram matrix `J` is `Q(v) = v J vᵀ`.

// `!(x > 0.0)` rejects NaN on purpose; matrix code indexes in loops.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod cli;
pub mod counting;
pub mod enumeration;
pub mod error;
pub mod experiments;
pub mod geometry;
pub mod group;
pub mod quadform;
pub mod rng;
pub mod spectral;
pub mod valdist;

pub use error::{Error, Result};
