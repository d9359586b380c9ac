//! Casimir-Polder potentials of ground-state atoms near weakly dielectric
//! bodies, computed from the Born expansion of the Green tensor on the
//! imaginary frequency axis, together with many-atom van der Waals
//! interactions.
//!
//! Units are reduced: `hbar = c = eps0 = mu0 = 1`, so frequencies and inverse
//! lengths share one unit and polarizabilities are volumes.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod born;
pub mod error;
pub mod geometry;
pub mod kernels;
pub mod materials;
pub mod quad;
pub mod ring;
pub mod strata;
pub mod vdw;

pub use error::{Error, Result};

/// A point or vector in three-dimensional space.
pub type Point = nalgebra::Vector3<f64>;
