//! Riesz p-capacities, energies and equilibrium measures of compact sets in
//! R^n, for every exponent p below the dimension.
//!
//! The kernel is |x − y|^(−p) for p ≠ 0 and log(1/|x − y|) for p = 0. The
//! energy is minimized over probability measures for p ≥ 0 and maximized for
//! p < 0; the capacity is V^(−1/p), or exp(−V) in the logarithmic case.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

pub mod analysis;
pub mod closedform;
pub mod energy;
pub mod error;
pub mod geometry;
pub mod kernel;
pub mod solver;
pub mod specfun;

pub use error::{Error, Result};
pub use geometry::{discretize, NodeCloud, Scheme, SetSpec};
pub use kernel::{EnergyKind, EnergyValue, RieszExponent};
