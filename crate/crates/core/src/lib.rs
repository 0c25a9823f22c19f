//! Numerical core for anti-Wick quantisation of two oscillators on a
//! non-commutative configuration plane: parameter algebra, the coherent-label
//! map, Gaussian smoothing, free dynamics and Wigner functions.
//!
//! The crate is `no_std` and needs only `alloc`.

#![no_std]
// `!(x > 0.0)` rejects NaN along with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod dynamics;
pub mod error;
pub mod funcspace;
pub mod linalg;
pub mod params;
pub mod phasemap;
pub mod probes;
pub mod quadrature;
pub mod smoothing;
pub mod wigner;

pub use error::{Error, Result};
pub use funcspace::{FunctionKind, TestFunction};
pub use linalg::Mat4;
pub use params::{derive, DerivedParams, ParamSet};
pub use phasemap::{build, PhaseMap, PhasePoint};
pub use quadrature::{Estimate, QuadratureRule};
pub use smoothing::{SmoothedFunction, Smoother};
pub use wigner::WignerGaussian;
