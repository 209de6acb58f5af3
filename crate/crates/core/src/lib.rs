//! Numerical laboratory for conformally invariant energies of surfaces and
//! links, their canonical families, and sweepout width estimates.

// Guards like `!(x > 0.0)` are written to reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![allow(clippy::needless_range_loop)]

pub mod canonical;
pub mod conformal;
pub mod energies;
pub mod error;
pub mod geom;
pub mod numeric;
pub mod optimize;
pub mod spectra;
pub mod spectral;
pub mod sweepouts;
pub mod verify;

pub use error::{Error, Result};
