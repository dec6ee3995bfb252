//! Computable shadows of multifractal constructions on dyadic digital sets.
//!
//! The crate is organised bottom-up:
//!
//! * [`geometry`]: dyadic cubes, digital sets, enlargements, box counting.
//! * [`net_measure`]: exact dyadic net pre-measures with optimal covers.
//! * [`prescribed`]: nested families `E_α` with prescribed net-measure bounds.
//! * [`ifs`]: self-similar systems, the entropy map and its optimisation.
//! * [`measures`]: atomic measures and the explicit witness constructions.
//! * [`analysis`]: local dimensions, coarse spectra, `L^q` spectra.
//! * [`metric`]: the Fortet–Mourier distance as an exact linear program.
//! * [`oracle`]: slow independent implementations used by tests.
//! * [`acceptance`]: the acceptance criteria as runnable checks.

// `!(x > 0.0)` is the idiom that also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod acceptance;
pub mod analysis;
pub mod error;
pub mod fit;
pub mod geometry;
pub mod ifs;
pub mod measures;
pub mod metric;
pub mod net_measure;
pub mod oracle;
pub mod prescribed;

pub use error::{Error, Result};
