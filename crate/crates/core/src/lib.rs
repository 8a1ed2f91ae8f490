//! Simulation and analysis toolkit for sequential weak qubit measurements.
//!
//! The library evaluates a three-qubit protocol in which two identical,
//! independent weak detectors read the same observable before a final
//! conditioning measurement, and checks the resulting correlations against
//! the bound obeyed by classical noisy readouts of a single underlying
//! value.  It covers:
//!
//! - dense complex linear algebra and the fixed gate set ([`qcore`]),
//! - quantum instruments, superoperators and the informative/responsive
//!   decomposition of weak measurements ([`instrument`]),
//! - detector-imperfection models with closed-form corrections
//!   ([`imperfect`]),
//! - exact evaluation of the protocol, the inequality and parameter sweeps
//!   ([`protocol`]),
//! - finite-shot Monte-Carlo sampling, contrast estimation and error bars
//!   ([`sampler`]),
//! - constructive calibration of an informative weak measurement from
//!   probability matrices on the Bloch sphere ([`calibration`]),
//! - continuum and classical phase-space counterparts ([`continuum`]).

pub mod calibration;
pub mod consts;
pub mod continuum;
pub mod error;
pub mod imperfect;
pub mod instrument;
pub mod protocol;
pub mod qcore;
pub mod sampler;

pub use error::Error;

/// Format version stamped into every file the toolkit reads or writes.
pub const FORMAT_VERSION: &str = "weakreal/1";
