//! Paraspec: a numerical laboratory for parabolic dynamics.
//!
//! The crate simulates time-changed and twisted horocycle flows on the
//! modular surface, skew products over irrational rotations, and
//! Furstenberg transformations on tori; estimates their correlation
//! functions; and evaluates the sup-norm multiplier fields behind an
//! abstract absolute-continuity criterion for skew-adjoint generators,
//! together with spectral-measure diagnostics (square-integrability of
//! correlations, density estimates, decay exponents, Toeplitz
//! positivity).
//!
//! Start with the `examples/` directory: each file is a runnable tour of
//! one capability. The `paraspec` binary drives the same machinery from
//! scenario config files.

pub mod cli;
pub mod conditions;
pub mod config;
pub mod error;
pub mod experiment;
pub mod grid;
pub mod modular;
pub mod numerics;
pub mod observables;
pub mod rng;
pub mod sl2;
pub mod spectral;
pub mod svg;
pub mod time_change;
pub mod torus;
pub mod twisted;

pub use error::{Error, Result};
