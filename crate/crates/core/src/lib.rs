//! Spin conductances of two-dimensional tight-binding insulators on finite
//! lattice samples, and the bulk-interface correspondence between them.
//!
//! The crate is organised bottom-up:
//!
//! * [`geometry`]: lattices, finite samples, regions and switch functions.
//! * [`operator`]: dense operators on a sample, traces and principal-value traces.
//! * [`calculus`]: density functions, almost-analytic extensions and the
//!   resolvent-integral operators built from them.
//! * [`models`]: bulk tight-binding models, Bloch Hamiltonians and junctions.
//! * [`conductance`]: bulk, interface and reference conductances.
//! * [`config`] and [`record`]: run configuration and serialized output.
//!
//! Conductances are reported in units of `1/2π`: every trace formula carries
//! an extra factor `2π`, so a quantized spin Hall insulator reads `±1`.

pub mod calculus;
pub mod conductance;
pub mod config;
pub mod error;
pub mod geometry;
pub mod linalg;
pub mod models;
pub mod operator;
pub mod pipeline;
pub mod record;
pub mod smoothstep;

pub use error::{Error, Result};

/// Double precision complex scalar used for every operator entry.
pub use faer::c64;

/// Imaginary unit.
pub const I: c64 = c64 { re: 0.0, im: 1.0 };
