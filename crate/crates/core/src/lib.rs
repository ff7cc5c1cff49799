//! One-dimensional three-velocity lattice Boltzmann solver for diffusion,
//! with companion tools that expose its acoustic character at fixed
//! diffusivity: an exact-solution library, a staggered finite-difference
//! solver for the damped acoustic system the scheme actually approaches
//! under grid refinement, a per-wavenumber amplification analysis, and a
//! convergence-study harness with CSV output.
//!
//! All numerical routines are generic over the scalar type through
//! [`scalar::Real`]; the aliases at the crate root pin the `f64` variants
//! used by the experiment harness and the CLI.

// Validation deliberately writes `!(x > lo)` so that NaN fails the check, and
// the 3x3 spectral routines index fixed-size matrices directly.
#![allow(
    clippy::neg_cmp_op_on_partial_ord,
    clippy::needless_range_loop,
    clippy::type_complexity
)]

pub mod dispersion;
pub mod error;
pub mod grid;
pub mod harness;
pub mod haway;
pub mod lattice;
pub mod params;
pub mod reference;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::Real;

/// `f64` scheme parameters, the precision every shipped experiment runs at.
pub type SchemeParams64 = params::SchemeParams<f64>;
/// `f64` periodic grid.
pub type Grid64 = grid::Grid1D<f64>;
/// `f64` population field.
pub type DistributionField64 = lattice::DistributionField<f64>;
/// `f64` moment field.
pub type MomentField64 = lattice::MomentField<f64>;
/// `f64` lattice simulation.
pub type Simulation64 = lattice::Simulation<f64>;
/// `f64` damped acoustic coefficients.
pub type AcousticParams64 = haway::AcousticParams<f64>;
/// `f64` staggered solver.
pub type HawaySolver64 = haway::HawaySolver<f64>;
/// `f64` single-wavenumber spectrum.
pub type DispersionResult64 = dispersion::DispersionResult<f64>;
