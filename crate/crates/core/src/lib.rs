//! Hermite spectral / discontinuous Galerkin solver for the 1D1V
//! Vlasov-Poisson-Fokker-Planck electron system with a kinetic, possibly
//! stiff, electron-to-ion mass ratio parameter, together with the
//! Poisson-Boltzmann limit model it relaxes to.

// `!(x > 0.0)` style guards also reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli_io;
pub mod collisions;
pub mod dg_space;
pub mod diagnostics;
pub mod error;
pub mod hermite_basis;
pub mod integrator;
pub mod limit_model;
pub mod linalg;
pub mod scenarios;
pub mod quadrature;

pub use error::{Error, Result};
