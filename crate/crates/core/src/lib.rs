//! Pseudospectral simulation and diagnostics for the inertial
//! Ericksen-Leslie system on the periodic box.

pub mod cli_io;
pub mod coefficients;
pub mod constitutive;
pub mod diagnostics;
pub mod dynamics;
pub mod error;
pub mod spectral;

pub use error::ElhError;
