//! Periodic grids, transforms, spectral calculus and de-aliased products.

pub mod dealias;
pub mod fft;
pub mod field;
pub mod grid;
pub mod ops;

pub use dealias::{dealiased_product, Dealias, Evaluator};
pub use field::{forward, inverse, RealField, SpectralField};
pub use grid::Grid;
pub use ops::{
    divergence, gradient, hs_norm, inner, laplacian, leray_project, mollify, partial,
};
