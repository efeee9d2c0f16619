use crate::error::ElhError;
use crate::spectral::{divergence, inverse, Grid, SpectralField};

/// Solver unknowns: velocity, director and director rate.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub t: f64,
    pub u: SpectralField,
    pub d: SpectralField,
    pub w: SpectralField,
}

impl State {
    pub fn new(t: f64, u: SpectralField, d: SpectralField, w: SpectralField) -> Result<Self, ElhError> {
        crate::constitutive::check_fields(&u, &d, &w)?;
        Ok(Self { t, u, d, w })
    }

    /// `u = 0`, `d = e_dim`, `w = 0`.
    pub fn uniform(grid: &Grid) -> Self {
        let dim = grid.dim();
        let mut d = SpectralField::zeros(grid, dim);
        d.comp_mut(dim - 1)[0] = num_complex::Complex64::new(1.0, 0.0);
        Self {
            t: 0.0,
            u: SpectralField::zeros(grid, dim),
            d,
            w: SpectralField::zeros(grid, dim),
        }
    }

    pub fn grid(&self) -> &Grid {
        self.u.grid()
    }

    pub fn is_finite(&self) -> bool {
        self.u.is_finite() && self.d.is_finite() && self.w.is_finite()
    }

    /// Max-norm of div u in real space.
    pub fn divergence_max(&self) -> f64 {
        inverse(&divergence(&self.u).expect("u is a vector")).max_abs()
    }

    /// Largest coefficient-wise difference over all three fields.
    pub fn max_abs_diff(&self, other: &State) -> f64 {
        self.u
            .max_abs_diff(&other.u)
            .max(self.d.max_abs_diff(&other.d))
            .max(self.w.max_abs_diff(&other.w))
    }
}
