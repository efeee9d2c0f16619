use num_complex::Complex64;

use super::fft::fft_nd;
use super::grid::Grid;
use crate::error::ElhError;

/// Fourier coefficients of a (usually real-valued) field with `ncomp` components.
///
/// Coefficients are normalized so that the zero mode is the field mean;
/// components are stored back to back in FFT order.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralField {
    grid: Grid,
    ncomp: usize,
    data: Vec<Complex64>,
}

/// Point samples of a real field on a [`Grid`].
#[derive(Clone, Debug, PartialEq)]
pub struct RealField {
    grid: Grid,
    ncomp: usize,
    data: Vec<f64>,
}

impl SpectralField {
    pub fn zeros(grid: &Grid, ncomp: usize) -> Self {
        Self {
            grid: grid.clone(),
            ncomp,
            data: vec![Complex64::default(); ncomp * grid.len()],
        }
    }

    pub fn from_data(grid: &Grid, ncomp: usize, data: Vec<Complex64>) -> Result<Self, ElhError> {
        if data.len() != ncomp * grid.len() {
            return Err(ElhError::Shape(format!(
                "{} coefficients for {ncomp} components on {grid:?}",
                data.len()
            )));
        }
        Ok(Self {
            grid: grid.clone(),
            ncomp,
            data,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn ncomp(&self) -> usize {
        self.ncomp
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn comp(&self, c: usize) -> &[Complex64] {
        let len = self.grid.len();
        &self.data[c * len..(c + 1) * len]
    }

    pub fn comp_mut(&mut self, c: usize) -> &mut [Complex64] {
        let len = self.grid.len();
        &mut self.data[c * len..(c + 1) * len]
    }

    pub fn components(&self) -> impl Iterator<Item = &[Complex64]> {
        self.data.chunks_exact(self.grid.len())
    }

    pub fn check_same_shape(&self, other: &Self) -> Result<(), ElhError> {
        if self.grid != other.grid || self.ncomp != other.ncomp {
            return Err(ElhError::Shape(format!(
                "{:?} x{} vs {:?} x{}",
                self.grid, self.ncomp, other.grid, other.ncomp
            )));
        }
        Ok(())
    }

    /// `self += a * other`.
    pub fn axpy(&mut self, a: f64, other: &Self) {
        debug_assert_eq!(self.data.len(), other.data.len());
        for (x, y) in self.data.iter_mut().zip(&other.data) {
            *x += y * a;
        }
    }

    pub fn scale(&mut self, a: f64) {
        for x in &mut self.data {
            *x *= a;
        }
    }

    pub fn scaled(&self, a: f64) -> Self {
        let mut out = self.clone();
        out.scale(a);
        out
    }

    /// `a * x + b * y` for same-shaped fields.
    pub fn lin_comb(a: f64, x: &Self, b: f64, y: &Self) -> Self {
        let data = x
            .data
            .iter()
            .zip(&y.data)
            .map(|(p, q)| p * a + q * b)
            .collect();
        Self {
            grid: x.grid.clone(),
            ncomp: x.ncomp,
            data,
        }
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Largest violation of F(-xi) = conj F(xi), ignoring Nyquist modes.
    pub fn hermitian_defect(&self) -> f64 {
        let t = self.grid.tables();
        let mut worst: f64 = 0.0;
        for c in self.components() {
            for idx in 0..c.len() {
                if t.nyquist[idx] {
                    continue;
                }
                let neg = self.grid.negated_index(idx);
                worst = worst.max((c[idx] - c[neg].conj()).norm());
            }
        }
        worst
    }

    /// Pick out a subset of components.
    pub fn select(&self, comps: &[usize]) -> Self {
        let mut data = Vec::with_capacity(comps.len() * self.grid.len());
        for &c in comps {
            data.extend_from_slice(self.comp(c));
        }
        Self {
            grid: self.grid.clone(),
            ncomp: comps.len(),
            data,
        }
    }
}

impl RealField {
    pub fn zeros(grid: &Grid, ncomp: usize) -> Self {
        Self {
            grid: grid.clone(),
            ncomp,
            data: vec![0.0; ncomp * grid.len()],
        }
    }

    pub fn from_data(grid: &Grid, ncomp: usize, data: Vec<f64>) -> Result<Self, ElhError> {
        if data.len() != ncomp * grid.len() {
            return Err(ElhError::Shape(format!(
                "{} samples for {ncomp} components on {grid:?}",
                data.len()
            )));
        }
        Ok(Self {
            grid: grid.clone(),
            ncomp,
            data,
        })
    }

    /// Sample `f(x, component)` at every lattice point.
    pub fn from_fn(grid: &Grid, ncomp: usize, f: impl Fn(&[f64; 3], usize) -> f64) -> Self {
        let len = grid.len();
        let mut data = vec![0.0; ncomp * len];
        for idx in 0..len {
            let ix = grid.unflatten(idx);
            let h = grid.spacing();
            let x = [ix[0] as f64 * h, ix[1] as f64 * h, ix[2] as f64 * h];
            for c in 0..ncomp {
                data[c * len + idx] = f(&x, c);
            }
        }
        Self {
            grid: grid.clone(),
            ncomp,
            data,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn ncomp(&self) -> usize {
        self.ncomp
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn comp(&self, c: usize) -> &[f64] {
        let len = self.grid.len();
        &self.data[c * len..(c + 1) * len]
    }

    pub fn comp_mut(&mut self, c: usize) -> &mut [f64] {
        let len = self.grid.len();
        &mut self.data[c * len..(c + 1) * len]
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|x| x.abs()).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    /// Pointwise Euclidean norm over components.
    pub fn pointwise_norm(&self) -> Vec<f64> {
        let len = self.grid.len();
        (0..len)
            .map(|i| {
                (0..self.ncomp)
                    .map(|c| self.data[c * len + i].powi(2))
                    .sum::<f64>()
                    .sqrt()
            })
            .collect()
    }
}

/// Transform real samples to coefficients; the zero mode is the mean.
pub fn forward(f: &RealField) -> SpectralField {
    let comps: Vec<&[f64]> = (0..f.ncomp).map(|c| f.comp(c)).collect();
    let data = forward_components(&f.grid, &comps).concat();
    SpectralField {
        grid: f.grid.clone(),
        ncomp: f.ncomp,
        data,
    }
}

/// Transform coefficients to real samples. The imaginary part of a
/// non-Hermitian input is discarded (see [`inverse_complex`]).
pub fn inverse(f: &SpectralField) -> RealField {
    let comps: Vec<&[Complex64]> = f.components().collect();
    let data = inverse_components(&f.grid, &comps).concat();
    RealField {
        grid: f.grid.clone(),
        ncomp: f.ncomp,
        data,
    }
}

/// Complex samples of each component, for inputs without Hermitian symmetry.
pub fn inverse_complex(f: &SpectralField) -> Vec<Vec<Complex64>> {
    f.components()
        .map(|c| {
            let mut buf = c.to_vec();
            fft_nd(&mut buf, f.grid.dim(), f.grid.n(), true);
            buf
        })
        .collect()
}

/// Complex samples to coefficients (no symmetry assumed).
pub fn forward_complex(grid: &Grid, samples: &[Complex64]) -> Vec<Complex64> {
    let mut buf = samples.to_vec();
    fft_nd(&mut buf, grid.dim(), grid.n(), false);
    let norm = 1.0 / grid.len() as f64;
    for z in &mut buf {
        *z *= norm;
    }
    buf
}

/// Forward transform of real components, two per complex FFT.
pub(crate) fn forward_components(grid: &Grid, comps: &[&[f64]]) -> Vec<Vec<Complex64>> {
    let len = grid.len();
    let norm = 1.0 / len as f64;
    let mut out = Vec::with_capacity(comps.len());
    let mut buf = vec![Complex64::default(); len];
    for pair in comps.chunks(2) {
        match pair {
            [x, y] => {
                for i in 0..len {
                    buf[i] = Complex64::new(x[i], y[i]);
                }
                fft_nd(&mut buf, grid.dim(), grid.n(), false);
                let mut a = vec![Complex64::default(); len];
                let mut b = vec![Complex64::default(); len];
                for idx in 0..len {
                    let z = buf[idx];
                    let zc = buf[grid.negated_index(idx)].conj();
                    a[idx] = (z + zc) * (0.5 * norm);
                    // (z - zc) / (2i)
                    let d = (z - zc) * (0.5 * norm);
                    b[idx] = Complex64::new(d.im, -d.re);
                }
                out.push(a);
                out.push(b);
            }
            [x] => {
                for i in 0..len {
                    buf[i] = Complex64::new(x[i], 0.0);
                }
                fft_nd(&mut buf, grid.dim(), grid.n(), false);
                out.push(buf.iter().map(|z| z * norm).collect());
            }
            _ => unreachable!(),
        }
    }
    out
}

/// Inverse transform of Hermitian spectra, two per complex FFT.
pub(crate) fn inverse_components(grid: &Grid, comps: &[&[Complex64]]) -> Vec<Vec<f64>> {
    let len = grid.len();
    let mut out = Vec::with_capacity(comps.len());
    let mut buf = vec![Complex64::default(); len];
    for pair in comps.chunks(2) {
        match pair {
            [x, y] => {
                for i in 0..len {
                    // x + i y
                    buf[i] = Complex64::new(x[i].re - y[i].im, x[i].im + y[i].re);
                }
                fft_nd(&mut buf, grid.dim(), grid.n(), true);
                out.push(buf.iter().map(|z| z.re).collect());
                out.push(buf.iter().map(|z| z.im).collect());
            }
            [x] => {
                buf.copy_from_slice(x);
                fft_nd(&mut buf, grid.dim(), grid.n(), true);
                out.push(buf.iter().map(|z| z.re).collect());
            }
            _ => unreachable!(),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn pseudo_random(grid: &Grid, ncomp: usize, seed: u64) -> RealField {
        let mut state = seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) | 1;
        let data = (0..ncomp * grid.len())
            .map(|_| {
                state ^= state << 13;
                state ^= state >> 7;
                state ^= state << 17;
                (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
            })
            .collect();
        RealField::from_data(grid, ncomp, data).unwrap()
    }

    #[test]
    fn constant_field_has_only_mean_mode() {
        let g = Grid::new(2, 8).unwrap();
        let f = RealField::from_fn(&g, 1, |_, _| 2.5);
        let s = forward(&f);
        assert!((s.comp(0)[0] - Complex64::new(2.5, 0.0)).norm() < 1e-15);
        assert!(s.comp(0)[1..].iter().all(|z| z.norm() < 1e-15));
    }

    #[test]
    fn sine_has_two_imaginary_modes() {
        let g = Grid::new(2, 8).unwrap();
        let f = RealField::from_fn(&g, 1, |x, _| x[0].sin());
        let s = forward(&f);
        let plus = g.mode_index(&[1, 0]).unwrap();
        let minus = g.mode_index(&[-1, 0]).unwrap();
        for (idx, z) in s.comp(0).iter().enumerate() {
            let expected = if idx == plus {
                Complex64::new(0.0, -0.5)
            } else if idx == minus {
                Complex64::new(0.0, 0.5)
            } else {
                Complex64::default()
            };
            assert!((z - expected).norm() < 1e-15, "{idx}: {z}");
        }
        // axis 0 is the slowest index
        assert_eq!(plus, 8);
        let _ = PI;
    }

    #[test]
    fn roundtrip_is_identity() {
        for (dim, n, ncomp) in [(2, 16, 3), (3, 8, 2), (2, 6, 1)] {
            let g = Grid::new(dim, n).unwrap();
            let f = pseudo_random(&g, ncomp, 7);
            let back = inverse(&forward(&f));
            let scale = f.max_abs();
            for (a, b) in f.data().iter().zip(back.data()) {
                assert!((a - b).abs() <= 1e-12 * scale);
            }
            assert!(forward(&f).hermitian_defect() < 1e-15);
        }
    }

    #[test]
    fn paired_transforms_match_single() {
        let g = Grid::new(2, 12).unwrap();
        let f = pseudo_random(&g, 2, 3);
        let paired = forward(&f);
        for c in 0..2 {
            let single = forward(&RealField::from_data(&g, 1, f.comp(c).to_vec()).unwrap());
            for (a, b) in paired.comp(c).iter().zip(single.comp(0)) {
                assert!((a - b).norm() < 1e-15);
            }
        }
    }
}
