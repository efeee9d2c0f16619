use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use super::field::{
    forward_complex, forward_components, inverse_components, RealField, SpectralField,
};
use super::fft::fft_nd;
use super::grid::Grid;
use crate::error::ElhError;

/// How nonlinear products are de-aliased.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dealias {
    /// Keep |k_j| < n/3 on every axis; products are formed on the native grid.
    TwoThirds,
    /// Keep every non-Nyquist mode; products are formed on a grid padded for their degree.
    Full,
}

impl Dealias {
    pub fn name(self) -> &'static str {
        match self {
            Dealias::TwoThirds => "two_thirds",
            Dealias::Full => "full",
        }
    }

    /// Whether the mode at `idx` of `grid` survives the rule.
    pub fn keeps(self, grid: &Grid, idx: usize) -> bool {
        let t = grid.tables();
        match self {
            Dealias::TwoThirds => {
                let n = grid.n() as f64;
                t.kvec[idx][..grid.dim()].iter().all(|k| 3.0 * k.abs() < n)
            }
            Dealias::Full => !t.nyquist[idx],
        }
    }

    pub fn mask(self, grid: &Grid) -> Vec<bool> {
        (0..grid.len()).map(|i| self.keeps(grid, i)).collect()
    }

    /// Largest per-axis wavenumber kept by the rule.
    pub fn max_kept_component(self, n: usize) -> usize {
        match self {
            Dealias::TwoThirds => (n - 1) / 3,
            Dealias::Full => n / 2 - 1,
        }
    }
}

impl fmt::Display for Dealias {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Dealias {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "two_thirds" | "2/3" => Ok(Dealias::TwoThirds),
            "full" => Ok(Dealias::Full),
            other => Err(format!(
                "unknown dealias rule {other:?} (expected two_thirds or full)"
            )),
        }
    }
}

/// Smallest even size >= `min` whose only prime factors are 2, 3 and 5.
pub fn fft_friendly_size(min: usize) -> usize {
    let mut m = min.max(2);
    loop {
        if m % 2 == 0 {
            let mut r = m;
            for p in [2, 3, 5] {
                while r % p == 0 {
                    r /= p;
                }
            }
            if r == 1 {
                return m;
            }
        }
        m += 1;
    }
}

/// Moves fields between a base grid and the grid on which products of a
/// given degree are formed, applying the de-aliasing rule on the way back.
#[derive(Clone, Debug)]
pub struct Evaluator {
    base: Grid,
    eval: Grid,
    rule: Dealias,
    keep: Vec<bool>,
    /// Eval-grid index of every base mode that is carried over (`None` for dropped modes).
    map: Vec<Option<usize>>,
}

impl Evaluator {
    pub fn new(base: &Grid, rule: Dealias, degree: usize) -> Self {
        let m = match rule {
            Dealias::TwoThirds => base.n(),
            Dealias::Full => {
                let k = base.n() / 2 - 1;
                fft_friendly_size((degree + 1) * k + 1).max(base.n())
            }
        };
        Self::on_size(base, rule, m)
    }

    /// Padded for fields that occupy only the modes kept by `band`, so that
    /// products up to `degree` and integrals up to `degree + 1` are exact.
    pub fn for_band(base: &Grid, band: Dealias, degree: usize) -> Self {
        let k = band.max_kept_component(base.n());
        let m = fft_friendly_size((degree + 1) * k + 1).max(base.n());
        Self::on_size(base, Dealias::Full, m)
    }

    fn on_size(base: &Grid, rule: Dealias, m: usize) -> Self {
        let eval = base.resized(m).expect("padded grid is valid");
        let t = base.tables();
        let map = (0..base.len())
            .map(|idx| {
                if m == base.n() {
                    Some(idx)
                } else if t.nyquist[idx] {
                    None
                } else {
                    let k = t.kvec[idx];
                    let ki = [k[0] as i64, k[1] as i64, k[2] as i64];
                    eval.mode_index(&ki)
                }
            })
            .collect();
        Self {
            base: base.clone(),
            eval,
            rule,
            keep: rule.mask(base),
            map,
        }
    }

    pub fn base(&self) -> &Grid {
        &self.base
    }

    pub fn eval_grid(&self) -> &Grid {
        &self.eval
    }

    pub fn rule(&self) -> Dealias {
        self.rule
    }

    pub fn keep_mask(&self) -> &[bool] {
        &self.keep
    }

    /// Zero every mode the rule discards.
    pub fn mask(&self, f: &mut SpectralField) {
        super::ops::apply_mask(f, &self.keep);
    }

    fn pad(&self, src: &[Complex64]) -> Vec<Complex64> {
        if self.eval.n() == self.base.n() {
            return src.to_vec();
        }
        let mut out = vec![Complex64::default(); self.eval.len()];
        for (idx, slot) in self.map.iter().enumerate() {
            if let Some(e) = slot {
                out[*e] = src[idx];
            }
        }
        out
    }

    /// Samples of the given real-field components on the evaluation grid.
    pub fn to_grid_comps(&self, comps: &[&[Complex64]]) -> Vec<Vec<f64>> {
        if self.eval.n() == self.base.n() {
            return inverse_components(&self.eval, comps);
        }
        let padded: Vec<Vec<Complex64>> = comps.iter().map(|c| self.pad(c)).collect();
        let refs: Vec<&[Complex64]> = padded.iter().map(|v| v.as_slice()).collect();
        inverse_components(&self.eval, &refs)
    }

    pub fn to_grid(&self, f: &SpectralField) -> RealField {
        let comps: Vec<&[Complex64]> = f.components().collect();
        let data = self.to_grid_comps(&comps).concat();
        RealField::from_data(&self.eval, f.ncomp(), data).expect("shape")
    }

    /// Coefficients on the base grid of real samples on the evaluation grid, masked by the rule.
    pub fn from_grid_comps(&self, comps: &[&[f64]]) -> Vec<Vec<Complex64>> {
        let spec = forward_components(&self.eval, comps);
        spec.into_iter().map(|s| self.truncate(&s)).collect()
    }

    pub fn from_grid(&self, f: &RealField) -> SpectralField {
        let comps: Vec<&[f64]> = (0..f.ncomp()).map(|c| f.comp(c)).collect();
        let data = self.from_grid_comps(&comps).concat();
        SpectralField::from_data(&self.base, f.ncomp(), data).expect("shape")
    }

    fn truncate(&self, spec: &[Complex64]) -> Vec<Complex64> {
        self.map
            .iter()
            .zip(&self.keep)
            .map(|(slot, &keep)| match slot {
                Some(e) if keep => spec[*e],
                _ => Complex64::default(),
            })
            .collect()
    }

    /// Quadrature of a pointwise integrand sampled on the evaluation grid.
    pub fn integrate(&self, samples: &[f64]) -> f64 {
        samples.iter().sum::<f64>() * self.eval.volume() / self.eval.len() as f64
    }

    fn to_grid_complex(&self, src: &[Complex64]) -> Vec<Complex64> {
        let mut buf = self.pad(src);
        fft_nd(&mut buf, self.eval.dim(), self.eval.n(), true);
        buf
    }

    fn from_grid_complex(&self, samples: &[Complex64]) -> Vec<Complex64> {
        self.truncate(&forward_complex(&self.eval, samples))
    }
}

/// Pointwise product of scalar fields, formed on a grid large enough for
/// `degree` factors and truncated back. Inputs need not be Hermitian.
pub fn dealiased_product(
    fields: &[&SpectralField],
    degree: usize,
    rule: Dealias,
) -> Result<SpectralField, ElhError> {
    if degree < 2 || degree != fields.len() {
        return Err(ElhError::Shape(format!(
            "degree {degree} must equal the number of factors ({}) and be >= 2",
            fields.len()
        )));
    }
    let grid = fields[0].grid();
    for f in fields {
        if f.grid() != grid || f.ncomp() != 1 {
            return Err(ElhError::Shape(
                "dealiased_product takes scalar fields on one grid".into(),
            ));
        }
    }
    let ev = Evaluator::new(grid, rule, degree);
    let mut acc = ev.to_grid_complex(fields[0].comp(0));
    for f in &fields[1..] {
        for (a, b) in acc.iter_mut().zip(ev.to_grid_complex(f.comp(0))) {
            *a *= b;
        }
    }
    SpectralField::from_data(grid, 1, ev.from_grid_complex(&acc))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::grid::index_of;

    fn mode(g: &Grid, k: &[i64], amp: Complex64) -> SpectralField {
        let mut f = SpectralField::zeros(g, 1);
        f.comp_mut(0)[g.mode_index(k).unwrap()] = amp;
        f
    }

    #[test]
    fn padded_sizes() {
        assert_eq!(fft_friendly_size(91), 96);
        assert_eq!(fft_friendly_size(187), 192);
        let g = Grid::new(2, 32).unwrap();
        assert_eq!(Evaluator::new(&g, Dealias::Full, 5).eval_grid().n(), 96);
        assert_eq!(Evaluator::new(&g, Dealias::Full, 2).eval_grid().n(), 48);
        assert_eq!(Evaluator::new(&g, Dealias::TwoThirds, 5).eval_grid().n(), 32);
        assert_eq!(Dealias::TwoThirds.max_kept_component(64), 21);
        assert_eq!(Dealias::TwoThirds.max_kept_component(32), 10);
    }

    #[test]
    fn two_single_modes_multiply_to_their_sum() {
        let g = Grid::new(2, 16).unwrap();
        let one = Complex64::new(1.0, 0.0);
        let a = mode(&g, &[2, -1], one);
        let b = mode(&g, &[3, 4], one);
        for rule in [Dealias::Full, Dealias::TwoThirds] {
            let p = dealiased_product(&[&a, &b], 2, rule).unwrap();
            let target = g.mode_index(&[5, 3]).unwrap();
            for (idx, z) in p.comp(0).iter().enumerate() {
                let expected = if idx == target && rule.keeps(&g, idx) { one } else { Complex64::default() };
                assert!((z - expected).norm() < 1e-14, "{rule} {idx} {z}");
            }
        }
    }

    #[test]
    fn multiplying_by_one_is_identity() {
        let g = Grid::new(2, 16).unwrap();
        let mut f = SpectralField::zeros(&g, 1);
        for (i, z) in f.comp_mut(0).iter_mut().enumerate() {
            *z = Complex64::new((i as f64).sin(), (i as f64 * 0.7).cos());
        }
        super::super::ops::apply_mask(&mut f, &Dealias::Full.mask(&g));
        let one = mode(&g, &[0, 0], Complex64::new(1.0, 0.0));
        let p = dealiased_product(&[&f, &one], 2, Dealias::Full).unwrap();
        assert!(p.max_abs_diff(&f) < 1e-14);
    }

    /// Direct convolution on the integer lattice, truncated to |k_j| <= kmax.
    fn convolve(g: &Grid, a: &SpectralField, b: &SpectralField, kmax: i64) -> Vec<Complex64> {
        let n = g.n();
        let mut out = vec![Complex64::default(); g.len()];
        for i in 0..g.len() {
            for j in 0..g.len() {
                let (ka, kb) = (g.tables().kvec[i], g.tables().kvec[j]);
                let k = [(ka[0] + kb[0]) as i64, (ka[1] + kb[1]) as i64];
                if k.iter().all(|x| x.abs() <= kmax) {
                    let idx = index_of(k[0], n) * n + index_of(k[1], n);
                    out[idx] += a.comp(0)[i] * b.comp(0)[j];
                }
            }
        }
        out
    }

    #[test]
    fn matches_direct_convolution() {
        let g = Grid::new(2, 12).unwrap();
        let band = 3.0;
        let mk = |seed: f64| {
            let mut f = SpectralField::zeros(&g, 1);
            for (i, z) in f.comp_mut(0).iter_mut().enumerate() {
                let k = g.tables().kvec[i];
                if k[0].abs() <= band && k[1].abs() <= band {
                    *z = Complex64::new((seed * i as f64).sin(), (seed + i as f64).cos());
                }
            }
            f
        };
        let (a, b) = (mk(1.3), mk(2.9));
        // Full keeps |k| <= 5 on n = 12.
        let full = dealiased_product(&[&a, &b], 2, Dealias::Full).unwrap();
        let direct = convolve(&g, &a, &b, 5);
        for (x, y) in full.comp(0).iter().zip(&direct) {
            assert!((x - y).norm() < 1e-12);
        }
        // With max |k| <= n/3 = 4 inputs, the unpadded 2/3 product agrees too.
        let tt = dealiased_product(&[&a, &b], 2, Dealias::TwoThirds).unwrap();
        let direct = convolve(&g, &a, &b, 3);
        for (x, y) in tt.comp(0).iter().zip(&direct) {
            assert!((x - y).norm() < 1e-12);
        }
    }
}
