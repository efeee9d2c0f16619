use num_complex::Complex64;

use super::field::SpectralField;
use super::grid::Grid;
use crate::error::ElhError;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Adds one tensor index: component `c * dim + j` holds the j-th derivative of component `c`.
pub fn gradient(f: &SpectralField) -> SpectralField {
    let g = f.grid();
    let dim = g.dim();
    let t = g.tables();
    let mut out = SpectralField::zeros(g, f.ncomp() * dim);
    for c in 0..f.ncomp() {
        let src = f.comp(c);
        for j in 0..dim {
            let dst = out.comp_mut(c * dim + j);
            for idx in 0..src.len() {
                if !t.nyquist[idx] {
                    dst[idx] = src[idx] * I * t.kvec[idx][j];
                }
            }
        }
    }
    out
}

/// Contracts the last tensor index: component `c` is `sum_j d_j F[c * dim + j]`.
pub fn divergence(f: &SpectralField) -> Result<SpectralField, ElhError> {
    let g = f.grid();
    let dim = g.dim();
    if f.ncomp() % dim != 0 {
        return Err(ElhError::Shape(format!(
            "divergence needs a multiple of {dim} components, got {}",
            f.ncomp()
        )));
    }
    let t = g.tables();
    let mut out = SpectralField::zeros(g, f.ncomp() / dim);
    for c in 0..out.ncomp() {
        for j in 0..dim {
            let src = f.comp(c * dim + j).to_vec();
            let dst = out.comp_mut(c);
            for idx in 0..src.len() {
                if !t.nyquist[idx] {
                    dst[idx] += src[idx] * I * t.kvec[idx][j];
                }
            }
        }
    }
    Ok(out)
}

pub fn laplacian(f: &SpectralField) -> SpectralField {
    let t = f.grid().tables();
    let mut out = f.clone();
    for c in 0..out.ncomp() {
        for (idx, z) in out.comp_mut(c).iter_mut().enumerate() {
            *z = if t.nyquist[idx] {
                Complex64::default()
            } else {
                *z * -t.k2[idx]
            };
        }
    }
    out
}

/// Derivative `d_{j1} d_{j2} ...` of every component.
pub fn partial(f: &SpectralField, axes: &[usize]) -> SpectralField {
    let t = f.grid().tables();
    let mut out = f.clone();
    for c in 0..out.ncomp() {
        for (idx, z) in out.comp_mut(c).iter_mut().enumerate() {
            if t.nyquist[idx] {
                *z = Complex64::default();
                continue;
            }
            for &j in axes {
                *z *= I * t.kvec[idx][j];
            }
        }
    }
    out
}

/// Orthogonal projection onto divergence-free vector fields. The mean mode is kept.
pub fn leray_project(u: &SpectralField) -> Result<SpectralField, ElhError> {
    let g = u.grid();
    let dim = g.dim();
    if u.ncomp() != dim {
        return Err(ElhError::Shape(format!(
            "Leray projection needs a {dim}-vector, got {} components",
            u.ncomp()
        )));
    }
    let t = g.tables();
    let mut out = u.clone();
    let len = g.len();
    let data = out.data_mut();
    for idx in 0..len {
        if t.nyquist[idx] {
            for c in 0..dim {
                data[c * len + idx] = Complex64::default();
            }
            continue;
        }
        let k2 = t.k2[idx];
        if k2 == 0.0 {
            continue;
        }
        let k = &t.kvec[idx];
        let mut kdotu = Complex64::default();
        for c in 0..dim {
            kdotu += data[c * len + idx] * k[c];
        }
        let kdotu = kdotu / k2;
        for c in 0..dim {
            data[c * len + idx] -= kdotu * k[c];
        }
    }
    Ok(out)
}

/// Sharp Fourier cutoff: keep modes with Euclidean |xi| <= 1/eps.
pub fn mollify(f: &SpectralField, eps: f64) -> SpectralField {
    assert!(eps > 0.0, "mollifier radius requires eps > 0");
    let radius = 1.0 / eps;
    let t = f.grid().tables();
    let mut out = f.clone();
    for c in 0..out.ncomp() {
        for (idx, z) in out.comp_mut(c).iter_mut().enumerate() {
            if t.k2[idx].sqrt() > radius {
                *z = Complex64::default();
            }
        }
    }
    out
}

/// `sum_xi weight(|xi|^2) sum_c |F(xi)|^2`, scaled so a unit weight gives the squared L2 norm.
pub fn weighted_sq_norm(f: &SpectralField, weight: impl Fn(f64) -> f64) -> f64 {
    let t = f.grid().tables();
    let mut acc = 0.0;
    for c in f.components() {
        for (idx, z) in c.iter().enumerate() {
            acc += weight(t.k2[idx]) * z.norm_sqr();
        }
    }
    acc * f.grid().volume()
}

/// H^s norm with weight (1 + |xi|^2)^s.
pub fn hs_norm(f: &SpectralField, s: f64) -> f64 {
    assert!(s >= 0.0, "hs_norm requires s >= 0");
    weighted_sq_norm(f, |k2| (1.0 + k2).powf(s)).sqrt()
}

/// Squared H^s norm in derivative-sum form, `sum_{k=0}^s |grad^k F|^2`.
pub fn hs_sum_sq(f: &SpectralField, s: usize) -> f64 {
    weighted_sq_norm(f, |k2| (0..=s).map(|k| k2.powi(k as i32)).sum())
}

/// Squared homogeneous norm `|grad^s F|^2` (weight |xi|^(2s)).
pub fn hdot_sq(f: &SpectralField, s: usize) -> f64 {
    weighted_sq_norm(f, |k2| k2.powi(s as i32))
}

pub fn l2_sq(f: &SpectralField) -> f64 {
    weighted_sq_norm(f, |_| 1.0)
}

/// Real L2 inner product over the box via Parseval.
pub fn inner(f: &SpectralField, g: &SpectralField) -> f64 {
    debug_assert_eq!(f.data().len(), g.data().len());
    let acc: f64 = f
        .data()
        .iter()
        .zip(g.data())
        .map(|(a, b)| (a * b.conj()).re)
        .sum();
    acc * f.grid().volume()
}

/// Zero every mode where `keep` is false.
pub fn apply_mask(f: &mut SpectralField, keep: &[bool]) {
    for c in 0..f.ncomp() {
        for (z, &k) in f.comp_mut(c).iter_mut().zip(keep) {
            if !k {
                *z = Complex64::default();
            }
        }
    }
}

/// Ball mask |xi| <= radius.
pub fn ball_mask(grid: &Grid, radius: f64) -> Vec<bool> {
    grid.tables().k2.iter().map(|k2| k2.sqrt() <= radius).collect()
}
