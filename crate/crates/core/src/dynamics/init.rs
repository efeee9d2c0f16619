use num_complex::Complex64;
use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256StarStar;

use super::state::State;
use crate::error::ElhError;
use crate::spectral::{forward, inverse, leray_project, Grid, RealField, SpectralField};

/// Recorded in output headers so other implementations can regenerate initial data.
pub const RNG_DESCRIPTION: &str =
    "xoshiro256** seeded by splitmix64(seed); f64 = (next_u64 >> 11) * 2^-53; coefficients uniform in [-1, 1)";

pub const DEFAULT_BAND: f64 = 2.0;

/// Initial-data families.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitialKind {
    /// Band-limited random fields whose size is set by the amplitude.
    Random,
    /// `u = 0`, `d = e_dim`, `w = 0`.
    Uniform,
}

impl std::str::FromStr for InitialKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "random" => Ok(InitialKind::Random),
            "uniform" => Ok(InitialKind::Uniform),
            other => Err(format!("unknown initial kind {other:?} (expected random or uniform)")),
        }
    }
}

impl std::fmt::Display for InitialKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            InitialKind::Random => "random",
            InitialKind::Uniform => "uniform",
        })
    }
}

fn uniform_pm1(rng: &mut Xoshiro256StarStar) -> f64 {
    let unit = (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
    2.0 * unit - 1.0
}

/// True for the representative of each {xi, -xi} pair: first nonzero component positive.
fn is_upper_half(k: &[f64]) -> bool {
    for &kj in k {
        if kj > 0.0 {
            return true;
        }
        if kj < 0.0 {
            return false;
        }
    }
    false
}

/// Real random field with modes 0 < |xi| <= band, coefficients drawn in lattice order.
pub fn random_band_limited(
    grid: &Grid,
    ncomp: usize,
    band: f64,
    rng: &mut Xoshiro256StarStar,
) -> SpectralField {
    let t = grid.tables();
    let dim = grid.dim();
    let mut f = SpectralField::zeros(grid, ncomp);
    for c in 0..ncomp {
        let comp = f.comp_mut(c);
        for idx in 0..grid.len() {
            let k = &t.kvec[idx][..dim];
            if t.nyquist[idx] || t.k2[idx] == 0.0 || t.k2[idx] > band * band || !is_upper_half(k) {
                continue;
            }
            let z = Complex64::new(uniform_pm1(rng), uniform_pm1(rng));
            comp[idx] = z;
            comp[grid.negated_index(idx)] = z.conj();
        }
    }
    f
}

fn normalize_max(f: &mut RealField, target: f64) {
    let m = f.max_abs();
    if m > 0.0 {
        let s = target / m;
        f.data_mut().iter_mut().for_each(|x| *x *= s);
    } else {
        f.data_mut().iter_mut().for_each(|x| *x = 0.0);
    }
}

/// Random compatible initial data.
///
/// `u` is a divergence-free band-limited field with max-norm `amplitude`;
/// `d` normalizes `e_dim + amplitude * p` pointwise for a random `p` with
/// max-norm one; `w` is the part of a random field of max-norm `amplitude`
/// tangent to `d`. All three vanish (or reduce to `e_dim`) at amplitude zero.
pub fn random_state(grid: &Grid, amplitude: f64, seed: u64, band: f64) -> Result<State, ElhError> {
    if !(amplitude >= 0.0) || !amplitude.is_finite() {
        return Err(ElhError::InitialData(format!("amplitude must be >= 0 (got {amplitude})")));
    }
    if !(band > 0.0) || band >= (grid.n() / 2) as f64 {
        return Err(ElhError::InitialData(format!(
            "band must lie in (0, n/2) (got {band} for n = {})",
            grid.n()
        )));
    }
    let dim = grid.dim();
    let len = grid.len();
    let mut rng = Xoshiro256StarStar::seed_from_u64(seed);

    let u_hat = leray_project(&random_band_limited(grid, dim, band, &mut rng))?;
    let p_hat = random_band_limited(grid, dim, band, &mut rng);
    let q_hat = random_band_limited(grid, dim, band, &mut rng);

    let mut u = inverse(&u_hat);
    normalize_max(&mut u, amplitude);

    let mut p = inverse(&p_hat);
    normalize_max(&mut p, 1.0);
    let mut d = RealField::zeros(grid, dim);
    for i in 0..len {
        let mut raw = [0.0; 3];
        for c in 0..dim {
            raw[c] = amplitude * p.comp(c)[i] + if c == dim - 1 { 1.0 } else { 0.0 };
        }
        let norm = raw[..dim].iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm < 1e-8 {
            return Err(ElhError::InitialData(format!(
                "director normalization degenerates (|d| = {norm:e}); retry with a smaller amplitude"
            )));
        }
        for c in 0..dim {
            d.comp_mut(c)[i] = raw[c] / norm;
        }
    }

    let mut q = inverse(&q_hat);
    normalize_max(&mut q, amplitude);
    let mut w = RealField::zeros(grid, dim);
    for i in 0..len {
        let qd: f64 = (0..dim).map(|c| q.comp(c)[i] * d.comp(c)[i]).sum();
        for c in 0..dim {
            w.comp_mut(c)[i] = q.comp(c)[i] - qd * d.comp(c)[i];
        }
    }

    State::new(0.0, forward(&u), forward(&d), forward(&w))
}

pub fn make_initial_data(
    kind: InitialKind,
    amplitude: f64,
    seed: u64,
    grid: &Grid,
    band: f64,
) -> Result<State, ElhError> {
    match kind {
        InitialKind::Random => random_state(grid, amplitude, seed, band),
        InitialKind::Uniform => Ok(State::uniform(grid)),
    }
}
