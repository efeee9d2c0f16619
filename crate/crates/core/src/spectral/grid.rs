use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::ElhError;

/// Per-lattice lookup tables, shared between all grids of the same shape.
#[derive(Debug)]
pub struct GridTables {
    /// Signed integer wavenumber of each index along one axis.
    pub k1d: Vec<f64>,
    /// Wavenumber vector per lattice point (unused trailing entries are zero).
    pub kvec: Vec<[f64; 3]>,
    /// |xi|^2 per lattice point.
    pub k2: Vec<f64>,
    /// True where some component sits on the Nyquist index -n/2.
    pub nyquist: Vec<bool>,
    /// Flat index of -xi (Nyquist components map to themselves).
    pub neg: Vec<usize>,
}

/// Periodic lattice on the box [0, 2pi)^dim.
#[derive(Clone)]
pub struct Grid {
    dim: usize,
    n: usize,
    tables: Arc<GridTables>,
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim && self.n == other.n
    }
}

impl Eq for Grid {}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Grid({}d, n={})", self.dim, self.n)
    }
}

type TableCache = Mutex<HashMap<(usize, usize), Arc<GridTables>>>;

fn table_cache() -> &'static TableCache {
    static CACHE: OnceLock<TableCache> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Signed wavenumber of FFT index `i` on an axis of length `n`.
#[inline]
pub fn wavenumber(i: usize, n: usize) -> i64 {
    if i < n / 2 {
        i as i64
    } else {
        i as i64 - n as i64
    }
}

/// FFT index holding signed wavenumber `k`.
#[inline]
pub fn index_of(k: i64, n: usize) -> usize {
    k.rem_euclid(n as i64) as usize
}

fn build_tables(dim: usize, n: usize) -> GridTables {
    let k1d: Vec<f64> = (0..n).map(|i| wavenumber(i, n) as f64).collect();
    let len = n.pow(dim as u32);
    let mut kvec = Vec::with_capacity(len);
    let mut k2 = Vec::with_capacity(len);
    let mut nyquist = Vec::with_capacity(len);
    let mut neg = Vec::with_capacity(len);
    let half = n / 2;
    for idx in 0..len {
        let mut rem = idx;
        let mut k = [0.0; 3];
        let mut ny = false;
        let mut ix = [0usize; 3];
        for axis in (0..dim).rev() {
            let i = rem % n;
            rem /= n;
            ix[axis] = i;
            k[axis] = k1d[i];
            ny |= i == half;
        }
        k2.push(k.iter().map(|x| x * x).sum());
        kvec.push(k);
        nyquist.push(ny);
        neg.push(ix[..dim].iter().fold(0, |acc, &i| acc * n + (n - i) % n));
    }
    GridTables {
        k1d,
        kvec,
        k2,
        nyquist,
        neg,
    }
}

impl Grid {
    pub fn new(dim: usize, n: usize) -> Result<Self, ElhError> {
        if dim != 2 && dim != 3 {
            return Err(ElhError::Grid(format!("dim must be 2 or 3 (got {dim})")));
        }
        if n < 4 || n % 2 != 0 {
            return Err(ElhError::Grid(format!(
                "n must be an even integer >= 4 (got {n})"
            )));
        }
        let tables = table_cache()
            .lock()
            .expect("grid table cache poisoned")
            .entry((dim, n))
            .or_insert_with(|| Arc::new(build_tables(dim, n)))
            .clone();
        Ok(Self { dim, n, tables })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of lattice points.
    pub fn len(&self) -> usize {
        self.tables.k2.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn tables(&self) -> &GridTables {
        &self.tables
    }

    /// Same dimension, different resolution.
    pub fn resized(&self, n: usize) -> Result<Grid, ElhError> {
        Grid::new(self.dim, n)
    }

    /// Grid spacing 2pi/n.
    pub fn spacing(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.n as f64
    }

    /// Box volume (2pi)^dim.
    pub fn volume(&self) -> f64 {
        (2.0 * std::f64::consts::PI).powi(self.dim as i32)
    }

    /// Multi-index of the flat row-major position `idx`.
    pub fn unflatten(&self, idx: usize) -> [usize; 3] {
        let mut out = [0; 3];
        let mut rem = idx;
        for axis in (0..self.dim).rev() {
            out[axis] = rem % self.n;
            rem /= self.n;
        }
        out
    }

    pub fn flatten(&self, ix: &[usize]) -> usize {
        ix[..self.dim].iter().fold(0, |acc, &i| acc * self.n + i)
    }

    /// Flat index of the mode with signed wavenumber vector `k`, if it is on the lattice.
    pub fn mode_index(&self, k: &[i64]) -> Option<usize> {
        let half = (self.n / 2) as i64;
        let mut idx = 0;
        for &kj in &k[..self.dim] {
            if kj < -half || kj >= half {
                return None;
            }
            idx = idx * self.n + index_of(kj, self.n);
        }
        Some(idx)
    }

    /// Flat index of -xi for the mode at `idx` (Nyquist components map to themselves).
    #[inline]
    pub fn negated_index(&self, idx: usize) -> usize {
        self.tables.neg[idx]
    }

    /// Physical coordinate of lattice point `idx` along `axis`.
    pub fn coord(&self, idx: usize, axis: usize) -> f64 {
        self.unflatten(idx)[axis] as f64 * self.spacing()
    }

    /// Largest Euclidean |xi| on the lattice.
    pub fn max_abs_wavenumber(&self) -> f64 {
        self.tables
            .k2
            .iter()
            .copied()
            .fold(0.0, f64::max)
            .sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wavenumbers_follow_fft_order() {
        let ks: Vec<i64> = (0..8).map(|i| wavenumber(i, 8)).collect();
        assert_eq!(ks, vec![0, 1, 2, 3, -4, -3, -2, -1]);
        for k in -4..4 {
            assert_eq!(wavenumber(index_of(k, 8), 8), k);
        }
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(Grid::new(1, 8).is_err());
        assert!(Grid::new(2, 7).is_err());
        assert!(Grid::new(3, 2).is_err());
        assert!(Grid::new(3, 8).is_ok());
    }

    #[test]
    fn flatten_roundtrip_and_negation() {
        let g = Grid::new(3, 6).unwrap();
        for idx in 0..g.len() {
            assert_eq!(g.flatten(&g.unflatten(idx)), idx);
            let neg = g.negated_index(idx);
            assert_eq!(g.negated_index(neg), idx);
            let (a, b) = (g.tables().kvec[idx], g.tables().kvec[neg]);
            for j in 0..3 {
                if !g.tables().nyquist[idx] {
                    assert_eq!(a[j], -b[j]);
                }
            }
        }
        assert_eq!(g.mode_index(&[1, -1, 2]), Some(g.flatten(&[1, 5, 2])));
        assert_eq!(g.mode_index(&[3, 0, 0]), None);
    }
}
