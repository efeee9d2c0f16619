use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

struct Plans {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

type PlanCache = Mutex<HashMap<usize, Arc<Plans>>>;

fn plans(n: usize) -> Arc<Plans> {
    static CACHE: OnceLock<PlanCache> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut map = cache.lock().expect("fft plan cache poisoned");
    map.entry(n)
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            Arc::new(Plans {
                forward: planner.plan_fft_forward(n),
                inverse: planner.plan_fft_inverse(n),
            })
        })
        .clone()
}

/// Unnormalized in-place dim-dimensional transform of a row-major cube of side `n`.
pub fn fft_nd(data: &mut [Complex64], dim: usize, n: usize, inverse: bool) {
    debug_assert_eq!(data.len(), n.pow(dim as u32));
    let p = plans(n);
    let fft = if inverse { &p.inverse } else { &p.forward };
    let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];

    // Last axis is contiguous: one batched call.
    fft.process_with_scratch(data, &mut scratch);

    let mut lines = Vec::new();
    for axis in 0..dim - 1 {
        let stride = n.pow((dim - 1 - axis) as u32);
        let block = n * stride;
        lines.resize(block, Complex64::default());
        for chunk in data.chunks_exact_mut(block) {
            // chunk is an n x stride matrix; transpose so the axis is contiguous.
            for i in 0..n {
                for s in 0..stride {
                    lines[s * n + i] = chunk[i * stride + s];
                }
            }
            fft.process_with_scratch(&mut lines, &mut scratch);
            for i in 0..n {
                for s in 0..stride {
                    chunk[i * stride + s] = lines[s * n + i];
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive_dft(data: &[Complex64], dim: usize, n: usize) -> Vec<Complex64> {
        let len = data.len();
        let unflat = |mut idx: usize| {
            let mut v = [0usize; 3];
            for a in (0..dim).rev() {
                v[a] = idx % n;
                idx /= n;
            }
            v
        };
        (0..len)
            .map(|k| {
                let kk = unflat(k);
                let mut acc = Complex64::default();
                for (x, &val) in data.iter().enumerate() {
                    let xx = unflat(x);
                    let phase: f64 = (0..dim).map(|a| (kk[a] * xx[a]) as f64).sum::<f64>()
                        * -2.0
                        * std::f64::consts::PI
                        / n as f64;
                    acc += val * Complex64::from_polar(1.0, phase);
                }
                acc
            })
            .collect()
    }

    #[test]
    fn matches_naive_dft() {
        for (dim, n) in [(2usize, 6usize), (3, 4)] {
            let len = n.pow(dim as u32);
            let data: Vec<Complex64> = (0..len)
                .map(|i| Complex64::new((i as f64 * 0.37).sin(), (i as f64 * 1.3).cos()))
                .collect();
            let mut fast = data.clone();
            fft_nd(&mut fast, dim, n, false);
            let slow = naive_dft(&data, dim, n);
            for (a, b) in fast.iter().zip(&slow) {
                assert!((a - b).norm() < 1e-11, "{a} vs {b}");
            }
        }
    }
}
