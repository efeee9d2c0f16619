use crate::spectral::{inverse, SpectralField};

/// `(max |h|, ||h||_{L^2}, max |d.w|)` with `h = |d|^2 - 1`, sampled on the native grid.
pub fn constraint_monitor(d: &SpectralField, w: &SpectralField) -> (f64, f64, f64) {
    let grid = d.grid();
    let dim = grid.dim();
    let ds = inverse(d);
    let ws = inverse(w);
    let (mut h_max, mut h_sq, mut tan): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for p in 0..grid.len() {
        let mut dd = 0.0;
        let mut dw = 0.0;
        for c in 0..dim {
            dd += ds.comp(c)[p] * ds.comp(c)[p];
            dw += ds.comp(c)[p] * ws.comp(c)[p];
        }
        let h = dd - 1.0;
        h_max = h_max.max(h.abs());
        h_sq += h * h;
        tan = tan.max(dw.abs());
    }
    let cell = grid.volume() / grid.len() as f64;
    (h_max, (h_sq * cell).sqrt(), tan)
}
