use crate::coefficients::LeslieCoefficients;
use crate::constitutive::{PointKinematics, Samples};
use crate::dynamics::State;
use crate::error::ElhError;
use crate::spectral::ops::{hdot_sq, l2_sq};
use crate::spectral::{Dealias, Evaluator};

/// `(|u|^2 + rho1 |w|^2 + |grad d|^2) / 2` over the box.
pub fn basic_energy(s: &State, c: &LeslieCoefficients) -> f64 {
    0.5 * (l2_sq(&s.u) + c.rho1 * l2_sq(&s.w) + hdot_sq(&s.d, 1))
}

/// The five dissipation terms of the basic energy law.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct BasicDissipation {
    /// `mu4/2 |grad u|^2`
    pub visc: f64,
    /// `mu1 |d.Ad|^2`
    pub mu1: f64,
    /// `-lambda1 |w + Bd|^2`
    pub lam1: f64,
    /// `-2 lambda2 <w + Bd, Ad>`
    pub cross: f64,
    /// `(mu5 + mu6) |Ad|^2`
    pub mu56: f64,
    pub total: f64,
    /// `mu4/2 |grad u|^2 + mu1 |d.Ad|^2 - lambda1 |w + Bd + (lambda2/lambda1) Ad|^2
    /// + (mu5 + mu6 + lambda2^2/lambda1) |Ad|^2`, available when `lambda1 != 0`.
    pub completed_square: Option<f64>,
    /// Sum of absolute values of the individual contributions.
    pub scale: f64,
}

impl BasicDissipation {
    /// Whether the two groupings agree within `tol * scale` (vacuous when only one exists).
    pub fn groupings_agree(&self, tol: f64) -> bool {
        match self.completed_square {
            Some(cs) => (cs - self.total).abs() <= tol * self.scale.max(f64::MIN_POSITIVE),
            None => true,
        }
    }
}

/// `rule` names the band the fields occupy; integrals are exact for fields in that band.
pub fn basic_dissipation(
    s: &State,
    c: &LeslieCoefficients,
    rule: Dealias,
) -> Result<BasicDissipation, ElhError> {
    let grid = s.grid();
    let dim = grid.dim();
    let ev = Evaluator::for_band(grid, rule, 5);
    let smp = Samples::gather(&ev, &s.u, &s.d, &s.w);
    let ratio = if c.lambda1 != 0.0 { c.lambda2 / c.lambda1 } else { 0.0 };
    let mut dad2 = vec![0.0; smp.len];
    let mut n2 = vec![0.0; smp.len];
    let mut nad = vec![0.0; smp.len];
    let mut ad2 = vec![0.0; smp.len];
    let mut sq = vec![0.0; smp.len];
    for p in 0..smp.len {
        let (gu, d, w) = smp.at(p);
        let k = PointKinematics::new(dim, &gu, &d);
        dad2[p] = k.dad * k.dad;
        for i in 0..dim {
            let n = w[i] + k.bd[i];
            n2[p] += n * n;
            nad[p] += n * k.ad[i];
            ad2[p] += k.ad[i] * k.ad[i];
            let q = n + ratio * k.ad[i];
            sq[p] += q * q;
        }
    }
    let visc = 0.5 * c.mu4 * hdot_sq(&s.u, 1);
    let mu1 = c.mu1 * ev.integrate(&dad2);
    let lam1 = -c.lambda1 * ev.integrate(&n2);
    let cross = -2.0 * c.lambda2 * ev.integrate(&nad);
    let ad_sq = ev.integrate(&ad2);
    let mu56 = (c.mu5 + c.mu6) * ad_sq;
    let total = visc + mu1 + lam1 + cross + mu56;
    let completed_square = (c.lambda1 != 0.0).then(|| {
        visc + mu1 - c.lambda1 * ev.integrate(&sq)
            + (c.mu5 + c.mu6 + c.lambda2 * c.lambda2 / c.lambda1) * ad_sq
    });
    let scale = visc.abs() + mu1.abs() + lam1.abs() + cross.abs() + mu56.abs();
    Ok(BasicDissipation {
        visc,
        mu1,
        lam1,
        cross,
        mu56,
        total,
        completed_square,
        scale,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coefficients::{preset, LeslieCoefficients};
    use crate::dynamics::init::random_state;
    use crate::spectral::{forward, gradient, inverse, Grid, RealField, SpectralField};

    #[test]
    fn wave_map_without_flow_does_not_dissipate() {
        let g = Grid::new(2, 16).unwrap();
        let mut s = random_state(&g, 0.3, 1, 2.0).unwrap();
        s.u = SpectralField::zeros(&g, 2);
        let b = basic_dissipation(&s, &preset("wave_map").unwrap(), Dealias::Full).unwrap();
        assert_eq!(b.total, 0.0);
    }

    #[test]
    fn constant_director_matches_quadrature_oracle() {
        // w = 0, d = e1, u = (sin x2, 0): grad u has only d_2 u_1 = cos x2,
        // so A_12 = A_21 = cos x2 / 2 = -B_21 ... evaluated here on a fine grid.
        let g = Grid::new(2, 16).unwrap();
        let fine = Grid::new(2, 96).unwrap();
        let c = LeslieCoefficients::from_independent(0.7, 1.3, 0.9, 0.4, -0.8, 1.7).unwrap();
        let u = forward(&RealField::from_fn(&g, 2, |x, i| if i == 0 { x[1].sin() + 0.3 * (x[0] + x[1]).cos() } else { -0.3 * (x[0] + x[1]).cos() }));
        let d = forward(&RealField::from_fn(&g, 2, |_, i| if i == 0 { 1.0 } else { 0.0 }));
        let s = State::new(0.0, u.clone(), d, SpectralField::zeros(&g, 2)).unwrap();
        let b = basic_dissipation(&s, &c, Dealias::Full).unwrap();

        let mut acc = [0.0; 5];
        let h2 = fine.volume() / fine.len() as f64;
        for p in 0..fine.len() {
            let (x1, x2) = (fine.coord(p, 0), fine.coord(p, 1));
            let s12 = -0.3 * (x1 + x2).sin();
            // d_j u_i
            let gu = [[s12, x2.cos() + s12], [-s12, -s12]];
            let a = |i: usize, j: usize| 0.5 * (gu[i][j] + gu[j][i]);
            let bb = |i: usize, j: usize| 0.5 * (gu[i][j] - gu[j][i]);
            let ad = [a(0, 0), a(1, 0)];
            let bd = [bb(0, 0), bb(0, 1)];
            let grad_sq: f64 = gu.iter().flatten().map(|v| v * v).sum();
            acc[0] += 0.5 * c.mu4 * grad_sq;
            acc[1] += c.mu1 * a(0, 0).powi(2);
            acc[2] += -c.lambda1 * (bd[0].powi(2) + bd[1].powi(2));
            acc[3] += -2.0 * c.lambda2 * (bd[0] * ad[0] + bd[1] * ad[1]);
            acc[4] += (c.mu5 + c.mu6) * (ad[0].powi(2) + ad[1].powi(2));
        }
        let got = [b.visc, b.mu1, b.lam1, b.cross, b.mu56];
        for (x, y) in got.iter().zip(acc.iter()) {
            assert!((x - y * h2).abs() < 1e-11, "{x} {}", y * h2);
        }
        let _ = inverse(&gradient(&u));
    }

    #[test]
    fn zero_lambda1_class_can_have_negative_dissipation() {
        // With lambda1 = 0 the cross term -2 lambda2 <w, Ad> has no sign.
        let g = Grid::new(2, 16).unwrap();
        let c = preset("zero_lambda1_default").unwrap();
        let mut s = random_state(&g, 0.0, 0, 2.0).unwrap();
        s.u = forward(&RealField::from_fn(&g, 2, |x, i| if i == 0 { 0.1 * x[1].sin() } else { 0.0 }));
        // d = e2 so Ad = (A_12, A_22) = (cos x2 / 20, 0); pick w along +Ad, tangent to d.
        s.w = forward(&RealField::from_fn(&g, 2, |x, i| if i == 0 { 10.0 * x[1].cos() } else { 0.0 }));
        let b = basic_dissipation(&s, &c, Dealias::Full).unwrap();
        assert!(b.total < 0.0, "{b:?}");
    }
}
