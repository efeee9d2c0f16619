use num_complex::Complex64;

use super::state::State;
use crate::coefficients::LeslieCoefficients;
use crate::constitutive::{leslie_stress_point, PointKinematics, StressBlock};
use crate::error::ElhError;
use crate::spectral::ops::apply_mask;
use crate::spectral::{divergence, gradient, laplacian, leray_project, Dealias, Evaluator, SpectralField};

/// Form of the Lagrange multiplier used in the director equation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GammaForm {
    /// `-rho1 |w|^2 + |grad d|^2 - lambda2 d.Ad`
    Consistent,
    /// The same without the `lambda2` term; breaks constraint propagation when `lambda2 != 0`.
    DropLambda2,
}

/// Time derivatives of the three unknowns.
#[derive(Debug, Clone)]
pub struct Tendency {
    pub du: SpectralField,
    pub dd: SpectralField,
    pub dw: SpectralField,
    /// Largest |sample| of u, d, w seen while evaluating.
    pub max_sample: f64,
    /// Largest pointwise speed |u|.
    pub max_speed: f64,
}

/// Reusable right-hand-side evaluator for one grid, rule and coefficient set.
#[derive(Debug, Clone)]
pub struct Rhs {
    pub coeffs: LeslieCoefficients,
    pub gamma_form: GammaForm,
    ev: Evaluator,
    keep: Vec<bool>,
    /// When false, `u` is treated as given and `du` is returned as zero.
    evolve_u: bool,
    /// When false, `du` omits `mu4/2 Lap u` (the integrating-factor split).
    include_viscous: bool,
}

impl Rhs {
    pub fn new(grid: &crate::spectral::Grid, coeffs: LeslieCoefficients, rule: Dealias) -> Self {
        let ev = Evaluator::new(grid, rule, 5);
        let keep = ev.keep_mask().to_vec();
        Self {
            coeffs,
            gamma_form: GammaForm::Consistent,
            ev,
            keep,
            evolve_u: true,
            include_viscous: true,
        }
    }

    pub fn with_gamma_form(mut self, form: GammaForm) -> Self {
        self.gamma_form = form;
        self
    }

    pub fn without_viscous(mut self) -> Self {
        self.include_viscous = false;
        self
    }

    /// Director-only mode: `u` is supplied, not evolved.
    pub fn director_only(mut self) -> Self {
        self.evolve_u = false;
        self
    }

    /// Further restrict the retained modes (e.g. to a mollifier ball).
    pub fn with_extra_mask(mut self, mask: &[bool]) -> Self {
        for (k, &m) in self.keep.iter_mut().zip(mask) {
            *k &= m;
        }
        self
    }

    pub fn keep_mask(&self) -> &[bool] {
        &self.keep
    }

    pub fn rule(&self) -> Dealias {
        self.ev.rule()
    }

    pub fn eval(&self, s: &State) -> Result<Tendency, ElhError> {
        let c = &self.coeffs;
        let grid = s.grid();
        let dim = grid.dim();
        let gu = gradient(&s.u);
        let gd = gradient(&s.d);
        let gw = gradient(&s.w);

        let mut comps: Vec<&[Complex64]> = Vec::with_capacity(3 * (dim + dim * dim));
        for f in [&s.u, &gu, &s.d, &gd, &s.w, &gw] {
            comps.extend(f.components());
        }
        let samples = self.ev.to_grid_comps(&comps);
        let (u_s, rest) = samples.split_at(dim);
        let (gu_s, rest) = rest.split_at(dim * dim);
        let (d_s, rest) = rest.split_at(dim);
        let (gd_s, rest) = rest.split_at(dim * dim);
        let (w_s, gw_s) = rest.split_at(dim);

        let len = self.ev.eval_grid().len();
        let nt = if self.evolve_u { dim * dim + dim } else { 0 };
        // outputs: [stress tensor, u.grad u], u.grad d, u.grad w, director forcing
        let mut out = vec![vec![0.0; len]; nt + 3 * dim];
        let mut max_sample: f64 = 0.0;
        let mut max_speed: f64 = 0.0;
        let stress_active = self.evolve_u && !c.is_wave_map();
        let gamma_l2 = match self.gamma_form {
            GammaForm::Consistent => c.lambda2,
            GammaForm::DropLambda2 => 0.0,
        };

        let mut sig = [[0.0; 3]; 3];
        for p in 0..len {
            let mut u = [0.0; 3];
            let mut d = [0.0; 3];
            let mut w = [0.0; 3];
            let mut g_u = [[0.0; 3]; 3];
            let mut speed = 0.0;
            for i in 0..dim {
                u[i] = u_s[i][p];
                d[i] = d_s[i][p];
                w[i] = w_s[i][p];
                speed += u[i] * u[i];
                for j in 0..dim {
                    g_u[i][j] = gu_s[i * dim + j][p];
                }
                max_sample = max_sample.max(u[i].abs()).max(d[i].abs()).max(w[i].abs());
            }
            max_speed = max_speed.max(speed);
            let k = PointKinematics::new(dim, &g_u, &d);

            let mut grad_d_sq = 0.0;
            let mut w_sq = 0.0;
            for i in 0..dim {
                w_sq += w[i] * w[i];
                let mut adv_d = 0.0;
                let mut adv_w = 0.0;
                for j in 0..dim {
                    let gdij = gd_s[i * dim + j][p];
                    grad_d_sq += gdij * gdij;
                    adv_d += u[j] * gdij;
                    adv_w += u[j] * gw_s[i * dim + j][p];
                }
                out[nt + i][p] = adv_d;
                out[nt + dim + i][p] = adv_w;
            }
            let gamma = -c.rho1 * w_sq + grad_d_sq - gamma_l2 * k.dad;
            for i in 0..dim {
                out[nt + 2 * dim + i][p] = gamma * d[i] + c.lambda1 * k.bd[i] + c.lambda2 * k.ad[i];
            }

            if self.evolve_u {
                if stress_active {
                    leslie_stress_point(c, StressBlock::All, dim, &k, &d, &w, &mut sig);
                }
                for i in 0..dim {
                    let mut adv_u = 0.0;
                    for j in 0..dim {
                        adv_u += u[j] * g_u[i][j];
                        // Ericksen tensor M_ij = sum_k d_i d_k d_j d_k
                        let m: f64 = (0..dim)
                            .map(|q| gd_s[q * dim + i][p] * gd_s[q * dim + j][p])
                            .sum();
                        let s = if stress_active { sig[i][j] } else { 0.0 };
                        out[i * dim + j][p] = s - m;
                    }
                    out[dim * dim + i][p] = adv_u;
                }
            }
        }

        let refs: Vec<&[f64]> = out.iter().map(|v| v.as_slice()).collect();
        let spec = self.ev.from_grid_comps(&refs);
        let field = |range: std::ops::Range<usize>| {
            let data: Vec<Complex64> = spec[range.clone()].concat();
            SpectralField::from_data(grid, range.len(), data).expect("shape")
        };

        let du = if self.evolve_u {
            let mut acc = divergence(&field(0..dim * dim))?;
            acc.axpy(-1.0, &field(dim * dim..nt));
            let mut du = leray_project(&acc)?;
            if self.include_viscous {
                du.axpy(0.5 * c.mu4, &laplacian(&s.u));
            }
            apply_mask(&mut du, &self.keep);
            du
        } else {
            SpectralField::zeros(grid, dim)
        };

        let mut dd = s.w.clone();
        dd.axpy(-1.0, &field(nt..nt + dim));
        apply_mask(&mut dd, &self.keep);

        let mut dw = laplacian(&s.d);
        dw.axpy(c.lambda1, &s.w);
        dw.axpy(1.0, &field(nt + 2 * dim..nt + 3 * dim));
        dw.scale(1.0 / c.rho1);
        dw.axpy(-1.0, &field(nt + dim..nt + 2 * dim));
        apply_mask(&mut dw, &self.keep);

        Ok(Tendency {
            du,
            dd,
            dw,
            max_sample,
            max_speed: max_speed.sqrt(),
        })
    }
}

/// Right-hand side of the first-order system with all products de-aliased by `rule`.
pub fn rhs(s: &State, c: &LeslieCoefficients, rule: Dealias) -> Result<Tendency, ElhError> {
    if c.rho1 <= 0.0 {
        return Err(crate::coefficients::CoefficientError::NonPositiveRho1(c.rho1).into());
    }
    Rhs::new(s.grid(), *c, rule).eval(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coefficients::preset;
    use crate::dynamics::init::random_state;
    use crate::spectral::{forward, inverse, Grid, RealField};

    #[test]
    fn equilibrium_has_zero_tendency() {
        let g = Grid::new(2, 16).unwrap();
        let s = State::uniform(&g);
        let t = rhs(&s, &preset("damped_default").unwrap(), Dealias::TwoThirds).unwrap();
        assert_eq!(t.du.max_abs_coeff(), 0.0);
        assert_eq!(t.dd.max_abs_coeff(), 0.0);
        assert!(t.dw.max_abs_coeff() < 1e-16);
    }

    #[test]
    fn wave_map_director_equation_with_frozen_flow() {
        // d = (cos f, sin f) with f = 0.3 sin x1, w = a tangent rate.
        let g = Grid::new(2, 32).unwrap();
        let c = preset("wave_map").unwrap();
        let f = |x: f64| 0.3 * x.sin();
        let fp = |x: f64| 0.3 * x.cos();
        let fpp = |x: f64| -0.3 * x.sin();
        let h = |x: f64| 0.2 * x.cos();
        let d = forward(&RealField::from_fn(&g, 2, |x, i| if i == 0 { f(x[0]).cos() } else { f(x[0]).sin() }));
        let w = forward(&RealField::from_fn(&g, 2, |x, i| {
            let t = [-f(x[0]).sin(), f(x[0]).cos()];
            h(x[0]) * t[i]
        }));
        let s = State::new(0.0, SpectralField::zeros(&g, 2), d, w).unwrap();
        let t = Rhs::new(&g, c, Dealias::Full).director_only().eval(&s).unwrap();
        let dw = inverse(&t.dw);
        for p in 0..g.len() {
            let x = g.coord(p, 0);
            let (ff, a, b, hh) = (f(x), fp(x), fpp(x), h(x));
            // Lap d = f'' t - f'^2 d, gamma = -|w|^2 + f'^2
            let dvec = [ff.cos(), ff.sin()];
            let tvec = [-ff.sin(), ff.cos()];
            for i in 0..2 {
                let lap = b * tvec[i] - a * a * dvec[i];
                let gamma = -hh * hh + a * a;
                let expected = lap + gamma * dvec[i];
                assert!((dw.comp(i)[p] - expected).abs() < 1e-10, "{p} {i}");
            }
        }
    }

    #[test]
    fn velocity_tendency_is_divergence_free() {
        let g = Grid::new(2, 32).unwrap();
        let s = random_state(&g, 0.3, 5, 3.0).unwrap();
        for rule in [Dealias::TwoThirds, Dealias::Full] {
            let t = rhs(&s, &preset("damped_default").unwrap(), rule).unwrap();
            let div = inverse(&divergence(&t.du).unwrap());
            assert!(div.max_abs() < 1e-10);
        }
    }
}
