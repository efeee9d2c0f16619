use super::integrate::{PicardSettings, SolverConfig};
use super::rhs::Rhs;
use super::state::State;
use crate::coefficients::LeslieCoefficients;
use crate::constitutive::{leslie_stress_block, StressBlock};
use crate::error::ElhError;
use crate::spectral::ops::apply_mask;
use crate::spectral::{divergence, leray_project, SpectralField};

const INNER_TOL: f64 = 1e-14;
const INNER_MAX: usize = 400;

/// Convergence record of one Picard step.
#[derive(Debug, Clone, PartialEq)]
pub struct PicardReport {
    /// Max coefficient change between successive outer iterates.
    pub history: Vec<f64>,
    /// Inner sweeps used by the velocity solve in each outer iteration.
    pub velocity_sweeps: Vec<usize>,
    /// Inner sweeps used by the director solve in each outer iteration.
    pub director_sweeps: Vec<usize>,
}

impl PicardReport {
    pub fn iterations(&self) -> usize {
        self.history.len()
    }

    /// Ratios of successive residuals, starting after the first iteration.
    pub fn ratios(&self) -> Vec<f64> {
        self.history.windows(2).map(|p| p[1] / p[0]).collect()
    }
}

fn multiply(f: &mut SpectralField, factor: &[f64]) {
    for c in 0..f.ncomp() {
        for (z, m) in f.comp_mut(c).iter_mut().zip(factor) {
            *z *= *m;
        }
    }
}

/// One trapezoidal step solved by the decoupled iteration.
///
/// Outer iterate `k` updates the velocity with the director lagged at `k` and the
/// director with the velocity lagged at `k`. The stress depends linearly on the new
/// velocity; that dependence is resolved by inner sweeps that carry
/// `(mu4/2 + kappa) Lap` implicitly and `kappa Lap` explicitly.
pub fn picard_step_with_report(
    s: &State,
    c: &LeslieCoefficients,
    config: &SolverConfig,
) -> Result<(State, PicardReport), ElhError> {
    let settings: PicardSettings = config
        .picard
        .ok_or_else(|| ElhError::Config(vec!["solver.picard settings are required for picard_step".into()]))?;
    if c.rho1 <= 0.0 {
        return Err(crate::coefficients::CoefficientError::NonPositiveRho1(c.rho1).into());
    }
    let grid = s.grid();
    let dim = grid.dim();
    let dt = config.dt;
    let h = 0.5 * dt;
    let rule = config.dealias;
    let full = Rhs::new(grid, *c, rule)
        .with_gamma_form(config.gamma_form)
        .without_viscous();
    let director = Rhs::new(grid, *c, rule)
        .with_gamma_form(config.gamma_form)
        .director_only();
    let keep = full.keep_mask().to_vec();

    let kappa = 0.5 * (c.mu1.abs() + c.mu2.abs() + c.mu3.abs() + c.mu5.abs() + c.mu6.abs());
    let k2 = &grid.tables().k2;
    let visc_half: Vec<f64> = k2.iter().map(|k2| -0.5 * c.mu4 * k2).collect();
    let solve: Vec<f64> = k2.iter().map(|k2| 1.0 / (1.0 + h * (0.5 * c.mu4 + kappa) * k2)).collect();
    let zero = SpectralField::zeros(grid, dim);

    // Everything evaluated at the old time level.
    let f0 = full.eval(s)?;
    let mut u_base = s.u.clone();
    let mut lap_part = s.u.clone();
    multiply(&mut lap_part, &visc_half);
    u_base.axpy(h, &f0.du);
    u_base.axpy(h, &lap_part);
    let mut d_base = s.d.clone();
    d_base.axpy(h, &f0.dd);
    let mut w_base = s.w.clone();
    w_base.axpy(h, &f0.dw);

    let stress_response = |v: &SpectralField, d: &SpectralField| -> Result<SpectralField, ElhError> {
        let sigma = leslie_stress_block(v, d, &zero, c, StressBlock::All, rule)?;
        let mut out = leray_project(&divergence(&sigma)?)?;
        apply_mask(&mut out, &keep);
        Ok(out)
    };

    let mut it = s.clone();
    it.t = s.t + dt;
    let mut report = PicardReport {
        history: Vec::new(),
        velocity_sweeps: Vec::new(),
        director_sweeps: Vec::new(),
    };
    for _ in 0..settings.max_iters {
        // (a) velocity with lagged director
        let rk = full.eval(&it)?;
        let mut explicit = u_base.clone();
        explicit.axpy(h, &rk.du);
        let mut u_new = it.u.clone();
        let mut sweeps = 0;
        loop {
            sweeps += 1;
            let mut v = u_new.clone();
            v.axpy(-1.0, &it.u);
            let mut next = explicit.clone();
            next.axpy(h, &stress_response(&v, &it.d)?);
            let mut shift = u_new.clone();
            for (z, k2) in shift.data_mut().iter_mut().zip(k2.iter().cycle()) {
                *z *= -kappa * k2;
            }
            next.axpy(-h, &shift);
            multiply(&mut next, &solve);
            let change = next.max_abs_diff(&u_new);
            u_new = next;
            if change <= INNER_TOL * (1.0 + u_new.max_abs_coeff()) || sweeps >= INNER_MAX {
                break;
            }
        }
        report.velocity_sweeps.push(sweeps);

        // (b) director with lagged velocity
        let mut dw = State {
            t: it.t,
            u: it.u.clone(),
            d: it.d.clone(),
            w: it.w.clone(),
        };
        let mut dsweeps = 0;
        loop {
            dsweeps += 1;
            let g = director.eval(&dw)?;
            let d_next = SpectralField::lin_comb(1.0, &d_base, h, &g.dd);
            let w_next = SpectralField::lin_comb(1.0, &w_base, h, &g.dw);
            let change = d_next.max_abs_diff(&dw.d).max(w_next.max_abs_diff(&dw.w));
            dw.d = d_next;
            dw.w = w_next;
            if change <= INNER_TOL * (1.0 + dw.d.max_abs_coeff()) || dsweeps >= INNER_MAX {
                break;
            }
        }
        report.director_sweeps.push(dsweeps);

        let next = State {
            t: it.t,
            u: u_new,
            d: dw.d,
            w: dw.w,
        };
        if !next.is_finite() {
            return Err(ElhError::BlowUp {
                t: next.t,
                reason: "picard iterate is not finite".into(),
                last: None,
            });
        }
        let change = next.max_abs_diff(&it);
        report.history.push(change);
        log::debug!("picard iteration {}: change {change:e}", report.history.len());
        it = next;
        if change < settings.tolerance {
            it.u = leray_project(&it.u)?;
            return Ok((it, report));
        }
    }
    Err(ElhError::PicardDiverged {
        iters: settings.max_iters,
        history: report.history,
    })
}

pub fn picard_step(s: &State, c: &LeslieCoefficients, config: &SolverConfig) -> Result<State, ElhError> {
    picard_step_with_report(s, c, config).map(|(s, _)| s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coefficients::preset;
    use crate::dynamics::init::random_state;
    use crate::dynamics::integrate::{step, Integrator};
    use crate::spectral::Grid;

    fn config(dt: f64) -> SolverConfig {
        let mut cfg = SolverConfig::new(dt);
        cfg.integrator = Integrator::Rk4;
        cfg.picard = Some(PicardSettings::default());
        cfg
    }

    #[test]
    fn requires_settings() {
        let g = Grid::new(2, 8).unwrap();
        let s = State::uniform(&g);
        let mut cfg = config(1e-3);
        cfg.picard = None;
        assert!(picard_step(&s, &preset("damped_default").unwrap(), &cfg).is_err());
    }

    #[test]
    fn tiny_data_converges_immediately() {
        let g = Grid::new(2, 16).unwrap();
        let s = random_state(&g, 1e-13, 1, 2.0).unwrap();
        let (_, rep) = picard_step_with_report(&s, &preset("damped_default").unwrap(), &config(1e-3)).unwrap();
        assert!(rep.iterations() <= 2, "{rep:?}");
    }

    #[test]
    fn contracts_and_agrees_with_rk4() {
        let g = Grid::new(2, 32).unwrap();
        let c = preset("damped_default").unwrap();
        let s = random_state(&g, 0.05, 3, 2.0).unwrap();
        let cfg = config(1e-3);
        let (p, rep) = picard_step_with_report(&s, &c, &cfg).unwrap();
        assert!(rep.ratios().iter().all(|r| *r <= 0.5), "{rep:?}");
        let r = step(&s, &c, &cfg).unwrap();
        assert!(p.max_abs_diff(&r) <= 5e-6, "{}", p.max_abs_diff(&r));
    }
}
