use super::integrate::{cfl_limit, Integrator, SolverConfig, BLOWUP_THRESHOLD};
use super::rhs::Rhs;
use super::state::State;
use crate::coefficients::LeslieCoefficients;
use crate::error::ElhError;
use crate::spectral::ops::ball_mask;
use crate::spectral::{mollify, SpectralField};

/// Director and rate at one sample time of a director-only run.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectorSample {
    pub t: f64,
    pub d: SpectralField,
    pub w: SpectralField,
}

/// Evolves `(d, w)` under a supplied velocity with every term cut off at `|xi| <= 1/eps`.
///
/// The initial data are cut off too, so the trajectory stays in the retained band.
/// Classical RK4 with `config.dt`; samples every `sample_every` steps, including
/// the first and last.
#[allow(clippy::too_many_arguments)]
pub fn director_only_run(
    u_given: impl Fn(f64) -> SpectralField,
    d0: &SpectralField,
    w0: &SpectralField,
    eps: f64,
    c: &LeslieCoefficients,
    config: &SolverConfig,
    t_end: f64,
    sample_every: usize,
) -> Result<Vec<DirectorSample>, ElhError> {
    if !(eps > 0.0) {
        return Err(ElhError::Config(vec![format!("eps must be > 0 (got {eps})")]));
    }
    if c.rho1 <= 0.0 {
        return Err(crate::coefficients::CoefficientError::NonPositiveRho1(c.rho1).into());
    }
    let grid = d0.grid().clone();
    let rhs = Rhs::new(&grid, *c, config.dealias)
        .with_gamma_form(config.gamma_form)
        .director_only()
        .with_extra_mask(&ball_mask(&grid, 1.0 / eps));
    let dt = config.dt;
    let steps = (t_end / dt).round() as usize;
    let every = sample_every.max(1);

    let mut s = State::new(0.0, u_given(0.0), mollify(d0, eps), mollify(w0, eps))?;
    let mut out = vec![DirectorSample { t: 0.0, d: s.d.clone(), w: s.w.clone() }];
    let eval = |st: &State| -> Result<_, ElhError> {
        let k = rhs.eval(st)?;
        if !k.max_sample.is_finite() || k.max_sample > BLOWUP_THRESHOLD {
            return Err(ElhError::BlowUp {
                t: st.t,
                reason: format!("field max-norm {:e} exceeds {BLOWUP_THRESHOLD:e}", k.max_sample),
                last: None,
            });
        }
        Ok(k)
    };
    for n in 1..=steps {
        let t0 = (n - 1) as f64 * dt;
        s.t = t0;
        s.u = u_given(t0);
        let k1 = eval(&s)?;
        let (limit, which) = cfl_limit(&grid, c, config.dealias, Integrator::IntegratingFactorRk4, k1.max_speed);
        if dt > config.cfl_safety * limit {
            return Err(ElhError::Cfl {
                dt,
                limit: config.cfl_safety * limit,
                reason: format!("{which} limit at t = {t0}"),
            });
        }
        let u_half = u_given(t0 + 0.5 * dt);
        let stage = |k: &super::rhs::Tendency, h: f64, u: &SpectralField| State {
            t: t0 + h,
            u: u.clone(),
            d: SpectralField::lin_comb(1.0, &s.d, h, &k.dd),
            w: SpectralField::lin_comb(1.0, &s.w, h, &k.dw),
        };
        let k2 = eval(&stage(&k1, 0.5 * dt, &u_half))?;
        let k3 = eval(&stage(&k2, 0.5 * dt, &u_half))?;
        let k4 = eval(&stage(&k3, dt, &u_given(t0 + dt)))?;
        for (f, ks) in [(&mut s.d, [&k1.dd, &k2.dd, &k3.dd, &k4.dd]), (&mut s.w, [&k1.dw, &k2.dw, &k3.dw, &k4.dw])] {
            f.axpy(dt / 6.0, ks[0]);
            f.axpy(dt / 3.0, ks[1]);
            f.axpy(dt / 3.0, ks[2]);
            f.axpy(dt / 6.0, ks[3]);
        }
        let t = n as f64 * dt;
        if !s.d.is_finite() || !s.w.is_finite() {
            return Err(ElhError::BlowUp { t, reason: "non-finite director".into(), last: None });
        }
        if n % every == 0 || n == steps {
            out.push(DirectorSample { t, d: s.d.clone(), w: s.w.clone() });
        }
    }
    Ok(out)
}
