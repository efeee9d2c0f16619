use std::fmt;
use std::str::FromStr;

use super::rhs::{GammaForm, Rhs, Tendency};
use super::state::State;
use crate::coefficients::LeslieCoefficients;
use crate::error::ElhError;
use crate::spectral::{leray_project, Dealias, Grid, SpectralField};

/// Any sample beyond this magnitude is treated as blow-up.
pub const BLOWUP_THRESHOLD: f64 = 1e8;

/// Stability radius of classical RK4 used for time-step limits.
const RK4_RADIUS: f64 = 2.8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Integrator {
    Rk4,
    /// RK4 on `exp(-mu4/2 |xi|^2 t) u`, i.e. viscous term integrated exactly (Lawson form).
    IntegratingFactorRk4,
    /// Integrating factor when `mu4 k_max^2 dt > 2`, plain RK4 otherwise.
    Auto,
}

impl Integrator {
    pub fn name(self) -> &'static str {
        match self {
            Integrator::Rk4 => "rk4",
            Integrator::IntegratingFactorRk4 => "if_rk4",
            Integrator::Auto => "auto",
        }
    }
}

impl fmt::Display for Integrator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Integrator {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "rk4" => Ok(Integrator::Rk4),
            "if_rk4" => Ok(Integrator::IntegratingFactorRk4),
            "auto" => Ok(Integrator::Auto),
            other => Err(format!("unknown integrator {other:?} (expected rk4, if_rk4 or auto)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PicardSettings {
    pub max_iters: usize,
    pub tolerance: f64,
}

impl Default for PicardSettings {
    fn default() -> Self {
        Self {
            max_iters: 50,
            tolerance: 1e-11,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub dt: f64,
    pub integrator: Integrator,
    pub dealias: Dealias,
    pub picard: Option<PicardSettings>,
    pub cfl_safety: f64,
    /// Rescale `d` to unit length every this many steps (off by default).
    pub renormalize_every: Option<usize>,
    pub gamma_form: GammaForm,
}

impl SolverConfig {
    pub fn new(dt: f64) -> Self {
        Self {
            dt,
            integrator: Integrator::Auto,
            dealias: Dealias::TwoThirds,
            picard: None,
            cfl_safety: 0.9,
            renormalize_every: None,
            gamma_form: GammaForm::Consistent,
        }
    }
}

/// Largest Euclidean |xi| among modes kept by `rule`.
pub fn k_max(grid: &Grid, rule: Dealias) -> f64 {
    let t = grid.tables();
    (0..grid.len())
        .filter(|&i| rule.keeps(grid, i))
        .map(|i| t.k2[i])
        .fold(0.0, f64::max)
        .sqrt()
}

/// Integrator actually used for `config` on `grid`.
pub fn resolve_integrator(grid: &Grid, c: &LeslieCoefficients, config: &SolverConfig) -> Integrator {
    match config.integrator {
        Integrator::Auto => {
            let km = k_max(grid, config.dealias);
            if c.mu4 * km * km * config.dt > 2.0 {
                Integrator::IntegratingFactorRk4
            } else {
                Integrator::Rk4
            }
        }
        other => other,
    }
}

/// Stable step bound before the safety factor, with the binding constraint named.
pub fn cfl_limit(
    grid: &Grid,
    c: &LeslieCoefficients,
    rule: Dealias,
    integrator: Integrator,
    max_speed: f64,
) -> (f64, &'static str) {
    let km = k_max(grid, rule);
    let advective = RK4_RADIUS / (km * (max_speed + 1.0 / c.rho1.sqrt()));
    if integrator == Integrator::Rk4 && c.mu4 > 0.0 {
        let viscous = RK4_RADIUS / (0.5 * c.mu4 * km * km);
        if viscous < advective {
            return (viscous, "viscous");
        }
    }
    (advective, "advective")
}

pub fn check_cfl(
    grid: &Grid,
    c: &LeslieCoefficients,
    config: &SolverConfig,
    max_speed: f64,
) -> Result<(), ElhError> {
    if !(config.dt > 0.0) || !config.dt.is_finite() {
        return Err(ElhError::Cfl {
            dt: config.dt,
            limit: 0.0,
            reason: "dt must be positive".into(),
        });
    }
    let integrator = resolve_integrator(grid, c, config);
    let (limit, which) = cfl_limit(grid, c, config.dealias, integrator, max_speed);
    let limit = config.cfl_safety * limit;
    if config.dt > limit {
        return Err(ElhError::Cfl {
            dt: config.dt,
            limit,
            reason: format!("{which} limit with {integrator} and safety {}", config.cfl_safety),
        });
    }
    Ok(())
}

/// Advances states with a fixed configuration, reusing transforms and factors.
#[derive(Debug, Clone)]
pub struct Stepper {
    rhs: Rhs,
    config: SolverConfig,
    integrator: Integrator,
    /// exp(-mu4/2 |xi|^2 dt/2) and its square, per mode.
    half_factor: Vec<f64>,
    full_factor: Vec<f64>,
    steps_taken: usize,
}

impl Stepper {
    pub fn new(grid: &Grid, c: &LeslieCoefficients, config: &SolverConfig) -> Result<Self, ElhError> {
        if c.rho1 <= 0.0 {
            return Err(crate::coefficients::CoefficientError::NonPositiveRho1(c.rho1).into());
        }
        let integrator = resolve_integrator(grid, c, config);
        let mut rhs = Rhs::new(grid, *c, config.dealias).with_gamma_form(config.gamma_form);
        if integrator == Integrator::IntegratingFactorRk4 {
            rhs = rhs.without_viscous();
        }
        let t = grid.tables();
        let half_factor: Vec<f64> = t
            .k2
            .iter()
            .map(|k2| (-0.5 * c.mu4 * k2 * 0.5 * config.dt).exp())
            .collect();
        let full_factor = half_factor.iter().map(|e| e * e).collect();
        Ok(Self {
            rhs,
            config: config.clone(),
            integrator,
            half_factor,
            full_factor,
            steps_taken: 0,
        })
    }

    pub fn integrator(&self) -> Integrator {
        self.integrator
    }

    pub fn config(&self) -> &SolverConfig {
        &self.config
    }

    pub fn rhs(&self) -> &Rhs {
        &self.rhs
    }

    fn checked_eval(&self, s: &State) -> Result<Tendency, ElhError> {
        let k = self.rhs.eval(s)?;
        if !k.max_sample.is_finite() || k.max_sample > BLOWUP_THRESHOLD {
            return Err(ElhError::BlowUp {
                t: s.t,
                reason: format!("field max-norm {:e} exceeds {BLOWUP_THRESHOLD:e}", k.max_sample),
                last: None,
            });
        }
        Ok(k)
    }

    /// One step of size `config.dt`.
    pub fn step(&mut self, s: &State) -> Result<State, ElhError> {
        let dt = self.config.dt;
        let k1 = self.checked_eval(s)?;
        let (limit, which) = cfl_limit(
            s.grid(),
            &self.rhs.coeffs,
            self.config.dealias,
            self.integrator,
            k1.max_speed,
        );
        if dt > self.config.cfl_safety * limit {
            return Err(ElhError::Cfl {
                dt,
                limit: self.config.cfl_safety * limit,
                reason: format!("{which} limit at t = {}", s.t),
            });
        }
        let mut next = match self.integrator {
            Integrator::IntegratingFactorRk4 => self.lawson_rk4(s, k1)?,
            _ => self.rk4(s, k1)?,
        };
        next.u = leray_project(&next.u)?;
        next.t = s.t + dt;
        self.steps_taken += 1;
        if let Some(every) = self.config.renormalize_every {
            if every > 0 && self.steps_taken % every == 0 {
                log::info!("renormalizing director at step {} (t = {})", self.steps_taken, next.t);
                next.d = renormalize(&next.d);
            }
        }
        if !next.is_finite() {
            return Err(ElhError::BlowUp {
                t: next.t,
                reason: "non-finite coefficients".into(),
                last: None,
            });
        }
        Ok(next)
    }

    fn rk4(&self, s: &State, k1: Tendency) -> Result<State, ElhError> {
        let dt = self.config.dt;
        let stage = |k: &Tendency, h: f64| State {
            t: s.t + h,
            u: SpectralField::lin_comb(1.0, &s.u, h, &k.du),
            d: SpectralField::lin_comb(1.0, &s.d, h, &k.dd),
            w: SpectralField::lin_comb(1.0, &s.w, h, &k.dw),
        };
        let k2 = self.checked_eval(&stage(&k1, 0.5 * dt))?;
        let k3 = self.checked_eval(&stage(&k2, 0.5 * dt))?;
        let k4 = self.checked_eval(&stage(&k3, dt))?;
        let combine = |base: &SpectralField, a: &SpectralField, b: &SpectralField, c: &SpectralField, d: &SpectralField| {
            let mut out = base.clone();
            out.axpy(dt / 6.0, a);
            out.axpy(dt / 3.0, b);
            out.axpy(dt / 3.0, c);
            out.axpy(dt / 6.0, d);
            out
        };
        Ok(State {
            t: s.t + dt,
            u: combine(&s.u, &k1.du, &k2.du, &k3.du, &k4.du),
            d: combine(&s.d, &k1.dd, &k2.dd, &k3.dd, &k4.dd),
            w: combine(&s.w, &k1.dw, &k2.dw, &k3.dw, &k4.dw),
        })
    }

    fn apply(factor: &[f64], f: &SpectralField) -> SpectralField {
        let mut out = f.clone();
        for c in 0..out.ncomp() {
            for (z, e) in out.comp_mut(c).iter_mut().zip(factor) {
                *z *= *e;
            }
        }
        out
    }

    fn lawson_rk4(&self, s: &State, k1: Tendency) -> Result<State, ElhError> {
        let dt = self.config.dt;
        let eh = &self.half_factor;
        let ef = &self.full_factor;
        let director = |k: &Tendency, h: f64| {
            (
                SpectralField::lin_comb(1.0, &s.d, h, &k.dd),
                SpectralField::lin_comb(1.0, &s.w, h, &k.dw),
            )
        };
        let eh_u = Self::apply(eh, &s.u);

        let (d, w) = director(&k1, 0.5 * dt);
        let ua = Self::apply(eh, &SpectralField::lin_comb(1.0, &s.u, 0.5 * dt, &k1.du));
        let k2 = self.checked_eval(&State { t: s.t + 0.5 * dt, u: ua, d, w })?;

        let (d, w) = director(&k2, 0.5 * dt);
        let ub = SpectralField::lin_comb(1.0, &eh_u, 0.5 * dt, &k2.du);
        let k3 = self.checked_eval(&State { t: s.t + 0.5 * dt, u: ub, d, w })?;

        let (d, w) = director(&k3, dt);
        let mut uc = Self::apply(ef, &s.u);
        uc.axpy(dt, &Self::apply(eh, &k3.du));
        let k4 = self.checked_eval(&State { t: s.t + dt, u: uc, d, w })?;

        let mut u = Self::apply(ef, &s.u);
        u.axpy(dt / 6.0, &Self::apply(ef, &k1.du));
        let mut mid = k2.du.clone();
        mid.axpy(1.0, &k3.du);
        u.axpy(dt / 3.0, &Self::apply(eh, &mid));
        u.axpy(dt / 6.0, &k4.du);

        let combine = |base: &SpectralField, a: &SpectralField, b: &SpectralField, c: &SpectralField, d: &SpectralField| {
            let mut out = base.clone();
            out.axpy(dt / 6.0, a);
            out.axpy(dt / 3.0, b);
            out.axpy(dt / 3.0, c);
            out.axpy(dt / 6.0, d);
            out
        };
        Ok(State {
            t: s.t + dt,
            u,
            d: combine(&s.d, &k1.dd, &k2.dd, &k3.dd, &k4.dd),
            w: combine(&s.w, &k1.dw, &k2.dw, &k3.dw, &k4.dw),
        })
    }
}

/// Pointwise rescaling of `d` to unit length (exploratory option only).
pub fn renormalize(d: &SpectralField) -> SpectralField {
    let mut r = crate::spectral::inverse(d);
    let norms = r.pointwise_norm();
    let len = r.grid().len();
    for c in 0..r.ncomp() {
        for p in 0..len {
            if norms[p] > 0.0 {
                r.data_mut()[c * len + p] /= norms[p];
            }
        }
    }
    crate::spectral::forward(&r)
}

/// One step from `s`; builds a fresh [`Stepper`].
pub fn step(s: &State, c: &LeslieCoefficients, config: &SolverConfig) -> Result<State, ElhError> {
    check_cfl(s.grid(), c, config, 0.0)?;
    Stepper::new(s.grid(), c, config)?.step(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coefficients::preset;
    use crate::dynamics::init::random_state;

    #[test]
    fn equilibrium_is_fixed() {
        let g = Grid::new(2, 16).unwrap();
        let s = State::uniform(&g);
        let c = preset("damped_default").unwrap();
        let next = step(&s, &c, &SolverConfig::new(1e-3)).unwrap();
        assert!(next.max_abs_diff(&s) < 1e-16);
        assert_eq!(next.t, 1e-3);
    }

    #[test]
    fn huge_dt_is_rejected() {
        let g = Grid::new(2, 32).unwrap();
        let s = State::uniform(&g);
        let c = preset("damped_default").unwrap();
        let mut cfg = SolverConfig::new(1.0);
        cfg.integrator = Integrator::Rk4;
        assert!(matches!(step(&s, &c, &cfg), Err(ElhError::Cfl { .. })));
    }

    #[test]
    fn auto_selects_integrating_factor_for_stiff_steps() {
        let g = Grid::new(2, 64).unwrap();
        let c = preset("damped_default").unwrap();
        let mut cfg = SolverConfig::new(1e-3);
        assert_eq!(resolve_integrator(&g, &c, &cfg), Integrator::Rk4);
        cfg.dt = 2e-3;
        assert_eq!(resolve_integrator(&g, &c, &cfg), Integrator::IntegratingFactorRk4);
    }

    #[test]
    fn forward_then_backward_recovers_state() {
        let g = Grid::new(2, 32).unwrap();
        let c = preset("damped_default").unwrap();
        let s = random_state(&g, 0.05, 2, 2.0).unwrap();
        let mut errs = Vec::new();
        for dt in [4e-3, 2e-3] {
            let mut cfg = SolverConfig::new(dt);
            cfg.integrator = Integrator::Rk4;
            let fwd = Stepper::new(&g, &c, &cfg).unwrap().step(&s).unwrap();
            cfg.dt = -dt;
            let back = Stepper::new(&g, &c, &cfg).unwrap().rk4(&fwd, Stepper::new(&g, &c, &cfg).unwrap().rhs.eval(&fwd).unwrap()).unwrap();
            errs.push(back.max_abs_diff(&s));
        }
        // the dt^5 terms of R(z) and R(-z) cancel in the round trip, leaving dt^6
        let ratio = errs[0] / errs[1];
        assert!(ratio > 45.0 && ratio < 90.0, "{errs:?}");
    }

    #[test]
    fn integrating_factor_matches_rk4() {
        let g = Grid::new(2, 32).unwrap();
        let c = preset("damped_default").unwrap();
        let s = random_state(&g, 0.05, 4, 2.0).unwrap();
        let mut a = SolverConfig::new(1e-3);
        a.integrator = Integrator::Rk4;
        let mut b = a.clone();
        b.integrator = Integrator::IntegratingFactorRk4;
        let (mut sa, mut sb) = (s.clone(), s.clone());
        let (mut pa, mut pb) = (Stepper::new(&g, &c, &a).unwrap(), Stepper::new(&g, &c, &b).unwrap());
        for _ in 0..20 {
            sa = pa.step(&sa).unwrap();
            sb = pb.step(&sb).unwrap();
        }
        assert!(sa.max_abs_diff(&sb) < 1e-9, "{}", sa.max_abs_diff(&sb));
        assert!(sb.divergence_max() < 1e-10);
    }
}
