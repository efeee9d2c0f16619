//! Energy laws, higher-order functionals and constraint monitoring.

mod energy;
mod functionals;
mod identities;
mod monitor;
mod residual;

pub use energy::{basic_dissipation, basic_energy, BasicDissipation};
pub use functionals::{hs_functionals, modified_functionals, HsVariant, ModifiedFunctionals};
pub use identities::{identity_suite, IdentityCheck, IDENTITY_NAMES};
pub use monitor::constraint_monitor;
pub use residual::{energy_residual, ResidualSample};

use crate::coefficients::{classify, LeslieCoefficients};
use crate::dynamics::State;
use crate::error::ElhError;
use crate::spectral::Dealias;

/// One row of the diagnostics time series.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub e_basic: f64,
    pub dissipation: BasicDissipation,
    pub e_hs: Option<f64>,
    pub d_hs: Option<f64>,
    pub e_eta: Option<f64>,
    pub d_eta: Option<f64>,
    pub h_max: f64,
    pub h_l2: f64,
    pub tangency_max: f64,
    /// Filled in after the run, once neighbouring samples exist.
    pub residual: Option<f64>,
}

/// What to evaluate at each sample.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosticSettings {
    pub rule: Dealias,
    /// Sobolev order for the higher-order functionals; `None` skips them.
    pub hs_order: Option<usize>,
    /// Weight of the modified functional; skipped when `None` or outside strict damping.
    pub eta: Option<f64>,
    pub estimate_constant: f64,
}

impl Default for DiagnosticSettings {
    fn default() -> Self {
        Self {
            rule: Dealias::TwoThirds,
            hs_order: Some(2),
            eta: None,
            estimate_constant: 1.0,
        }
    }
}

pub fn record(s: &State, c: &LeslieCoefficients, cfg: &DiagnosticSettings) -> Result<DiagnosticsRecord, ElhError> {
    let dissipation = basic_dissipation(s, c, cfg.rule)?;
    let (h_max, h_l2, tangency_max) = constraint_monitor(&s.d, &s.w);
    let mut rec = DiagnosticsRecord {
        t: s.t,
        e_basic: basic_energy(s, c),
        dissipation,
        e_hs: None,
        d_hs: None,
        e_eta: None,
        d_eta: None,
        h_max,
        h_l2,
        tangency_max,
        residual: None,
    };
    if let Some(order) = cfg.hs_order {
        let variant = classify(c, None).ok().and_then(|k| HsVariant::from_class(&k).ok());
        let want_eta = cfg.eta.is_some() && c.lambda1 < 0.0;
        if variant.is_some() || want_eta {
            let order = if want_eta { order.max(1) } else { order };
            let sums = functionals::order_sums(s, c, order, cfg.rule);
            if let Some(v) = variant {
                let (e, d) = functionals::hs_from_sums(s, c, order, v, &sums)?;
                rec.e_hs = Some(e);
                rec.d_hs = Some(d);
            }
            if let (Some(eta), true) = (cfg.eta, want_eta) {
                let m = functionals::modified_from_sums(s, c, order, eta, cfg.estimate_constant, &sums)?;
                rec.e_eta = Some(m.e_eta);
                rec.d_eta = Some(m.d_eta);
            }
        }
    }
    Ok(rec)
}

/// Fills `residual` from the basic energy law on a uniformly sampled series.
pub fn attach_residuals(records: &mut [DiagnosticsRecord]) -> Result<(), ElhError> {
    if records.len() < 3 {
        return Ok(());
    }
    let t: Vec<f64> = records.iter().map(|r| r.t).collect();
    let e: Vec<f64> = records.iter().map(|r| r.e_basic).collect();
    let d: Vec<f64> = records.iter().map(|r| r.dissipation.total).collect();
    for (k, r) in energy_residual(&t, &e, &d)?.into_iter().enumerate() {
        records[k + 1].residual = Some(r.relative);
    }
    Ok(())
}

/// `E(0)` of the higher-order energy at order `s`, the size of the initial data.
pub fn e_in(s: &State, c: &LeslieCoefficients, order: usize) -> f64 {
    use crate::spectral::ops::{hdot_sq, hs_sum_sq};
    hs_sum_sq(&s.u, order) + c.rho1 * hs_sum_sq(&s.w, order) + (1..=order + 1).map(|k| hdot_sq(&s.d, k)).sum::<f64>()
}
