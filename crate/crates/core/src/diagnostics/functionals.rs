use num_complex::Complex64;

use crate::coefficients::{eta0, DissipationClass, LeslieCoefficients};
use crate::constitutive::PointKinematics;
use crate::dynamics::State;
use crate::error::ElhError;
use crate::spectral::ops::{hdot_sq, hs_sum_sq};
use crate::spectral::{gradient, partial, Dealias, Evaluator, SpectralField};

/// Which lower-order dissipation bound applies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum HsVariant {
    StrictDamping,
    ZeroLambda1 { delta: f64 },
}

impl HsVariant {
    pub fn from_class(class: &DissipationClass) -> Result<Self, ElhError> {
        match class {
            DissipationClass::StrictDamping => Ok(HsVariant::StrictDamping),
            DissipationClass::ZeroLambda1(delta) => Ok(HsVariant::ZeroLambda1 { delta: *delta }),
            DissipationClass::Invalid(why) => Err(ElhError::Diagnostics(format!(
                "coefficients are not dissipative: {why}"
            ))),
        }
    }
}

/// Per-order integrals `sum_{|J| = k} binom(J) |..|^2` used by the higher-order functionals.
#[derive(Debug, Clone)]
pub(crate) struct OrderSums {
    /// `|d.(d^J A)d|^2`
    pub dad: Vec<f64>,
    /// `|(d^J A)d|^2`
    pub ad: Vec<f64>,
    /// `|d^J w + (d^J B)d + (lambda2/lambda1)(d^J A)d|^2`
    pub wq: Vec<f64>,
    /// `|(d^J B)d + (lambda2/lambda1)(d^J A)d|^2`
    pub bq: Vec<f64>,
    /// `|grad^{k+1} u|^2`
    pub grad_u: Vec<f64>,
}

/// Unordered multi-indices of length `k` over `dim` axes, with multinomial weights.
fn multi_indices(dim: usize, k: usize) -> Vec<(Vec<usize>, f64)> {
    fn rec(dim: usize, k: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for a in start..dim {
            cur.push(a);
            rec(dim, k, a, cur, out);
            cur.pop();
        }
    }
    let mut seqs = Vec::new();
    rec(dim, k, 0, &mut Vec::new(), &mut seqs);
    let fact = |m: usize| (1..=m).map(|x| x as f64).product::<f64>();
    seqs.into_iter()
        .map(|seq| {
            let mut w = fact(k);
            for a in 0..dim {
                w /= fact(seq.iter().filter(|&&x| x == a).count());
            }
            (seq, w)
        })
        .collect()
}

pub(crate) fn order_sums(
    s: &State,
    c: &LeslieCoefficients,
    order: usize,
    rule: Dealias,
) -> OrderSums {
    let grid = s.grid();
    let dim = grid.dim();
    let ev = Evaluator::for_band(grid, rule, 3);
    let ratio = if c.lambda1 != 0.0 { c.lambda2 / c.lambda1 } else { 0.0 };
    let gu = gradient(&s.u);
    let d_s = ev.to_grid(&s.d);
    let len = ev.eval_grid().len();
    let mut out = OrderSums {
        dad: vec![0.0; order + 1],
        ad: vec![0.0; order + 1],
        wq: vec![0.0; order + 1],
        bq: vec![0.0; order + 1],
        grad_u: (0..=order).map(|k| hdot_sq(&s.u, k + 1)).collect(),
    };
    let mut dad = vec![0.0; len];
    let mut ad = vec![0.0; len];
    let mut wq = vec![0.0; len];
    let mut bq = vec![0.0; len];
    for k in 0..=order {
        for (axes, weight) in multi_indices(dim, k) {
            let guj = partial(&gu, &axes);
            let wj = partial(&s.w, &axes);
            let mut comps: Vec<&[Complex64]> = guj.components().collect();
            comps.extend(wj.components());
            let smp = ev.to_grid_comps(&comps);
            for p in 0..len {
                let mut g = [[0.0; 3]; 3];
                let mut d = [0.0; 3];
                for i in 0..dim {
                    d[i] = d_s.comp(i)[p];
                    for j in 0..dim {
                        g[i][j] = smp[i * dim + j][p];
                    }
                }
                let kin = PointKinematics::new(dim, &g, &d);
                dad[p] = kin.dad * kin.dad;
                let (mut a2, mut w2, mut b2) = (0.0, 0.0, 0.0);
                for i in 0..dim {
                    a2 += kin.ad[i] * kin.ad[i];
                    let bqi = kin.bd[i] + ratio * kin.ad[i];
                    b2 += bqi * bqi;
                    let wqi = smp[dim * dim + i][p] + bqi;
                    w2 += wqi * wqi;
                }
                ad[p] = a2;
                wq[p] = w2;
                bq[p] = b2;
            }
            out.dad[k] += weight * ev.integrate(&dad);
            out.ad[k] += weight * ev.integrate(&ad);
            out.wq[k] += weight * ev.integrate(&wq);
            out.bq[k] += weight * ev.integrate(&bq);
        }
    }
    out
}

/// `sum_{k=1}^{s+1} |grad^k d|^2`, i.e. `|grad d|^2_{H^s}`.
fn grad_d_hs(d: &SpectralField, s: usize) -> f64 {
    (1..=s + 1).map(|k| hdot_sq(d, k)).sum()
}

/// Higher-order energy and dissipation `(E, D)` at regularity `s`.
///
/// Sobolev norms are sums of homogeneous seminorms up to order `s`.
pub fn hs_functionals(
    st: &State,
    c: &LeslieCoefficients,
    s: usize,
    variant: HsVariant,
    rule: Dealias,
) -> Result<(f64, f64), ElhError> {
    check_variant(c, variant)?;
    hs_from_sums(st, c, s, variant, &order_sums(st, c, s, rule))
}

fn check_variant(c: &LeslieCoefficients, variant: HsVariant) -> Result<(), ElhError> {
    match variant {
        HsVariant::StrictDamping if !(c.lambda1 < 0.0) => {
            return Err(ElhError::Diagnostics(format!(
                "strict-damping functional needs lambda1 < 0 (got {})",
                c.lambda1
            )))
        }
        HsVariant::ZeroLambda1 { delta } if c.lambda1 != 0.0 || !(delta > 0.0 && delta < 1.0) => {
            return Err(ElhError::Diagnostics(format!(
                "zero-lambda1 functional needs lambda1 = 0 and delta in (0,1) (got {}, {delta})",
                c.lambda1
            )))
        }
        _ => Ok(()),
    }
}

pub(crate) fn hs_from_sums(
    st: &State,
    c: &LeslieCoefficients,
    s: usize,
    variant: HsVariant,
    o: &OrderSums,
) -> Result<(f64, f64), ElhError> {
    check_variant(c, variant)?;
    let e = hs_sum_sq(&st.u, s) + c.rho1 * hs_sum_sq(&st.w, s) + grad_d_hs(&st.d, s);
    let sum = |v: &[f64]| v.iter().sum::<f64>();
    let grad_u = sum(&o.grad_u);
    let d = match variant {
        HsVariant::StrictDamping => {
            0.5 * c.mu4 * grad_u + c.mu1 * sum(&o.dad) - c.lambda1 * sum(&o.wq)
                + (c.mu5 + c.mu6 + c.lambda2 * c.lambda2 / c.lambda1) * sum(&o.ad)
        }
        HsVariant::ZeroLambda1 { delta } => {
            let m = (1.0 - delta) * c.mu4;
            let coupling = 2.0 * c.lambda2.abs() / m;
            let squares: f64 = (0..=s)
                .map(|k| (o.grad_u[k].sqrt() - coupling * o.ad[k].sqrt()).powi(2))
                .sum();
            0.25 * delta * c.mu4 * grad_u
                + c.mu1 * sum(&o.dad)
                + (c.mu5 + c.mu6 - 2.0 * c.lambda2 * c.lambda2 / m) * sum(&o.ad)
                + 0.5 * m * squares
        }
    };
    Ok((e, d))
}

/// Modified energy and dissipation with the two-sided bound against the plain norm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModifiedFunctionals {
    pub e_eta: f64,
    pub d_eta: f64,
    /// `|u|^2_{H^s} + rho1 |w|^2_{H^s} + |grad d|^2_{H^s}`
    pub base: f64,
    pub lower: f64,
    pub upper: f64,
}

impl ModifiedFunctionals {
    pub fn sandwich_holds(&self, tol: f64) -> bool {
        let slack = tol * self.upper.abs().max(1e-300);
        self.lower <= self.e_eta + slack && self.e_eta <= self.upper + slack
    }
}

/// `E_eta, D_eta` for `0 < eta <= eta0(c, constant)`, `s >= 1`.
pub fn modified_functionals(
    st: &State,
    c: &LeslieCoefficients,
    s: usize,
    eta: f64,
    constant: f64,
    rule: Dealias,
) -> Result<ModifiedFunctionals, ElhError> {
    modified_from_sums(st, c, s, eta, constant, &order_sums(st, c, s.max(1), rule))
}

pub(crate) fn modified_from_sums(
    st: &State,
    c: &LeslieCoefficients,
    s: usize,
    eta: f64,
    constant: f64,
    o: &OrderSums,
) -> Result<ModifiedFunctionals, ElhError> {
    if s < 1 {
        return Err(ElhError::Diagnostics("modified functionals need s >= 1".into()));
    }
    let e0 = eta0(c, constant).map_err(|e| ElhError::Diagnostics(e.to_string()))?;
    if !(eta > 0.0 && eta <= e0 * (1.0 + 1e-12)) {
        return Err(ElhError::Diagnostics(format!("eta must lie in (0, {e0}] (got {eta})")));
    }
    let (l1, r1) = (c.lambda1, c.rho1);
    let grad_d_lower: f64 = (1..=s).map(|k| hdot_sq(&st.d, k)).sum();
    let mut wd = st.w.clone();
    wd.axpy(1.0, &st.d);
    let e_eta = hs_sum_sq(&st.u, s)
        + (-eta * l1 + 1.0 - eta * r1) * grad_d_lower
        + hdot_sq(&st.d, s + 1)
        + r1 * (1.0 - eta) * hs_sum_sq(&st.w, s)
        + r1 * eta * hdot_sq(&st.w, 0)
        + eta * r1 * hdot_sq(&wd, s);

    let sum = |v: &[f64]| v.iter().sum::<f64>();
    let d_eta = 0.25 * c.mu4 * sum(&o.grad_u)
        + 0.25 * eta * grad_d_hs(&st.d, s)
        - 0.5 * l1 * sum(&o.wq)
        + c.mu1 * sum(&o.dad)
        + (c.mu5 + c.mu6 + c.lambda2 * c.lambda2 / l1) * sum(&o.ad)
        + 3.0 * eta * r1 * o.bq[1..].iter().sum::<f64>();

    let base = hs_sum_sq(&st.u, s) + r1 * hs_sum_sq(&st.w, s) + grad_d_hs(&st.d, s);
    let upper_c = 4.0 + 2.0 * e0 - l1 * e0 + 2.0 * r1 * e0;
    let lower_c = 1.0f64.min(1.0 - e0).min(1.0 - e0 * r1);
    Ok(ModifiedFunctionals {
        e_eta,
        d_eta,
        base,
        lower: lower_c * base,
        upper: upper_c * base,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coefficients::{classify, preset};
    use crate::dynamics::init::random_state;
    use crate::spectral::Grid;

    #[test]
    fn multinomial_weights_count_ordered_sequences() {
        for dim in 2..=3 {
            for k in 0..=3 {
                let total: f64 = multi_indices(dim, k).iter().map(|(_, w)| w).sum();
                assert_eq!(total, (dim as f64).powi(k as i32));
            }
        }
    }

    #[test]
    fn order_zero_reduces_to_basic_dissipation() {
        let g = Grid::new(2, 16).unwrap();
        let c = preset("damped_default").unwrap();
        let s = random_state(&g, 0.3, 7, 3.0).unwrap();
        let (_, d) = hs_functionals(&s, &c, 0, HsVariant::StrictDamping, Dealias::Full).unwrap();
        let b = super::super::basic_dissipation(&s, &c, Dealias::Full).unwrap();
        assert!((d - b.total).abs() < 1e-12 * b.scale, "{d} {}", b.total);
    }

    #[test]
    fn small_eta_recovers_plain_energy() {
        let g = Grid::new(2, 16).unwrap();
        let c = preset("damped_default").unwrap();
        let s = random_state(&g, 0.3, 8, 3.0).unwrap();
        let (e, _) = hs_functionals(&s, &c, 2, HsVariant::StrictDamping, Dealias::TwoThirds).unwrap();
        let m = modified_functionals(&s, &c, 2, 1e-12, 1.0, Dealias::TwoThirds).unwrap();
        assert!((m.e_eta - e).abs() <= 1e-9 * e);
        assert!(m.sandwich_holds(1e-12));
    }

    #[test]
    fn sandwich_at_eta0() {
        let c = preset("damped_default").unwrap();
        let e0 = eta0(&c, 1.0).unwrap();
        for dim in [2, 3] {
            let g = Grid::new(dim, 8).unwrap();
            for seed in 0..3 {
                let s = random_state(&g, 0.5, seed, 2.0).unwrap();
                let m = modified_functionals(&s, &c, 1, e0, 1.0, Dealias::TwoThirds).unwrap();
                assert!(m.sandwich_holds(1e-12), "{m:?}");
                assert!(m.d_eta >= 0.0);
            }
        }
    }

    #[test]
    fn variant_must_match_coefficients() {
        let g = Grid::new(2, 8).unwrap();
        let s = random_state(&g, 0.1, 0, 2.0).unwrap();
        let z = preset("zero_lambda1_default").unwrap();
        assert!(hs_functionals(&s, &z, 1, HsVariant::StrictDamping, Dealias::Full).is_err());
        let v = HsVariant::from_class(&classify(&z, None).unwrap()).unwrap();
        let (_, d) = hs_functionals(&s, &z, 1, v, Dealias::Full).unwrap();
        assert!(d >= 0.0);
        assert!(modified_functionals(&s, &preset("damped_default").unwrap(), 1, 10.0, 1.0, Dealias::Full).is_err());
    }
}
