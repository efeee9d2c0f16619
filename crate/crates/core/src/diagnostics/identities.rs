use crate::coefficients::LeslieCoefficients;
use crate::constitutive::{check_fields, leslie_stress_block, PointKinematics, Samples, StressBlock};
use crate::error::ElhError;
use crate::spectral::{divergence, inner, Dealias, Evaluator, SpectralField};

/// One stress-work identity: `<div sigma_block, u>` against its closed form.
#[derive(Debug, Clone, PartialEq)]
pub struct IdentityCheck {
    pub name: &'static str,
    pub lhs: f64,
    pub rhs: f64,
}

impl IdentityCheck {
    pub fn defect(&self) -> f64 {
        (self.lhs - self.rhs).abs()
    }

    pub fn holds(&self, tol: f64) -> bool {
        self.defect() <= tol * (self.lhs.abs() + self.rhs.abs() + 1e-30)
    }
}

pub const IDENTITY_NAMES: [&str; 4] = ["mu1", "rotation", "stretching", "director_rate"];

/// The four block identities, each with both sides computed independently.
pub fn identity_suite(
    u: &SpectralField,
    d: &SpectralField,
    w: &SpectralField,
    c: &LeslieCoefficients,
    rule: Dealias,
) -> Result<Vec<IdentityCheck>, ElhError> {
    check_fields(u, d, w)?;
    let blocks = [
        StressBlock::Mu1,
        StressBlock::RotationB,
        StressBlock::StretchA,
        StressBlock::DirectorRate,
    ];
    let mut lhs = [0.0; 4];
    for (slot, block) in lhs.iter_mut().zip(blocks) {
        let sigma = leslie_stress_block(u, d, w, c, block, rule)?;
        *slot = inner(&divergence(&sigma)?, u);
    }

    let dim = u.grid().dim();
    let ev = Evaluator::new(u.grid(), rule, 5);
    let s = Samples::gather(&ev, u, d, w);
    let mut dad2 = vec![0.0; s.len];
    let mut bb = vec![0.0; s.len];
    let mut ba = vec![0.0; s.len];
    let mut aa = vec![0.0; s.len];
    let mut wa = vec![0.0; s.len];
    let mut wb = vec![0.0; s.len];
    for p in 0..s.len {
        let (gu, dp, wp) = s.at(p);
        let k = PointKinematics::new(dim, &gu, &dp);
        dad2[p] = k.dad * k.dad;
        for i in 0..dim {
            bb[p] += k.bd[i] * k.bd[i];
            ba[p] += k.bd[i] * k.ad[i];
            aa[p] += k.ad[i] * k.ad[i];
            wa[p] += wp[i] * k.ad[i];
            wb[p] += wp[i] * k.bd[i];
        }
    }
    let int = |v: &[f64]| ev.integrate(v);
    let (l1, l2) = (c.lambda1, c.lambda2);
    let rhs = [
        -c.mu1 * int(&dad2),
        l1 * int(&bb) + l2 * int(&ba),
        -(c.mu5 + c.mu6) * int(&aa) + l2 * int(&ba),
        l2 * int(&wa) + l1 * int(&wb),
    ];
    Ok(IDENTITY_NAMES
        .iter()
        .zip(lhs.iter().zip(rhs.iter()))
        .map(|(&name, (&l, &r))| IdentityCheck { name, lhs: l, rhs: r })
        .collect())
}
