//! Leslie material coefficients and their dissipativity classes.
//!
//! Only five coefficients are independent once the Parodi relation is
//! imposed. [`LeslieCoefficients::from_independent`] takes
//! `(mu1, mu4, mu5, mu6, lambda1)` plus the inertial constant and derives
//! `mu2`, `mu3` and `lambda2`, so the algebraic relations hold by
//! construction.

use std::fmt;

use thiserror::Error;

/// Tolerance for equality tests on values that went through text.
pub const ROUND_TRIP_TOL: f64 = 1e-12;

/// Names accepted by [`preset`].
pub const PRESET_NAMES: [&str; 3] = ["wave_map", "damped_default", "zero_lambda1_default"];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CoefficientError {
    #[error("rho1 must be > 0 (got {0}); the parabolic rho1 = 0 limit is not supported")]
    NonPositiveRho1(f64),
    #[error("coefficient {name} is not finite ({value})")]
    NonFinite { name: &'static str, value: f64 },
    #[error("delta must lie in (0, 1) when lambda1 = 0 (got {0:?})")]
    BadDelta(Option<f64>),
    #[error("unknown coefficient preset {name:?}; valid presets: {}", PRESET_NAMES.join(", "))]
    UnknownPreset { name: String },
    #[error("eta0 is defined only in the strict-damping case (lambda1 < 0); got lambda1 = {0}")]
    NotStrictDamping(f64),
    #[error("estimate constant C must be > 0 (got {0})")]
    BadEstimateConstant(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LeslieCoefficients {
    pub mu1: f64,
    pub mu2: f64,
    pub mu3: f64,
    pub mu4: f64,
    pub mu5: f64,
    pub mu6: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    pub rho1: f64,
    /// Splitting parameter used by the `lambda1 = 0` class.
    pub delta: Option<f64>,
}

impl LeslieCoefficients {
    pub fn from_independent(
        mu1: f64,
        mu4: f64,
        mu5: f64,
        mu6: f64,
        lambda1: f64,
        rho1: f64,
    ) -> Result<Self, CoefficientError> {
        for (name, value) in [
            ("mu1", mu1),
            ("mu4", mu4),
            ("mu5", mu5),
            ("mu6", mu6),
            ("lambda1", lambda1),
            ("rho1", rho1),
        ] {
            if !value.is_finite() {
                return Err(CoefficientError::NonFinite { name, value });
            }
        }
        if rho1 <= 0.0 {
            return Err(CoefficientError::NonPositiveRho1(rho1));
        }
        let lambda2 = mu5 - mu6;
        // lambda1 = mu2 - mu3 and mu2 + mu3 = mu6 - mu5 = -lambda2.
        let mu2 = (lambda1 - lambda2) / 2.0;
        let mu3 = -(lambda1 + lambda2) / 2.0;
        Ok(Self {
            mu1,
            mu2,
            mu3,
            mu4,
            mu5,
            mu6,
            lambda1,
            lambda2,
            rho1,
            delta: None,
        })
    }

    pub fn with_delta(mut self, delta: f64) -> Self {
        self.delta = Some(delta);
        self
    }

    /// Residuals of the three linear relations, in the order
    /// `lambda1 - (mu2 - mu3)`, `lambda2 - (mu5 - mu6)`, `(mu2 + mu3) - (mu6 - mu5)`.
    pub fn relation_residuals(&self) -> [f64; 3] {
        [
            self.lambda1 - (self.mu2 - self.mu3),
            self.lambda2 - (self.mu5 - self.mu6),
            (self.mu2 + self.mu3) - (self.mu6 - self.mu5),
        ]
    }

    /// True when all relations hold within `tol` (use 0.0 for exact).
    pub fn relations_hold(&self, tol: f64) -> bool {
        self.relation_residuals().iter().all(|r| r.abs() <= tol)
    }

    /// Multiply every viscosity (`mu1..mu6`, hence `lambda1`, `lambda2`) by `t`.
    pub fn scaled_viscosities(&self, t: f64) -> Self {
        Self {
            mu1: self.mu1 * t,
            mu2: self.mu2 * t,
            mu3: self.mu3 * t,
            mu4: self.mu4 * t,
            mu5: self.mu5 * t,
            mu6: self.mu6 * t,
            lambda1: self.lambda1 * t,
            lambda2: self.lambda2 * t,
            ..*self
        }
    }

    /// True when every Leslie-stress coefficient other than `mu4` vanishes.
    pub fn is_wave_map(&self) -> bool {
        [self.mu1, self.mu2, self.mu3, self.mu5, self.mu6]
            .iter()
            .all(|m| *m == 0.0)
    }
}

impl fmt::Display for LeslieCoefficients {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "mu1={} mu2={} mu3={} mu4={} mu5={} mu6={} lambda1={} lambda2={} rho1={}",
            self.mu1,
            self.mu2,
            self.mu3,
            self.mu4,
            self.mu5,
            self.mu6,
            self.lambda1,
            self.lambda2,
            self.rho1
        )?;
        if let Some(delta) = self.delta {
            write!(f, " delta={delta}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum DissipationClass {
    /// `mu1 >= 0, mu4 > 0, lambda1 < 0, mu5 + mu6 + lambda2^2/lambda1 >= 0`.
    StrictDamping,
    /// `mu1 >= 0, mu4 > 0, lambda1 = 0, (1 - delta) mu4 (mu5 + mu6) >= 2 lambda2^2`.
    ZeroLambda1(f64),
    Invalid(String),
}

impl DissipationClass {
    pub fn is_dissipative(&self) -> bool {
        !matches!(self, DissipationClass::Invalid(_))
    }
}

impl fmt::Display for DissipationClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DissipationClass::StrictDamping => write!(f, "StrictDamping"),
            DissipationClass::ZeroLambda1(delta) => write!(f, "ZeroLambda1(delta={delta})"),
            DissipationClass::Invalid(reason) => write!(f, "Invalid({reason})"),
        }
    }
}

/// Classify `c`. `delta` is consulted only when `lambda1 = 0`; when it is
/// `None` the value stored on `c` is used.
pub fn classify(
    c: &LeslieCoefficients,
    delta: Option<f64>,
) -> Result<DissipationClass, CoefficientError> {
    if c.mu1 < 0.0 {
        return Ok(DissipationClass::Invalid("mu1 >= 0 violated".into()));
    }
    if c.mu4 <= 0.0 {
        return Ok(DissipationClass::Invalid("mu4 > 0 violated".into()));
    }
    if c.lambda1 < 0.0 {
        let margin = c.mu5 + c.mu6 + c.lambda2 * c.lambda2 / c.lambda1;
        if margin >= 0.0 {
            Ok(DissipationClass::StrictDamping)
        } else {
            Ok(DissipationClass::Invalid(format!(
                "mu5 + mu6 + lambda2^2/lambda1 >= 0 violated ({margin})"
            )))
        }
    } else if c.lambda1 == 0.0 {
        let delta = delta.or(c.delta);
        let delta = match delta {
            Some(d) if d > 0.0 && d < 1.0 => d,
            other => return Err(CoefficientError::BadDelta(other)),
        };
        let lhs = (1.0 - delta) * c.mu4 * (c.mu5 + c.mu6);
        let rhs = 2.0 * c.lambda2 * c.lambda2;
        if lhs >= rhs {
            Ok(DissipationClass::ZeroLambda1(delta))
        } else {
            Ok(DissipationClass::Invalid(format!(
                "(1 - delta) mu4 (mu5 + mu6) >= 2 lambda2^2 violated ({lhs} < {rhs})"
            )))
        }
    } else {
        Ok(DissipationClass::Invalid("lambda1 <= 0 violated".into()))
    }
}

pub fn preset(name: &str) -> Result<LeslieCoefficients, CoefficientError> {
    match name {
        "wave_map" => LeslieCoefficients::from_independent(0.0, 1.0, 0.0, 0.0, 0.0, 1.0),
        "damped_default" => LeslieCoefficients::from_independent(1.0, 2.0, 1.0, 1.0, -1.0, 1.0),
        "zero_lambda1_default" => {
            LeslieCoefficients::from_independent(0.0, 4.0, 1.0, 0.5, 0.0, 1.0)
                .map(|c| c.with_delta(0.5))
        }
        other => Err(CoefficientError::UnknownPreset {
            name: other.to_string(),
        }),
    }
}

/// Upper admissible weight for the modified energy functional.
///
/// `estimate_constant` stands for the Sobolev/estimate constant that the
/// analysis leaves unspecified; callers choose it. The factor
/// `(1 - |lambda2| / lambda1)` is evaluated literally (it exceeds one for
/// `lambda1 < 0`).
pub fn eta0(c: &LeslieCoefficients, estimate_constant: f64) -> Result<f64, CoefficientError> {
    if c.lambda1 >= 0.0 {
        return Err(CoefficientError::NotStrictDamping(c.lambda1));
    }
    if !(estimate_constant > 0.0) || !estimate_constant.is_finite() {
        return Err(CoefficientError::BadEstimateConstant(estimate_constant));
    }
    let tilt = 1.0 - c.lambda2.abs() / c.lambda1;
    let coupling = (c.lambda1.abs() + c.lambda2.abs()) * estimate_constant;
    let first = 0.5 * c.mu4 / (3.0 * c.rho1 * tilt * tilt + coupling * coupling);
    let candidates = [first, -c.lambda1 / (2.0 * c.rho1), 1.0 / c.rho1, 1.0];
    let min = candidates.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(0.5 * min)
}
