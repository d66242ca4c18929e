//! Defender-side design: pick ε so that the optimal attack against the
//! released query cannot move its mean by more than a tolerated deviation.
//!
//! Given a tolerated deviation `d = μ_a* - θ` and an assumed attacker budget
//! `γ`, the tilt parameter solves
//!
//! ```text
//! d/k1 + ln(2k1 / (2k1 + d)) = γ
//! ```
//!
//! after which `b = sqrt(k1² d / (2k1 + d))` and `ε = Δf / b`. This is the
//! exact algebraic inverse of the attacker's forward pipeline in
//! [`crate::adversary`].

use serde::{Deserialize, Serialize};

use crate::adversary::AttackProfile;
use crate::dp::PrivacyParams;
use crate::error::{Error, Result};
use crate::solver;

/// Inputs of the design problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DesignSpec {
    pub sensitivity: f64,
    pub gamma: f64,
    pub theta: f64,
    pub max_deviation: f64,
}

impl DesignSpec {
    pub fn new(sensitivity: f64, gamma: f64, theta: f64, max_deviation: f64) -> Self {
        DesignSpec { sensitivity, gamma, theta, max_deviation }
    }

    fn validate(&self) -> Result<()> {
        if !self.sensitivity.is_finite() || self.sensitivity < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "sensitivity must be finite and >= 0, got {}",
                self.sensitivity
            )));
        }
        if !self.theta.is_finite() {
            return Err(Error::InvalidParameter(format!("theta must be finite, got {}", self.theta)));
        }
        Ok(())
    }
}

/// Solved design: tilt parameter, scale, privacy loss and the impact the
/// forward attacker pipeline predicts at that ε.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DesignResult {
    pub k1: f64,
    pub scale: f64,
    pub epsilon: f64,
    pub predicted_impact: f64,
}

/// Residual of the design equation; strictly decreasing in `k1`.
fn design_residual(k1: f64, d: f64, gamma: f64) -> f64 {
    d / k1 - (d / (2.0 * k1)).ln_1p() - gamma
}

/// Solves `d/k1 + ln(2k1/(2k1 + d)) = γ` for `k1 > 0`.
pub fn solve_design_k1(d: f64, gamma: f64) -> Result<f64> {
    if !(d > 0.0) || !d.is_finite() || !(gamma > 0.0) || !gamma.is_finite() {
        return Err(Error::BoundaryCase(format!("d = {d}, gamma = {gamma}")));
    }
    // The root scales with d; solve for s = k1/d.
    let f = |s: f64| design_residual(s, 1.0, gamma);
    let mut lo = 1e-9;
    while f(lo) <= 0.0 {
        lo *= 1e-3;
        if lo < 1e-300 {
            return Err(Error::NoSignChange { lo: lo * d, hi: 1e9 * d });
        }
    }
    let mut hi = 1e9;
    while f(hi) >= 0.0 {
        hi *= 1e3;
        if !hi.is_finite() {
            return Err(Error::NoSignChange { lo: lo * d, hi });
        }
    }
    Ok(solver::bisect(f, lo, hi, 0.0)? * d)
}

/// Scale `b = sqrt(k1² d / (2k1 + d))`.
pub fn design_scale(k1: f64, d: f64) -> f64 {
    k1 * (d / (2.0 * k1 + d)).sqrt()
}

/// Computes the privacy loss that caps the optimal attack's deviation at
/// `spec.max_deviation`.
///
/// The returned `predicted_impact` comes from re-solving the attacker at the
/// chosen ε; a mismatch with `θ + d` beyond `1e-6` (relative for `d > 1`)
/// is reported as [`Error::RoundTrip`].
pub fn calibrate_epsilon(spec: &DesignSpec) -> Result<DesignResult> {
    spec.validate()?;
    let d = spec.max_deviation;
    let k1 = solve_design_k1(d, spec.gamma)?;
    if spec.sensitivity == 0.0 {
        return Err(Error::ZeroSensitivity);
    }
    let scale = design_scale(k1, d);
    let epsilon = spec.sensitivity / scale;

    let base = PrivacyParams::new(spec.sensitivity, epsilon, spec.theta)?;
    let attacker = AttackProfile::new(base, spec.gamma)?;
    let predicted_impact = attacker.mu_star();
    let predicted_dev = attacker.deviation();
    if (predicted_dev - d).abs() > 1e-6 * d.max(1.0) {
        return Err(Error::RoundTrip { predicted: predicted_dev, requested: d });
    }
    Ok(DesignResult { k1, scale, epsilon, predicted_impact })
}

/// Degenerate design regimes where no finite ε solves the problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryCase {
    /// Zero tolerated deviation: `b → 0`, `ε → ∞` (no noise at all).
    NoNoiseLimit,
    /// Attacker indifferent to detection (`γ → ∞`): `b → ∞`, `ε → 0`.
    UnboundedImpactLimit,
}

impl BoundaryCase {
    pub fn limiting_scale(self) -> f64 {
        match self {
            BoundaryCase::NoNoiseLimit => 0.0,
            BoundaryCase::UnboundedImpactLimit => f64::INFINITY,
        }
    }

    pub fn limiting_epsilon(self) -> f64 {
        match self {
            BoundaryCase::NoNoiseLimit => f64::INFINITY,
            BoundaryCase::UnboundedImpactLimit => 0.0,
        }
    }
}

/// Classifies `d = 0` or `γ = ∞` (also `d = ∞`) without solving anything.
pub fn boundary_report(max_deviation: f64, gamma: f64) -> Result<BoundaryCase> {
    if gamma == f64::INFINITY || max_deviation == f64::INFINITY {
        Ok(BoundaryCase::UnboundedImpactLimit)
    } else if max_deviation == 0.0 {
        Ok(BoundaryCase::NoNoiseLimit)
    } else {
        Err(Error::NotDegenerate)
    }
}
