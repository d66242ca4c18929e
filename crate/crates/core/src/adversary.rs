//! The optimal false-data-injection attacker.
//!
//! An attacker that wants to bias a Laplace-noised release while keeping the
//! KL divergence from honest noise below a budget `γ` draws from the tilted
//! density
//!
//! ```text
//! f_a*(y) = (k1² - b²) / (2 b k1²) · exp(-|y - θ|/b + (y - θ)/k1),   k1 > b
//! ```
//!
//! where `k1` solves `2b²/(k1² - b²) + ln(1 - b²/k1²) = γ`. The mean of
//! `f_a*` is the optimal impact `μ_a* = θ + 2b²k1/(k1² - b²)`.

use rand::distr::{Distribution, Open01};
use rand::Rng;
use serde::Serialize;

use crate::dp::PrivacyParams;
use crate::error::{Error, Result};
use crate::seed::rng_from_seed;
use crate::solver;

/// A solved attacker: KL budget, tilt parameter and resulting impact.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AttackProfile {
    base: PrivacyParams,
    gamma: f64,
    k1: f64,
    mu_star: f64,
}

impl AttackProfile {
    /// Solves `k1` for the KL budget `gamma` against the noise in `base`.
    pub fn new(base: PrivacyParams, gamma: f64) -> Result<Self> {
        let k1 = solve_k1(gamma, base.scale())?;
        Self::build(base, gamma, k1)
    }

    /// Builds a profile from an explicit tilt parameter; `γ` is derived.
    pub fn from_k1(base: PrivacyParams, k1: f64) -> Result<Self> {
        let gamma = kl_from_k1(k1, base.scale())?;
        Self::build(base, gamma, k1)
    }

    fn build(base: PrivacyParams, gamma: f64, k1: f64) -> Result<Self> {
        let b = base.scale();
        if !(k1 > b) || !k1.is_finite() {
            return Err(Error::AttackUndefined { k1, scale: b });
        }
        let mu_star = base.theta() + deviation(k1, b);
        debug_assert!({
            // closed form as a ratio; agrees up to cancellation error
            let theta = base.theta();
            let literal = (b * b * (theta - 2.0 * k1) - theta * k1 * k1) / (b * b - k1 * k1);
            (literal - mu_star).abs() <= 1e-9 * (1.0 + mu_star.abs() + theta.abs())
        });
        Ok(AttackProfile { base, gamma, k1, mu_star })
    }

    pub fn base(&self) -> &PrivacyParams {
        &self.base
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn k1(&self) -> f64 {
        self.k1
    }

    pub fn scale(&self) -> f64 {
        self.base.scale()
    }

    pub fn theta(&self) -> f64 {
        self.base.theta()
    }

    /// Optimal impact `μ_a*`.
    pub fn mu_star(&self) -> f64 {
        self.mu_star
    }

    /// `μ_a* - θ`.
    pub fn deviation(&self) -> f64 {
        deviation(self.k1, self.scale())
    }

    /// Probability of drawing below `θ` and above `θ`.
    pub fn side_probabilities(&self) -> (f64, f64) {
        let (b, k) = (self.scale(), self.k1);
        ((k - b) / (2.0 * k), (k + b) / (2.0 * k))
    }

    /// Exponential rates of the left and right branches.
    pub fn side_rates(&self) -> (f64, f64) {
        let (b, k) = (self.scale(), self.k1);
        (1.0 / b + 1.0 / k, 1.0 / b - 1.0 / k)
    }

    /// Maps an honest Laplace offset `x` (scale `b`, location 0) to the
    /// `f_a*` offset at the same quantile. Applied to honest draws this
    /// yields `f_a*` draws, each moved as little as possible.
    pub fn tilt(&self, x: f64) -> f64 {
        let b = self.scale();
        if b == 0.0 {
            return x;
        }
        let (p_left, p_right) = self.side_probabilities();
        let (rate_left, rate_right) = self.side_rates();
        let half = 0.5f64.ln();
        if x >= 0.0 {
            // ln(1 - F0(x)) = ln ½ - x/b
            return (x / b - half + p_right.ln()) / rate_right;
        }
        let ln_u = half + x / b;
        if ln_u < p_left.ln() {
            (ln_u - p_left.ln()) / rate_left
        } else {
            let ln_tail = (-0.5 * (x / b).exp()).ln_1p();
            (p_right.ln() - ln_tail) / rate_right
        }
    }

    /// Draws a zero-location offset `y - θ` from `f_a*`.
    pub fn sample_offset<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let (p_left, _) = self.side_probabilities();
        let (rate_left, rate_right) = self.side_rates();
        let pick: f64 = rng.random();
        let u: f64 = Open01.sample(rng);
        if pick < p_left {
            u.ln() / rate_left
        } else {
            -u.ln() / rate_right
        }
    }
}

/// `2b²k1/(k1² - b²)`, written to stay accurate when `k1 ≫ b`.
fn deviation(k1: f64, b: f64) -> f64 {
    let r = b / k1;
    2.0 * b * r / (1.0 - r * r)
}

/// Density of the optimal attack distribution.
pub fn attack_pdf(y: f64, a: &AttackProfile) -> f64 {
    let (b, k, theta) = (a.scale(), a.k1, a.theta());
    let r = b / k;
    let norm = (1.0 - r * r) / (2.0 * b);
    norm * (-(y - theta).abs() / b + (y - theta) / k).exp()
}

/// KL divergence `D(f_a* || f0)` as a function of the tilt parameter.
pub fn kl_from_k1(k1: f64, b: f64) -> Result<f64> {
    if !(b > 0.0) || !(k1 > b) || !k1.is_finite() {
        return Err(Error::AttackUndefined { k1, scale: b });
    }
    let r = (b / k1) * (b / k1);
    Ok(2.0 * r / (1.0 - r) + (-r).ln_1p())
}

/// Solves `kl_from_k1(k1, b) = γ` for `k1 > b`.
pub fn solve_k1(gamma: f64, b: f64) -> Result<f64> {
    if !(gamma > 0.0) || gamma.is_infinite() {
        return Err(Error::DegenerateStealthBudget(gamma));
    }
    if !(b > 0.0) || !b.is_finite() {
        return Err(Error::InvalidParameter(format!("scale b must be > 0, got {b}")));
    }
    // Work in t = k1/b so the bracket is scale free.
    let mut f = |t: f64| {
        let r = 1.0 / (t * t);
        2.0 * r / (1.0 - r) + (-r).ln_1p() - gamma
    };
    let lo = 1.0 + 1e-12;
    if f(lo) <= 0.0 {
        return Err(Error::NoSignChange { lo: b * lo, hi: b * lo });
    }
    let hi = solver::expand_upper(&mut f, lo, 2.0, 1100)?;
    let t = solver::bisect(f, lo, hi, 0.0)?;
    Ok(t * b)
}

/// `μ_a*` of a profile.
pub fn optimal_impact(a: &AttackProfile) -> f64 {
    a.mu_star()
}

/// Draws a value from `f_a*` (location `θ`).
///
/// Uses the exact two-exponential decomposition: with probability
/// `(k1-b)/(2k1)` return `θ - Exp(1/b + 1/k1)`, otherwise
/// `θ + Exp(1/b - 1/k1)`.
pub fn sample_attack_noise<R: Rng + ?Sized>(a: &AttackProfile, rng: &mut R) -> f64 {
    a.theta() + a.sample_offset(rng)
}

pub fn sample_attack_noise_seeded(a: &AttackProfile, seed: u64) -> f64 {
    sample_attack_noise(a, &mut rng_from_seed(seed))
}
