//! Laplace mechanism: privacy parameters, noise sampling, noisy aggregate
//! queries and an empirical ε-indistinguishability check.
//!
//! The density is the standard one,
//!
//! ```text
//! f0(y) = 1/(2b) · exp(-|y - θ| / b),   b = Δf / ε
//! ```
//!
//! and noise is drawn by inverse transform: for `u ~ U(-1/2, 1/2)`,
//! `-b · sgn(u) · ln(1 - 2|u|)` is Laplace(0, b).

use rand::distr::{Distribution, Open01};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed::{labeled_rng, rng_from_seed};

/// Sensitivity, privacy loss and location of a Laplace mechanism.
///
/// The scale `b = Δf/ε` is always derived, never stored.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPrivacyParams", into = "RawPrivacyParams")]
pub struct PrivacyParams {
    sensitivity: f64,
    epsilon: f64,
    theta: f64,
}

#[derive(Serialize, Deserialize)]
struct RawPrivacyParams {
    sensitivity: f64,
    epsilon: f64,
    #[serde(default)]
    theta: f64,
}

impl TryFrom<RawPrivacyParams> for PrivacyParams {
    type Error = Error;

    fn try_from(raw: RawPrivacyParams) -> Result<Self> {
        PrivacyParams::new(raw.sensitivity, raw.epsilon, raw.theta)
    }
}

impl From<PrivacyParams> for RawPrivacyParams {
    fn from(p: PrivacyParams) -> Self {
        RawPrivacyParams { sensitivity: p.sensitivity, epsilon: p.epsilon, theta: p.theta }
    }
}

impl PrivacyParams {
    /// Rejects `ε <= 0`, `Δf < 0` and non-finite values.
    pub fn new(sensitivity: f64, epsilon: f64, theta: f64) -> Result<Self> {
        if !sensitivity.is_finite() || sensitivity < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "sensitivity must be finite and >= 0, got {sensitivity}"
            )));
        }
        if !(epsilon > 0.0) {
            return Err(Error::InvalidParameter(format!("epsilon must be > 0, got {epsilon}")));
        }
        if !theta.is_finite() {
            return Err(Error::InvalidParameter(format!("theta must be finite, got {theta}")));
        }
        Ok(Self { sensitivity, epsilon, theta })
    }

    /// Parameters with unit privacy loss and the given scale, i.e. `Δf = b`, `ε = 1`.
    pub fn from_scale(scale: f64, theta: f64) -> Result<Self> {
        Self::new(scale, 1.0, theta)
    }

    pub fn sensitivity(&self) -> f64 {
        self.sensitivity
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// Scale `b = Δf/ε`.
    pub fn scale(&self) -> f64 {
        self.sensitivity / self.epsilon
    }

    pub fn with_theta(self, theta: f64) -> Result<Self> {
        Self::new(self.sensitivity, self.epsilon, theta)
    }
}

/// Ordered list of records (the X, X′ or V of a query).
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Dataset(pub Vec<f64>);

impl Dataset {
    pub fn new(values: Vec<f64>) -> Self {
        Dataset(values)
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// True iff both datasets have the same length and differ in exactly one entry.
    pub fn is_adjacent(&self, other: &Dataset) -> bool {
        self.len() == other.len()
            && self.0.iter().zip(&other.0).filter(|(a, b)| a != b).count() == 1
    }

    /// Copy with entry `index` replaced.
    pub fn with_replaced(&self, index: usize, value: f64) -> Dataset {
        let mut v = self.0.clone();
        v[index] = value;
        Dataset(v)
    }
}

impl From<Vec<f64>> for Dataset {
    fn from(v: Vec<f64>) -> Self {
        Dataset(v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QueryKind {
    Sum,
    Mean,
}

impl QueryKind {
    /// Exact aggregate; `None` for an empty slice.
    pub fn aggregate(self, values: &[f64]) -> Option<f64> {
        if values.is_empty() {
            return None;
        }
        let s: f64 = values.iter().sum();
        Some(match self {
            QueryKind::Sum => s,
            QueryKind::Mean => s / values.len() as f64,
        })
    }
}

/// A released query answer together with its exact value and the noise added.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoisyResult {
    pub true_value: f64,
    pub noise: f64,
    pub released: f64,
}

impl NoisyResult {
    pub fn new(true_value: f64, noise: f64) -> Self {
        NoisyResult { true_value, noise, released: true_value + noise }
    }
}

/// Laplace density at `y` with location `θ` and scale `b`.
///
/// A zero scale (Δf = 0) degenerates to a point mass at `θ`.
pub fn laplace_pdf(y: f64, p: &PrivacyParams) -> f64 {
    let b = p.scale();
    if b == 0.0 {
        return if y == p.theta { f64::INFINITY } else { 0.0 };
    }
    (-(y - p.theta).abs() / b).exp() / (2.0 * b)
}

/// One zero-location Laplace draw at scale `b`; the caller adds `θ` if needed.
pub fn sample_laplace<R: Rng + ?Sized>(p: &PrivacyParams, rng: &mut R) -> f64 {
    laplace_noise(p.scale(), rng)
}

/// Seeded convenience wrapper around [`sample_laplace`].
pub fn sample_laplace_seeded(p: &PrivacyParams, seed: u64) -> f64 {
    sample_laplace(p, &mut rng_from_seed(seed))
}

/// Inverse-transform Laplace(0, scale) draw.
pub fn laplace_noise<R: Rng + ?Sized>(scale: f64, rng: &mut R) -> f64 {
    if scale == 0.0 {
        return 0.0;
    }
    let v: f64 = Open01.sample(rng);
    let u = v - 0.5;
    // 1 - 2|u| lies in (0, 1] since v is never 0 or 1
    -scale * u.signum() * (1.0 - 2.0 * u.abs()).ln()
}

/// Answers `kind` over `d` with Laplace noise.
///
/// `p.sensitivity()` is the per-record bound Δf of the sum query. For
/// [`QueryKind::Mean`] the effective sensitivity is `Δf / n`.
pub fn dp_query<R: Rng + ?Sized>(
    d: &Dataset,
    kind: QueryKind,
    p: &PrivacyParams,
    rng: &mut R,
) -> Result<NoisyResult> {
    let truth = kind.aggregate(d.values()).ok_or(Error::EmptyQueryDomain)?;
    let scale = query_scale(kind, p, d.len());
    Ok(NoisyResult::new(truth, laplace_noise(scale, rng)))
}

pub fn dp_query_seeded(d: &Dataset, kind: QueryKind, p: &PrivacyParams, seed: u64) -> Result<NoisyResult> {
    dp_query(d, kind, p, &mut rng_from_seed(seed))
}

/// Noise scale actually applied by [`dp_query`] for a dataset of `n` records.
pub fn query_scale(kind: QueryKind, p: &PrivacyParams, n: usize) -> f64 {
    match kind {
        QueryKind::Sum => p.scale(),
        QueryKind::Mean => p.scale() / n as f64,
    }
}

/// Outcome of a histogram-based indistinguishability test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndistinguishabilityReport {
    /// Largest `|ln(count_X / count_X′)|` over well-populated bins.
    pub max_log_ratio: f64,
    /// Largest `|ln ratio| - ε - slack` over the same bins; positive means a violation.
    pub max_excess: f64,
    pub claimed_epsilon: f64,
    pub bins_used: usize,
    pub pass: bool,
}

/// Empirical check that released sums on adjacent datasets stay within `e^ε`.
///
/// Both datasets are queried `trials` times, the releases histogrammed over
/// `bins` equal-width bins, and only bins holding at least
/// [`IndistinguishabilityTest::MIN_BIN_COUNT`] releases from each side are
/// compared. Per-bin slack is `3·sqrt(1/c_X + 1/c_X′)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IndistinguishabilityTest {
    pub trials: usize,
    pub bins: usize,
    pub seed: u64,
}

impl IndistinguishabilityTest {
    pub const MIN_TRIALS: usize = 100_000;
    pub const MIN_BIN_COUNT: u64 = 100;

    pub fn run(&self, x: &Dataset, x_prime: &Dataset, p: &PrivacyParams) -> Result<IndistinguishabilityReport> {
        self.run_with_scale(x, x_prime, p.scale(), p.epsilon())
    }

    /// Runs the sum mechanism with an explicit noise scale against a claimed ε.
    ///
    /// Passing a scale smaller than `Δf/ε` exercises a mechanism that does not
    /// meet its claim.
    pub fn run_with_scale(
        &self,
        x: &Dataset,
        x_prime: &Dataset,
        noise_scale: f64,
        claimed_epsilon: f64,
    ) -> Result<IndistinguishabilityReport> {
        if !x.is_adjacent(x_prime) {
            return Err(Error::NotAdjacent(format!(
                "expected equal length and exactly one differing entry (lengths {} and {})",
                x.len(),
                x_prime.len()
            )));
        }
        if self.trials < Self::MIN_TRIALS {
            return Err(Error::InvalidParameter(format!(
                "n_trials must be >= {}, got {}",
                Self::MIN_TRIALS,
                self.trials
            )));
        }
        if self.bins == 0 {
            return Err(Error::InvalidParameter("n_bins must be >= 1".into()));
        }
        if !(noise_scale > 0.0) || !noise_scale.is_finite() {
            return Err(Error::InvalidParameter(format!("noise scale must be > 0, got {noise_scale}")));
        }
        let sx = QueryKind::Sum.aggregate(x.values()).ok_or(Error::EmptyQueryDomain)?;
        let sxp = QueryKind::Sum.aggregate(x_prime.values()).ok_or(Error::EmptyQueryDomain)?;
        let lo = sx.min(sxp) - 10.0 * noise_scale;
        let hi = sx.max(sxp) + 10.0 * noise_scale;
        let width = (hi - lo) / self.bins as f64;

        let histogram = |truth: f64, label: &str| {
            let mut rng = labeled_rng(self.seed, label);
            let mut counts = vec![0u64; self.bins];
            for _ in 0..self.trials {
                let y = truth + laplace_noise(noise_scale, &mut rng);
                let idx = ((y - lo) / width).floor();
                if idx >= 0.0 && (idx as usize) < self.bins {
                    counts[idx as usize] += 1;
                }
            }
            counts
        };
        let hx = histogram(sx, "indistinguishability/X");
        let hxp = histogram(sxp, "indistinguishability/X'");

        let mut max_log_ratio = 0.0f64;
        let mut max_excess = f64::NEG_INFINITY;
        let mut bins_used = 0;
        for (&a, &b) in hx.iter().zip(&hxp) {
            if a < Self::MIN_BIN_COUNT || b < Self::MIN_BIN_COUNT {
                continue;
            }
            bins_used += 1;
            let (a, b) = (a as f64, b as f64);
            let lr = (a / b).ln().abs();
            let slack = 3.0 * (1.0 / a + 1.0 / b).sqrt();
            max_log_ratio = max_log_ratio.max(lr);
            max_excess = max_excess.max(lr - claimed_epsilon - slack);
        }
        if bins_used == 0 {
            return Err(Error::InvalidParameter(
                "no histogram bin reached the minimum count; increase n_trials or reduce n_bins".into(),
            ));
        }
        Ok(IndistinguishabilityReport {
            max_log_ratio,
            max_excess,
            claimed_epsilon,
            bins_used,
            pass: max_excess <= 0.0,
        })
    }
}

/// Spec-shaped entry point for [`IndistinguishabilityTest::run`].
pub fn indistinguishability_check(
    x: &Dataset,
    x_prime: &Dataset,
    p: &PrivacyParams,
    n_trials: usize,
    n_bins: usize,
    seed: u64,
) -> Result<IndistinguishabilityReport> {
    IndistinguishabilityTest { trials: n_trials, bins: n_bins, seed }.run(x, x_prime, p)
}
