//! Quality of service under privacy noise and attack: forecast-based
//! privacy/security cost and the utility impact of short attacks.
//!
//! Costs compare forecasts, not raw data. With `F(x)` the forecast of series
//! `x`:
//!
//! ```text
//! privacy_cost  = MAE(F(dp),     F(original))
//! security_cost = MAE(F(fdi_dp), F(dp))
//! defense_cost  = privacy_cost + security_cost
//! ```

use std::ops::Range;

use chrono::Duration;
use serde::{Deserialize, Serialize};

use crate::adversary::AttackProfile;
use crate::dp::{laplace_noise, PrivacyParams};
use crate::error::{Error, Result};
use crate::seed::{derive_seed, labeled_rng};
use crate::series::MeasurementSeries;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ForecastMethod {
    SeasonalNaive,
    HoltWinters,
}

/// Forecast horizon, method and (for Holt-Winters) fixed smoothing weights.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForecastConfig {
    pub horizon: usize,
    pub method: ForecastMethod,
    pub season_length: usize,
    pub level_smoothing: f64,
    pub trend_smoothing: f64,
    pub season_smoothing: f64,
}

impl Default for ForecastConfig {
    fn default() -> Self {
        ForecastConfig {
            horizon: 24 * 7,
            method: ForecastMethod::HoltWinters,
            season_length: 24,
            level_smoothing: 0.1,
            trend_smoothing: 0.01,
            season_smoothing: 0.05,
        }
    }
}

impl ForecastConfig {
    fn validate(&self) -> Result<()> {
        if self.horizon < 1 || self.season_length < 1 {
            return Err(Error::InvalidParameter("horizon and season_length must be >= 1".into()));
        }
        for (name, v) in [
            ("level_smoothing", self.level_smoothing),
            ("trend_smoothing", self.trend_smoothing),
            ("season_smoothing", self.season_smoothing),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidParameter(format!("{name} must be in [0, 1], got {v}")));
            }
        }
        Ok(())
    }
}

/// Additive Holt-Winters state after a pass over the data.
struct HoltWinters {
    level: f64,
    trend: f64,
    season: Vec<f64>,
    /// Number of observations consumed.
    n: usize,
}

impl HoltWinters {
    /// Initializes from the first two seasons, then smooths through `y`,
    /// calling `on_predict(t, one_step_prediction)` for every `t >= m`.
    fn fit(y: &[f64], cfg: &ForecastConfig, mut on_predict: impl FnMut(usize, f64)) -> Self {
        let m = cfg.season_length;
        let mean1 = y[..m].iter().sum::<f64>() / m as f64;
        let mean2 = y[m..2 * m].iter().sum::<f64>() / m as f64;
        let trend0 = (mean2 - mean1) / m as f64;
        let centre = (m as f64 - 1.0) / 2.0;
        let mut season: Vec<f64> =
            (0..m).map(|i| y[i] - (mean1 + trend0 * (i as f64 - centre))).collect();
        let mut level = mean1 + trend0 * centre;
        let mut trend = trend0;
        let (a, b, g) = (cfg.level_smoothing, cfg.trend_smoothing, cfg.season_smoothing);
        for (t, &obs) in y.iter().enumerate().skip(m) {
            let s = season[t % m];
            on_predict(t, level + trend + s);
            let new_level = a * (obs - s) + (1.0 - a) * (level + trend);
            trend = b * (new_level - level) + (1.0 - b) * trend;
            level = new_level;
            season[t % m] = g * (obs - level) + (1.0 - g) * s;
        }
        HoltWinters { level, trend, season, n: y.len() }
    }

    fn forecast(&self, h: usize) -> f64 {
        let m = self.season.len();
        self.level + h as f64 * self.trend + self.season[(self.n + h - 1) % m]
    }
}

fn check_length(n: usize, cfg: &ForecastConfig) -> Result<()> {
    let required = 2 * cfg.season_length;
    if n < required {
        return Err(Error::SeriesTooShort { required, actual: n });
    }
    Ok(())
}

/// Forecast of `cfg.horizon` values from a plain slice.
pub fn forecast_values(y: &[f64], cfg: &ForecastConfig) -> Result<Vec<f64>> {
    cfg.validate()?;
    check_length(y.len(), cfg)?;
    let m = cfg.season_length;
    Ok(match cfg.method {
        ForecastMethod::SeasonalNaive => {
            let last = &y[y.len() - m..];
            (0..cfg.horizon).map(|h| last[h % m]).collect()
        }
        ForecastMethod::HoltWinters => {
            let hw = HoltWinters::fit(y, cfg, |_, _| {});
            (1..=cfg.horizon).map(|h| hw.forecast(h)).collect()
        }
    })
}

/// Forecasts the present values of `series`; missing entries are skipped,
/// not imputed. Output timestamps continue at the spacing of the last two
/// readings (one hour for a single reading).
pub fn forecast(series: &MeasurementSeries, cfg: &ForecastConfig) -> Result<MeasurementSeries> {
    let values = forecast_values(&series.present_values(), cfg)?;
    let ts = series.timestamps();
    let last = *ts.last().expect("checked length");
    let step = match ts.len() {
        0 | 1 => Duration::hours(1),
        n => ts[n - 1] - ts[n - 2],
    };
    let start = last + step;
    Ok(MeasurementSeries::regular(series.channel, start, step, values))
}

/// Mean absolute one-step-ahead in-sample error over `t >= 2m`.
pub fn one_step_mae(y: &[f64], cfg: &ForecastConfig) -> Result<f64> {
    cfg.validate()?;
    let m = cfg.season_length;
    if y.len() <= 2 * m {
        return Err(Error::SeriesTooShort { required: 2 * m + 1, actual: y.len() });
    }
    let (mut sum, mut count) = (0.0, 0usize);
    match cfg.method {
        ForecastMethod::SeasonalNaive => {
            for t in 2 * m..y.len() {
                sum += (y[t] - y[t - m]).abs();
                count += 1;
            }
        }
        ForecastMethod::HoltWinters => {
            HoltWinters::fit(y, cfg, |t, p| {
                if t >= 2 * m {
                    sum += (y[t] - p).abs();
                    count += 1;
                }
            });
        }
    }
    Ok(sum / count as f64)
}

pub fn mean_absolute_error(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>() / a.len().min(b.len()).max(1) as f64
}

/// Forecast-level privacy and security cost at one ε.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostReport {
    pub epsilon: f64,
    pub privacy_cost: f64,
    pub security_cost: f64,
    pub defense_cost: f64,
}

impl CostReport {
    pub fn new(epsilon: f64, privacy_cost: f64, security_cost: f64) -> Self {
        CostReport { epsilon, privacy_cost, security_cost, defense_cost: privacy_cost + security_cost }
    }

    /// Component-wise mean of several reports (e.g. over noise draws).
    pub fn mean(reports: &[CostReport]) -> Option<CostReport> {
        let n = reports.len() as f64;
        let first = reports.first()?;
        let p = reports.iter().map(|r| r.privacy_cost).sum::<f64>() / n;
        let s = reports.iter().map(|r| r.security_cost).sum::<f64>() / n;
        Some(CostReport::new(first.epsilon, p, s))
    }
}

fn check_aligned(a: &MeasurementSeries, b: &MeasurementSeries, what: &str) -> Result<()> {
    if a.timestamps() != b.timestamps() {
        return Err(Error::Misaligned(format!("{what}: timestamps differ")));
    }
    if a.values().iter().zip(b.values()).any(|(x, y)| x.is_some() != y.is_some()) {
        return Err(Error::Misaligned(format!("{what}: missing-value masks differ")));
    }
    Ok(())
}

/// Forecasts all three variants and reports the cost decomposition.
pub fn cost_analysis(
    original: &MeasurementSeries,
    dp_variant: &MeasurementSeries,
    fdi_dp_variant: &MeasurementSeries,
    cfg: &ForecastConfig,
    epsilon: f64,
) -> Result<CostReport> {
    check_aligned(original, dp_variant, "dp variant")?;
    check_aligned(original, fdi_dp_variant, "fdi-dp variant")?;
    let f_orig = forecast_values(&original.present_values(), cfg)?;
    let f_dp = forecast_values(&dp_variant.present_values(), cfg)?;
    let f_fdi = forecast_values(&fdi_dp_variant.present_values(), cfg)?;
    Ok(CostReport::new(epsilon, mean_absolute_error(&f_dp, &f_orig), mean_absolute_error(&f_fdi, &f_dp)))
}

/// Unit-scale Laplace draws, one row per layer and one entry per index. Row
/// `l` depends only on `(seed, l)`, so different scales share draws.
fn unit_draws(len: usize, layers: usize, seed: u64) -> Vec<Vec<f64>> {
    (0..layers)
        .map(|l| {
            let mut rng = labeled_rng(seed, &format!("qos/dp/{l}"));
            (0..len).map(|_| laplace_noise(1.0, &mut rng)).collect()
        })
        .collect()
}

/// `series` with `layers` independent Laplace draws at `scale` added to every
/// present value. The draw at index `i` of layer `l` depends only on
/// `(seed, l)` and `i`, and is proportional to `scale`.
pub fn dp_variant(series: &MeasurementSeries, scale: f64, layers: usize, seed: u64) -> MeasurementSeries {
    let draws = unit_draws(series.len(), layers, seed);
    series.map_present(|i, v| v + scale * draws.iter().map(|d| d[i]).sum::<f64>())
}

/// The DP variant of `series` and its attacked copy. Inside `window` the
/// attacker tilts the outermost layer's draw to the `f_a*` draw at the same
/// quantile ([`AttackProfile::tilt`]), so the receiver sees `f_a*` noise in
/// place of honest noise there. Both share every other draw.
pub fn dp_fdi_variants(
    series: &MeasurementSeries,
    scale: f64,
    layers: usize,
    attack: &AttackProfile,
    window: Range<usize>,
    seed: u64,
) -> Result<(MeasurementSeries, MeasurementSeries)> {
    check_window(&window, series.len())?;
    if layers == 0 {
        return Err(Error::InvalidParameter("an attack hidden in DP noise needs at least one DP layer".into()));
    }
    if (attack.scale() - scale).abs() > 1e-12 * scale {
        return Err(Error::InvalidParameter(format!(
            "attack hides in scale {} but the DP scale is {scale}",
            attack.scale()
        )));
    }
    let draws = unit_draws(series.len(), layers, seed);
    let (outer, inner) = draws.split_last().expect("layers >= 1");
    let below = |i: usize| scale * inner.iter().map(|d| d[i]).sum::<f64>();
    let dp = series.map_present(|i, v| v + below(i) + scale * outer[i]);
    let fdi = series.map_present(|i, v| {
        let x = scale * outer[i];
        v + below(i) + if window.contains(&i) { attack.tilt(x) } else { x }
    });
    Ok((dp, fdi))
}

/// `series` with attack offsets added to present values whose index falls
/// in `window`; an attack on data without DP. The offset at index `i` does
/// not depend on the window, so nested windows share their common injections.
pub fn fdi_variant(
    series: &MeasurementSeries,
    attack: &AttackProfile,
    window: Range<usize>,
    seed: u64,
) -> Result<MeasurementSeries> {
    check_window(&window, series.len())?;
    let mut rng = labeled_rng(seed, "qos/fdi");
    let offsets: Vec<f64> = (0..window.end).map(|_| attack.sample_offset(&mut rng)).collect();
    Ok(series.map_present(|i, v| if window.contains(&i) { v + offsets[i] } else { v }))
}

fn check_window(window: &Range<usize>, len: usize) -> Result<()> {
    if window.start > window.end || window.end > len {
        return Err(Error::WindowOutOfRange(format!(
            "attack window {}..{} outside series of length {len}",
            window.start, window.end
        )));
    }
    Ok(())
}

/// Noise and attacker used by [`utility_report`]. With a DP scale the attack
/// tilts the DP noise and must hide in that same scale.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UtilityScenario {
    /// DP scale applied before the attack; `None` forecasts raw data.
    pub dp_scale: Option<f64>,
    pub dp_layers: usize,
    pub attack: AttackProfile,
    pub seed: u64,
}

/// Forecast deviation caused by an attack confined to a window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UtilityReport {
    pub window: (usize, usize),
    pub baseline_forecast: Vec<f64>,
    pub attacked_forecast: Vec<f64>,
    /// `MAE(attacked, baseline)`.
    pub mean_abs_deviation: f64,
    /// `mean_abs_deviation / mean(|baseline|)`.
    pub relative_deviation: f64,
}

/// Compares forecasts of the DP-only series and the same series attacked
/// inside `window` (indices into the series).
pub fn utility_report(
    original: &MeasurementSeries,
    window: Range<usize>,
    cfg: &ForecastConfig,
    scenario: &UtilityScenario,
) -> Result<UtilityReport> {
    check_window(&window, original.len())?;
    let (baseline, attacked) = match scenario.dp_scale {
        Some(b) => dp_fdi_variants(original, b, scenario.dp_layers, &scenario.attack, window.clone(), scenario.seed)?,
        None => (original.clone(), fdi_variant(original, &scenario.attack, window.clone(), scenario.seed)?),
    };
    let fb = forecast_values(&baseline.present_values(), cfg)?;
    let fa = forecast_values(&attacked.present_values(), cfg)?;
    let mad = mean_absolute_error(&fa, &fb);
    let scale = fb.iter().map(|v| v.abs()).sum::<f64>() / fb.len() as f64;
    Ok(UtilityReport {
        window: (window.start, window.end),
        relative_deviation: if scale > 0.0 { mad / scale } else { 0.0 },
        mean_abs_deviation: mad,
        baseline_forecast: fb,
        attacked_forecast: fa,
    })
}

/// Settings for [`cost_sweep`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostSweep {
    pub epsilons: Vec<f64>,
    pub sensitivity: f64,
    /// KL budget of the attacker, who hides in the DP scale at each ε.
    pub attack_gamma: f64,
    /// Attacked indices `[start, end)`.
    pub attack_window: (usize, usize),
    /// Independent noise draws averaged per ε.
    pub draws: usize,
    pub dp_layers: usize,
    pub seed: u64,
}

/// Mean [`CostReport`] per ε over `draws` seeded noise realizations. Draw `d`
/// uses the same unit noise at every ε.
pub fn cost_sweep(original: &MeasurementSeries, sweep: &CostSweep, cfg: &ForecastConfig) -> Result<Vec<CostReport>> {
    if sweep.draws == 0 {
        return Err(Error::InvalidParameter("draws must be >= 1".into()));
    }
    let window = sweep.attack_window.0..sweep.attack_window.1;
    check_window(&window, original.len())?;
    sweep
        .epsilons
        .iter()
        .map(|&eps| {
            let base = PrivacyParams::new(sweep.sensitivity, eps, 0.0)?;
            let attack = AttackProfile::new(base, sweep.attack_gamma)?;
            let reports = (0..sweep.draws)
                .map(|d| {
                    let seed = derive_seed(sweep.seed, &format!("qos/draw={d}"));
                    let (dp, fdi) =
                        dp_fdi_variants(original, base.scale(), sweep.dp_layers, &attack, window.clone(), seed)?;
                    cost_analysis(original, &dp, &fdi, cfg, eps)
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(CostReport::mean(&reports).expect("draws >= 1"))
        })
        .collect()
}
