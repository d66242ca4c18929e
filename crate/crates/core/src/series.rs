//! Timestamped PMU measurement series, CSV ingest/export and a synthetic
//! consumption generator.
//!
//! CSV layout: header `timestamp,value` or `timestamp,value,quality`,
//! RFC 3339 timestamps (a naive `YYYY-MM-DD HH:MM:SS[.f]` is read as UTC),
//! decimal values. A blank or unparseable value masks the row; a quality of
//! `0` also masks it. Lines starting with `#` are comments.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use chrono::{DateTime, Datelike, Duration, NaiveDateTime, SecondsFormat, TimeZone, Timelike, Utc};
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed::rng_from_seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Channel {
    #[default]
    PowerKwh,
    Voltage,
}

/// Timestamped readings with a missing-value mask (`None` = missing).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasurementSeries {
    pub channel: Channel,
    timestamps: Vec<DateTime<Utc>>,
    values: Vec<Option<f64>>,
}

impl MeasurementSeries {
    /// Fails unless timestamps are strictly increasing and present values finite.
    pub fn new(channel: Channel, timestamps: Vec<DateTime<Utc>>, values: Vec<Option<f64>>) -> Result<Self> {
        if timestamps.len() != values.len() {
            return Err(Error::Misaligned(format!(
                "{} timestamps vs {} values",
                timestamps.len(),
                values.len()
            )));
        }
        if let Some(i) = timestamps.windows(2).position(|w| w[1] <= w[0]) {
            return Err(Error::InvalidParameter(format!(
                "timestamps not strictly increasing at index {}",
                i + 1
            )));
        }
        if values.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("present values must be finite".into()));
        }
        Ok(MeasurementSeries { channel, timestamps, values })
    }

    /// Fully present series sampled at a fixed step.
    pub fn regular(channel: Channel, start: DateTime<Utc>, step: Duration, values: Vec<f64>) -> Self {
        let timestamps = (0..values.len()).map(|i| start + step * i as i32).collect();
        MeasurementSeries { channel, timestamps, values: values.into_iter().map(Some).collect() }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn timestamps(&self) -> &[DateTime<Utc>] {
        &self.timestamps
    }

    pub fn values(&self) -> &[Option<f64>] {
        &self.values
    }

    pub fn missing_count(&self) -> usize {
        self.values.iter().filter(|v| v.is_none()).count()
    }

    /// Present values in time order.
    pub fn present_values(&self) -> Vec<f64> {
        self.values.iter().flatten().copied().collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = (DateTime<Utc>, Option<f64>)> + '_ {
        self.timestamps.iter().copied().zip(self.values.iter().copied())
    }

    /// Same timestamps with every present value replaced by `f(index, value)`.
    pub fn map_present(&self, mut f: impl FnMut(usize, f64) -> f64) -> MeasurementSeries {
        let values = self.values.iter().enumerate().map(|(i, v)| v.map(|x| f(i, x))).collect();
        MeasurementSeries { channel: self.channel, timestamps: self.timestamps.clone(), values }
    }

    /// Hourly means over present values. Every hour between the first and
    /// last reading gets an entry; hours with no present value are masked.
    pub fn resample_hourly(&self) -> MeasurementSeries {
        let (Some(first), Some(last)) = (self.timestamps.first(), self.timestamps.last()) else {
            return MeasurementSeries { channel: self.channel, timestamps: vec![], values: vec![] };
        };
        let start = floor_hour(*first);
        let n_hours = ((floor_hour(*last) - start).num_hours() + 1) as usize;
        let mut sums = vec![0.0; n_hours];
        let mut counts = vec![0usize; n_hours];
        for (t, v) in self.iter() {
            if let Some(v) = v {
                let h = (floor_hour(t) - start).num_hours() as usize;
                sums[h] += v;
                counts[h] += 1;
            }
        }
        let timestamps = (0..n_hours).map(|h| start + Duration::hours(h as i64)).collect();
        let values = sums
            .iter()
            .zip(&counts)
            .map(|(&s, &c)| (c > 0).then(|| s / c as f64))
            .collect();
        MeasurementSeries { channel: self.channel, timestamps, values }
    }

    /// Sub-series with timestamps in `[start, end)`.
    pub fn slice_time(&self, start: DateTime<Utc>, end: DateTime<Utc>) -> MeasurementSeries {
        let lo = self.timestamps.partition_point(|t| *t < start);
        let hi = self.timestamps.partition_point(|t| *t < end);
        MeasurementSeries {
            channel: self.channel,
            timestamps: self.timestamps[lo..hi].to_vec(),
            values: self.values[lo..hi].to_vec(),
        }
    }

    /// Writes `timestamp,value` CSV; values use the shortest round-trip form.
    pub fn write_csv<W: Write>(&self, mut w: W, comment: Option<&str>) -> Result<()> {
        if let Some(c) = comment {
            for line in c.lines() {
                writeln!(w, "# {line}")?;
            }
        }
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["timestamp", "value"])?;
        for (t, v) in self.iter() {
            let ts = t.to_rfc3339_opts(SecondsFormat::AutoSi, true);
            let val = v.map(|x| format!("{x:?}")).unwrap_or_default();
            out.write_record([ts.as_str(), val.as_str()])?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn save_csv(&self, path: impl AsRef<Path>, comment: Option<&str>) -> Result<()> {
        let f = File::create(path)?;
        self.write_csv(std::io::BufWriter::new(f), comment)
    }
}

pub fn floor_hour(t: DateTime<Utc>) -> DateTime<Utc> {
    Utc.with_ymd_and_hms(t.year(), t.month(), t.day(), t.hour(), 0, 0)
        .single()
        .expect("UTC has no ambiguous hours")
}

/// Declared CSV layout for [`ingest_csv`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct CsvSchema {
    pub channel: Channel,
    /// Expect a third `quality` column.
    pub quality: bool,
    /// Return hourly means instead of raw rows.
    pub resample_hourly: bool,
}

fn parse_timestamp(s: &str) -> Option<DateTime<Utc>> {
    let s = s.trim();
    if let Ok(t) = DateTime::parse_from_rfc3339(s) {
        return Some(t.with_timezone(&Utc));
    }
    for fmt in ["%Y-%m-%d %H:%M:%S%.f", "%Y-%m-%dT%H:%M:%S%.f"] {
        if let Ok(t) = NaiveDateTime::parse_from_str(s, fmt) {
            return Some(t.and_utc());
        }
    }
    None
}

/// Reads a PMU CSV file.
pub fn ingest_csv(path: impl AsRef<Path>, schema: CsvSchema) -> Result<MeasurementSeries> {
    let path = path.as_ref();
    let mut text = String::new();
    File::open(path)?.read_to_string(&mut text)?;
    parse_csv(&text, schema).map_err(|e| match e {
        Error::EmptyFile(_) => Error::EmptyFile(path.display().to_string()),
        other => other,
    })
}

/// Parses CSV text; see [`ingest_csv`].
pub fn parse_csv(text: &str, schema: CsvSchema) -> Result<MeasurementSeries> {
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let header = rdr.headers()?.clone();
    if header.is_empty() || (header.len() == 1 && header[0].is_empty()) {
        return Err(Error::EmptyFile("<input>".into()));
    }
    let expected: &[&str] = if schema.quality { &["timestamp", "value", "quality"] } else { &["timestamp", "value"] };
    if header.iter().collect::<Vec<_>>() != expected {
        return Err(Error::MalformedHeader { found: header.iter().collect::<Vec<_>>().join(",") });
    }
    let mut timestamps = Vec::new();
    let mut values = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        let ts = rec.get(0).and_then(parse_timestamp).ok_or_else(|| Error::Parse {
            line,
            msg: format!("bad timestamp {:?}", rec.get(0).unwrap_or("")),
        })?;
        let mut value = rec.get(1).and_then(|v| v.parse::<f64>().ok()).filter(|v| v.is_finite());
        if schema.quality && rec.get(2).map(|q| q == "0").unwrap_or(false) {
            value = None;
        }
        if let Some(prev) = timestamps.last() {
            if ts <= *prev {
                return Err(Error::Parse { line, msg: format!("timestamp {ts} not after {prev}") });
            }
        }
        timestamps.push(ts);
        values.push(value);
    }
    if timestamps.is_empty() {
        return Err(Error::EmptyFile("<input>".into()));
    }
    let series = MeasurementSeries { channel: schema.channel, timestamps, values };
    Ok(if schema.resample_hourly { series.resample_hourly() } else { series })
}

/// Parameters for [`synth_pmu`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub days: u32,
    pub start: DateTime<Utc>,
    pub samples_per_hour: u32,
    /// Mean consumption for each hour of the day.
    pub daily_profile: [f64; 24],
    /// Multiplier per weekday, Monday first.
    pub weekly_factors: [f64; 7],
    /// Standard deviation of per-sample Gaussian jitter.
    pub noise_level: f64,
    pub missing_fraction: f64,
    pub seed: u64,
}

/// Daily load shape averaging about 33 kWh with morning and evening peaks.
pub const DEFAULT_DAILY_PROFILE: [f64; 24] = [
    22.0, 20.5, 19.8, 19.5, 20.0, 22.5, 27.0, 33.0, 37.5, 39.0, 39.5, 40.0, //
    40.5, 40.0, 39.0, 38.0, 38.5, 41.0, 44.0, 45.0, 42.0, 36.0, 30.0, 25.5,
];

pub const DEFAULT_WEEKLY_FACTORS: [f64; 7] = [1.05, 1.06, 1.06, 1.05, 1.02, 0.90, 0.86];

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            days: 7,
            start: Utc.with_ymd_and_hms(2014, 1, 6, 0, 0, 0).unwrap(),
            samples_per_hour: 1,
            daily_profile: DEFAULT_DAILY_PROFILE,
            weekly_factors: DEFAULT_WEEKLY_FACTORS,
            noise_level: 1.0,
            missing_fraction: 0.0,
            seed: 0,
        }
    }
}

impl SynthConfig {
    /// Noise-free expected value at `t`.
    pub fn profile_at(&self, t: DateTime<Utc>) -> f64 {
        let dow = t.weekday().num_days_from_monday() as usize;
        self.daily_profile[t.hour() as usize] * self.weekly_factors[dow]
    }
}

/// Generates a consumption series with daily and weekly seasonality,
/// Gaussian jitter and random missingness.
pub fn synth_pmu(cfg: &SynthConfig) -> Result<MeasurementSeries> {
    if cfg.days < 1 {
        return Err(Error::InvalidParameter("days must be >= 1".into()));
    }
    if !(0.0..1.0).contains(&cfg.missing_fraction) {
        return Err(Error::InvalidParameter(format!(
            "missing_fraction must be in [0, 1), got {}",
            cfg.missing_fraction
        )));
    }
    if cfg.samples_per_hour < 1 || 3600 % cfg.samples_per_hour != 0 {
        return Err(Error::InvalidParameter("samples_per_hour must divide 3600".into()));
    }
    if !(cfg.noise_level >= 0.0) || !cfg.noise_level.is_finite() {
        return Err(Error::InvalidParameter("noise_level must be finite and >= 0".into()));
    }
    let jitter = Normal::new(0.0, cfg.noise_level).map_err(|e| Error::InvalidParameter(e.to_string()))?;
    let mut rng = rng_from_seed(cfg.seed);
    let step = Duration::seconds(3600 / cfg.samples_per_hour as i64);
    let n = cfg.days as usize * 24 * cfg.samples_per_hour as usize;
    let mut timestamps = Vec::with_capacity(n);
    let mut values = Vec::with_capacity(n);
    for i in 0..n {
        let t = cfg.start + step * i as i32;
        let v = cfg.profile_at(t) + jitter.sample(&mut rng);
        let missing = cfg.missing_fraction > 0.0 && rng.random::<f64>() < cfg.missing_fraction;
        timestamps.push(t);
        values.push((!missing).then_some(v));
    }
    Ok(MeasurementSeries { channel: Channel::PowerKwh, timestamps, values })
}
