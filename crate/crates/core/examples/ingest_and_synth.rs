//! Generate a PMU-like CSV, read it back, and resample to hourly means.
//!
//! ```bash
//! cargo run --release -p dpgrid --example ingest_and_synth -- pmu.csv
//! ```

use dpgrid::series::{ingest_csv, synth_pmu, CsvSchema, SynthConfig};

fn main() -> dpgrid::Result<()> {
    let path = std::env::args().nth(1).unwrap_or_else(|| "pmu.csv".into());
    let cfg = SynthConfig { days: 14, samples_per_hour: 60, missing_fraction: 0.25, seed: 9, ..Default::default() };
    synth_pmu(&cfg)?.save_csv(&path, Some("synthetic PMU readings (kWh)"))?;

    let raw = ingest_csv(&path, CsvSchema::default())?;
    println!("{path}: {} rows, {} missing", raw.len(), raw.missing_count());
    let hourly = ingest_csv(&path, CsvSchema { resample_hourly: true, ..Default::default() })?;
    println!("hourly: {} rows", hourly.len());
    for (t, v) in hourly.iter().take(6) {
        println!("  {t}  {:>7.3}  (profile {:.3})", v.unwrap_or(f64::NAN), cfg.profile_at(t));
    }
    Ok(())
}
