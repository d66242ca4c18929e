//! `dpgrid` command line.
//!
//! Every subcommand is reproducible from its flags and `--seed`; JSON
//! outputs carry a `config_hash` of the parsed flags and CSV outputs carry it
//! as a leading `# config-hash:` comment. Usage and domain errors exit with
//! code 2, runtime failures with 1; both print a JSON error object to stderr.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::adversary::AttackProfile;
use crate::bench;
use crate::calibrate::{boundary_report, calibrate_epsilon, DesignSpec};
use crate::dp::PrivacyParams;
use crate::error::Error;
use crate::grid::{self, Detector, GridQuery, GridTopology, QuerySpec, TopologyConfig};
use crate::qos::{self, CostSweep, ForecastConfig, ForecastMethod};
use crate::seed::derive_seed;
use crate::series::{ingest_csv, synth_pmu, CsvSchema, MeasurementSeries, SynthConfig};

#[derive(Debug, Parser, Serialize)]
#[command(name = "dpgrid", version, about = "DP calibration against optimal FDI attacks on synchrophasor data")]
pub struct Cli {
    /// Directory for CSV/JSON artifacts.
    #[arg(long, global = true, env = "DPGRID_OUT_DIR", default_value = ".")]
    pub out_dir: PathBuf,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
pub enum Command {
    /// Privacy loss ε that caps the optimal attack deviation.
    Calibrate {
        #[arg(long)]
        sensitivity: f64,
        #[arg(long)]
        gamma: f64,
        #[arg(long)]
        max_deviation: f64,
        #[arg(long, default_value_t = 0.0)]
        theta: f64,
    },
    /// Optimal attack impact for given DP parameters.
    Impact {
        #[arg(long)]
        epsilon: f64,
        #[arg(long)]
        gamma: f64,
        #[arg(long)]
        sensitivity: f64,
        #[arg(long, default_value_t = 0.0)]
        theta: f64,
    },
    /// Impact surface over ε × γ × Δf, written as CSV.
    Sweep {
        #[arg(long, value_delimiter = ',', default_value = "0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9,1.0")]
        epsilons: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_value = "0.5,1.0,1.5,2.0,2.5")]
        gammas: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_value = "0.5,1.0,1.5,2.0")]
        sensitivities: Vec<f64>,
        #[arg(long, default_value_t = 33.18)]
        theta: f64,
        #[arg(long, default_value = "sweep.csv")]
        output: String,
    },
    /// Run the layered network simulation.
    Simulate {
        /// Topology JSON (nodes, edges, dp_policy, attacker).
        #[arg(long)]
        topology: PathBuf,
        /// `PMU_ID=path.csv`; repeat per PMU.
        #[arg(long = "data", value_parser = parse_data_arg)]
        data: Vec<(String, PathBuf)>,
        /// Generate this many days of synthetic data for PMUs without `--data`.
        #[arg(long)]
        synth_days: Option<u32>,
        #[arg(long, value_enum, default_value_t = QueryArg::HourlyMean)]
        query: QueryArg,
        #[arg(long, default_value_t = 50.0)]
        tau: f64,
        #[arg(long, default_value_t = 24)]
        window: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Forecast-based privacy/security cost over an ε grid.
    Qos {
        /// Input CSV (resampled hourly); synthetic data when absent.
        #[arg(long)]
        data: Option<PathBuf>,
        #[arg(long, default_value_t = 4 * 365)]
        synth_days: u32,
        #[arg(long, value_delimiter = ',', default_value = "0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9")]
        epsilons: Vec<f64>,
        #[arg(long, default_value_t = 1.0)]
        sensitivity: f64,
        #[arg(long, default_value_t = 0.05)]
        gamma: f64,
        /// First attacked hour (index); defaults to the last `attack_hours` hours.
        #[arg(long)]
        attack_start: Option<usize>,
        #[arg(long, default_value_t = 30 * 24)]
        attack_hours: usize,
        #[arg(long, default_value_t = 32)]
        draws: usize,
        #[arg(long, default_value_t = 1)]
        dp_layers: usize,
        #[arg(long, default_value_t = 24 * 7)]
        horizon: usize,
        #[arg(long, default_value_t = 24)]
        season: usize,
        #[arg(long, value_enum, default_value_t = MethodArg::HoltWinters)]
        method: MethodArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// DP vs AES-256 manipulation latency.
    Bench {
        #[arg(long, default_value_t = 100_000)]
        batch_size: usize,
        #[arg(long, default_value_t = 30)]
        reps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Synthetic PMU consumption CSV.
    Synth {
        #[arg(long, default_value_t = 7)]
        days: u32,
        #[arg(long, default_value_t = 1)]
        samples_per_hour: u32,
        #[arg(long, default_value_t = 1.0)]
        noise: f64,
        #[arg(long, default_value_t = 0.0)]
        missing: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "synth.csv")]
        output: String,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
pub enum QueryArg {
    HourlyMean,
    Sum,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
pub enum MethodArg {
    HoltWinters,
    SeasonalNaive,
}

fn parse_data_arg(s: &str) -> Result<(String, PathBuf), String> {
    let (id, path) = s.split_once('=').ok_or_else(|| format!("expected PMU_ID=PATH, got {s:?}"))?;
    Ok((id.to_string(), PathBuf::from(path)))
}

/// First 16 hex digits of SHA-256 over the JSON form of the parsed command.
pub fn config_hash(cmd: &Command) -> String {
    let bytes = serde_json::to_vec(cmd).expect("command serializes");
    let digest = Sha256::digest(&bytes);
    digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
}

/// Failure with its exit code.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub error: Error,
}

impl From<Error> for CliError {
    fn from(error: Error) -> Self {
        let code = match error {
            Error::InvalidParameter(_)
            | Error::DegenerateStealthBudget(_)
            | Error::BoundaryCase(_)
            | Error::ZeroSensitivity
            | Error::AttackUndefined { .. } => 2,
            _ => 1,
        };
        CliError { code, error }
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        Error::from(e).into()
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError { code: 2, error: Error::InvalidParameter(msg.into()) }
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>, CliError> {
    std::fs::create_dir_all(dir).map_err(Error::from)?;
    Ok(BufWriter::new(File::create(dir.join(name)).map_err(Error::from)?))
}

fn positive(name: &str, v: f64) -> Result<(), CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(usage(format!("--{name} must be a positive finite number, got {v}")))
    }
}

/// Executes a parsed command and returns its JSON report.
pub fn execute(cli: &Cli) -> Result<Value, CliError> {
    let hash = config_hash(&cli.command);
    let comment = format!("config-hash: {hash}");
    let out = &cli.out_dir;
    let report = match &cli.command {
        Command::Calibrate { sensitivity, gamma, max_deviation, theta } => {
            if *max_deviation == 0.0 || gamma.is_infinite() {
                let case = boundary_report(*max_deviation, *gamma)?;
                json!({
                    "boundary": case,
                    "limiting_scale": case.limiting_scale().to_string(),
                    "limiting_epsilon": case.limiting_epsilon().to_string(),
                })
            } else {
                let spec = DesignSpec::new(*sensitivity, *gamma, *theta, *max_deviation);
                json!({ "spec": spec, "result": calibrate_epsilon(&spec)? })
            }
        }
        Command::Impact { epsilon, gamma, sensitivity, theta } => {
            let base = PrivacyParams::new(*sensitivity, *epsilon, *theta)?;
            if base.scale() == 0.0 {
                return Err(usage("--sensitivity must be > 0"));
            }
            let a = AttackProfile::new(base, *gamma)?;
            json!({
                "epsilon": epsilon, "gamma": gamma, "sensitivity": sensitivity, "theta": theta,
                "scale": base.scale(), "k1": a.k1(), "mu_star": a.mu_star(), "deviation": a.deviation(),
            })
        }
        Command::Sweep { epsilons, gammas, sensitivities, theta, output } => {
            let points = grid::impact_sweep(epsilons, gammas, sensitivities, *theta)?;
            grid::write_sweep_csv(&points, create(out, output)?, Some(&comment))?;
            json!({ "points": points.len(), "output": out.join(output) })
        }
        Command::Simulate { topology, data, synth_days, query, tau, window, seed } => {
            let topo = GridTopology::new(TopologyConfig::load(topology)?)?;
            let det = Detector::new(*tau, *window)?;
            let mut series: BTreeMap<String, MeasurementSeries> = BTreeMap::new();
            for (id, path) in data {
                series.insert(id.clone(), ingest_csv(path, CsvSchema::default())?);
            }
            if let Some(days) = synth_days {
                for id in topo.pmu_ids() {
                    if !series.contains_key(id) {
                        let cfg = SynthConfig {
                            days: *days,
                            seed: derive_seed(*seed, &format!("synth/{id}")),
                            ..Default::default()
                        };
                        series.insert(id.to_string(), synth_pmu(&cfg)?);
                    }
                }
            }
            let kind = match query {
                QueryArg::HourlyMean => GridQuery::HourlyMean,
                QueryArg::Sum => GridQuery::Sum,
            };
            let trace = grid::run_query(&topo, &series, &QuerySpec::new(kind), &det, *seed)?;
            trace.write_csv(create(out, "trace.csv")?, Some(&comment))?;
            let summary = serde_json::to_value(trace.summary())?;
            serde_json::to_writer_pretty(create(out, "summary.json")?, &json!({ "config_hash": hash, "summary": summary }))?;
            summary
        }
        Command::Qos {
            data, synth_days, epsilons, sensitivity, gamma, attack_start, attack_hours, draws, dp_layers,
            horizon, season, method, seed,
        } => {
            positive("sensitivity", *sensitivity)?;
            positive("gamma", *gamma)?;
            let original = match data {
                Some(p) => ingest_csv(p, CsvSchema { resample_hourly: true, ..Default::default() })?,
                None => synth_pmu(&SynthConfig {
                    days: *synth_days,
                    seed: derive_seed(*seed, "synth"),
                    ..Default::default()
                })?,
            };
            let start = attack_start.unwrap_or(original.len().saturating_sub(*attack_hours));
            let cfg = ForecastConfig {
                horizon: *horizon,
                season_length: *season,
                method: match method {
                    MethodArg::HoltWinters => ForecastMethod::HoltWinters,
                    MethodArg::SeasonalNaive => ForecastMethod::SeasonalNaive,
                },
                ..Default::default()
            };
            let sweep = CostSweep {
                epsilons: epsilons.clone(),
                sensitivity: *sensitivity,
                attack_gamma: *gamma,
                attack_window: (start, start.saturating_add(*attack_hours).min(original.len())),
                draws: *draws,
                dp_layers: *dp_layers,
                seed: *seed,
            };
            let reports = qos::cost_sweep(&original, &sweep, &cfg)?;
            qos::forecast(&original, &cfg)?.write_csv(create(out, "forecast_original.csv")?, Some(&comment))?;
            for &eps in epsilons {
                let base = PrivacyParams::new(*sensitivity, eps, 0.0)?;
                let attack = AttackProfile::new(base, *gamma)?;
                let draw_seed = derive_seed(*seed, "qos/draw=0");
                let window = sweep.attack_window.0..sweep.attack_window.1;
                let (dp, fdi) = qos::dp_fdi_variants(&original, base.scale(), *dp_layers, &attack, window, draw_seed)?;
                qos::forecast(&dp, &cfg)?.write_csv(create(out, &format!("forecast_dp_eps{eps}.csv"))?, Some(&comment))?;
                qos::forecast(&fdi, &cfg)?
                    .write_csv(create(out, &format!("forecast_fdi_dp_eps{eps}.csv"))?, Some(&comment))?;
            }
            let v = json!({ "config_hash": hash, "sweep": sweep, "forecast": cfg, "costs": reports });
            serde_json::to_writer_pretty(create(out, "costs.json")?, &v)?;
            v
        }
        Command::Bench { batch_size, reps, seed } => {
            let batch: Vec<f64> = synth_pmu(&SynthConfig {
                days: (*batch_size as u32).div_ceil(24).max(1),
                seed: derive_seed(*seed, "bench/batch"),
                ..Default::default()
            })?
            .present_values()
            .into_iter()
            .take(*batch_size)
            .collect();
            serde_json::to_value(bench::run_bench(&batch, *reps, *seed)?)?
        }
        Command::Synth { days, samples_per_hour, noise, missing, seed, output } => {
            let cfg = SynthConfig {
                days: *days,
                samples_per_hour: *samples_per_hour,
                noise_level: *noise,
                missing_fraction: *missing,
                seed: *seed,
                ..Default::default()
            };
            let s = synth_pmu(&cfg)?;
            s.write_csv(create(out, output)?, Some(&comment))?;
            json!({ "rows": s.len(), "missing": s.missing_count(), "output": out.join(output) })
        }
    };
    Ok(match report {
        Value::Object(mut m) => {
            m.entry("config_hash").or_insert(Value::String(hash));
            Value::Object(m)
        }
        other => json!({ "config_hash": hash, "report": other }),
    })
}

/// Parses `args` (including the program name), runs, and returns the exit code.
pub fn run_with<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            if code == 0 {
                let _ = write!(stdout, "{text}");
            } else {
                let _ = writeln!(stderr, "{}", json!({ "error": "usage", "message": text.trim() }));
            }
            return code;
        }
    };
    match execute(&cli) {
        Ok(v) => {
            let _ = writeln!(stdout, "{}", serde_json::to_string_pretty(&v).expect("json value"));
            0
        }
        Err(CliError { code, error }) => {
            let kind = if code == 2 { "usage" } else { "runtime" };
            let _ = writeln!(stderr, "{}", json!({ "error": kind, "message": error.to_string() }));
            code
        }
    }
}

pub fn main() -> i32 {
    run_with(std::env::args_os(), &mut std::io::stdout(), &mut std::io::stderr())
}
