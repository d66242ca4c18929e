//! Latency of manipulating a batch in transit: under DP the attacker only
//! adds attack noise to released values, under AES-256-CBC it must decrypt,
//! modify and re-encrypt.
//!
//! Both paths start from the same plaintext bytes (little-endian `f64`s) and
//! inject the same pre-drawn attack noise; the draw itself is timed
//! separately. The first [`WARMUP_REPS`] repetitions are
//! discarded and the median of the rest is reported.

use std::time::Instant;

use aes::cipher::{block_padding::Pkcs7, BlockDecryptMut, BlockEncryptMut, KeyIvInit};
use chrono::{DateTime, Utc};
use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::adversary::AttackProfile;
use crate::dp::PrivacyParams;
use crate::error::{Error, Result};
use crate::seed::labeled_rng;

type Aes256CbcEnc = cbc::Encryptor<aes::Aes256>;
type Aes256CbcDec = cbc::Decryptor<aes::Aes256>;

pub const WARMUP_REPS: usize = 3;
pub const MIN_REPS: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MachineInfo {
    pub cpu_model: String,
    pub arch: String,
    pub os: String,
    pub aes_hardware: bool,
    pub timestamp: DateTime<Utc>,
}

impl MachineInfo {
    pub fn detect() -> Self {
        let cpu_model = std::fs::read_to_string("/proc/cpuinfo")
            .ok()
            .and_then(|s| {
                s.lines()
                    .find(|l| l.starts_with("model name"))
                    .and_then(|l| l.split(':').nth(1))
                    .map(|m| m.trim().to_string())
            })
            .unwrap_or_else(|| "unknown".into());
        MachineInfo {
            cpu_model,
            arch: std::env::consts::ARCH.into(),
            os: std::env::consts::OS.into(),
            aes_hardware: aes_hardware(),
            timestamp: Utc::now(),
        }
    }
}

#[cfg(any(target_arch = "x86", target_arch = "x86_64"))]
fn aes_hardware() -> bool {
    std::arch::is_x86_feature_detected!("aes")
}

#[cfg(not(any(target_arch = "x86", target_arch = "x86_64")))]
fn aes_hardware() -> bool {
    false
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchResult {
    /// Median seconds per batch spent in the data path under DP (inject).
    pub dp_seconds: f64,
    /// Median seconds per batch in the data path under AES (decrypt, inject, encrypt).
    pub aes_seconds: f64,
    /// `aes_seconds / dp_seconds`.
    pub speedup: f64,
    /// Median seconds to draw the batch's attack noise. The draws do not
    /// depend on the data, so they happen off the data path.
    pub sampling_seconds: f64,
    /// Ratio when noise sampling is counted on both paths:
    /// `(aes + sampling) / (dp + sampling)`.
    pub speedup_with_sampling: f64,
    pub batch_size: usize,
    pub repetitions: usize,
    pub machine: MachineInfo,
}

/// Attack used when none is given: the Δf = 2, ε = 0.1, γ = 2 operating point.
pub fn default_attack() -> AttackProfile {
    let base = PrivacyParams::new(2.0, 0.1, 0.0).expect("valid constants");
    AttackProfile::new(base, 2.0).expect("valid constants")
}

pub fn serialize_batch(values: &[f64]) -> Vec<u8> {
    values.iter().flat_map(|v| v.to_le_bytes()).collect()
}

pub fn deserialize_batch(bytes: &[u8]) -> Vec<f64> {
    bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk"))).collect()
}

pub fn aes_encrypt(key: &[u8; 32], iv: &[u8; 16], plaintext: &[u8]) -> Vec<u8> {
    Aes256CbcEnc::new(key.into(), iv.into()).encrypt_padded_vec_mut::<Pkcs7>(plaintext)
}

pub fn aes_decrypt(key: &[u8; 32], iv: &[u8; 16], ciphertext: &[u8]) -> Result<Vec<u8>> {
    Aes256CbcDec::new(key.into(), iv.into())
        .decrypt_padded_vec_mut::<Pkcs7>(ciphertext)
        .map_err(|_| Error::InvalidParameter("AES-CBC padding check failed".into()))
}

/// Restricts the calling thread to the CPU it is running on.
#[cfg(target_os = "linux")]
fn pin_current_thread() {
    // SAFETY: cpu_set_t is plain data; the calls only read/modify it and the
    // calling thread's affinity.
    unsafe {
        let cpu = libc::sched_getcpu();
        if cpu < 0 {
            return;
        }
        let mut set: libc::cpu_set_t = std::mem::zeroed();
        libc::CPU_SET(cpu as usize, &mut set);
        libc::sched_setaffinity(0, std::mem::size_of::<libc::cpu_set_t>(), &set);
    }
}

#[cfg(not(target_os = "linux"))]
fn pin_current_thread() {}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    }
}

pub fn run_bench(batch: &[f64], reps: usize, seed: u64) -> Result<BenchResult> {
    run_bench_with(batch, reps, seed, &default_attack())
}

/// Times both manipulation paths on `batch`.
pub fn run_bench_with(batch: &[f64], reps: usize, seed: u64, attack: &AttackProfile) -> Result<BenchResult> {
    if batch.is_empty() {
        return Err(Error::InvalidParameter("batch must be non-empty".into()));
    }
    if reps < MIN_REPS {
        return Err(Error::InvalidParameter(format!("reps must be >= {MIN_REPS}, got {reps}")));
    }
    pin_current_thread();
    let mut key_rng = labeled_rng(seed, "bench/key");
    let mut key = [0u8; 32];
    key_rng.fill_bytes(&mut key);
    let plaintext = serialize_batch(batch);

    let mut dp_times = Vec::with_capacity(reps);
    let mut aes_times = Vec::with_capacity(reps);
    let mut sampling_times = Vec::with_capacity(reps);
    for rep in 0..reps {
        let mut iv_in = [0u8; 16];
        let mut iv_out = [0u8; 16];
        key_rng.fill_bytes(&mut iv_in);
        key_rng.fill_bytes(&mut iv_out);

        let mut rng = labeled_rng(seed, &format!("bench/noise/{rep}"));
        let t0 = Instant::now();
        let noise: Vec<f64> = (0..batch.len()).map(|_| attack.sample_offset(&mut rng)).collect();
        let sampling_elapsed = t0.elapsed().as_secs_f64();

        // DP: released values arrive in the clear.
        let mut released = deserialize_batch(&plaintext);
        let t0 = Instant::now();
        for (v, n) in released.iter_mut().zip(&noise) {
            *v += n;
        }
        std::hint::black_box(&mut released);
        let dp_elapsed = t0.elapsed().as_secs_f64();

        // AES: the same bytes arrive encrypted.
        let ciphertext = aes_encrypt(&key, &iv_in, &plaintext);
        let t0 = Instant::now();
        let opened = aes_decrypt(&key, &iv_in, &ciphertext)?;
        let mut values = deserialize_batch(&opened);
        for (v, n) in values.iter_mut().zip(&noise) {
            *v += n;
        }
        let resealed = aes_encrypt(&key, &iv_out, &serialize_batch(&values));
        std::hint::black_box(&resealed);
        let aes_elapsed = t0.elapsed().as_secs_f64();
        debug_assert_eq!(values, released);

        if rep >= WARMUP_REPS {
            dp_times.push(dp_elapsed);
            aes_times.push(aes_elapsed);
            sampling_times.push(sampling_elapsed);
        }
    }
    // Timer resolution floor keeps the ratio finite.
    let dp_seconds = median(dp_times).max(1e-9);
    let aes_seconds = median(aes_times).max(1e-9);
    let sampling_seconds = median(sampling_times);
    Ok(BenchResult {
        dp_seconds,
        aes_seconds,
        speedup: aes_seconds / dp_seconds,
        sampling_seconds,
        speedup_with_sampling: (aes_seconds + sampling_seconds) / (dp_seconds + sampling_seconds),
        batch_size: batch.len(),
        repetitions: reps,
        machine: MachineInfo::detect(),
    })
}
