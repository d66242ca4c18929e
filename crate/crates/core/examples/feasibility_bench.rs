//! DP injection vs AES-256-CBC decrypt-inject-encrypt latency.
//!
//! ```bash
//! cargo run --release -p dpgrid --example feasibility_bench -- 100000 30
//! ```

use dpgrid::bench::run_bench;

fn main() -> dpgrid::Result<()> {
    let mut args = std::env::args().skip(1);
    let batch: usize = args.next().and_then(|a| a.parse().ok()).unwrap_or(100_000);
    let reps: usize = args.next().and_then(|a| a.parse().ok()).unwrap_or(30);
    let values: Vec<f64> = (0..batch).map(|i| 33.18 + (i % 24) as f64).collect();
    let r = run_bench(&values, reps, 7)?;
    println!("machine      {} ({}, AES-NI: {})", r.machine.cpu_model, r.machine.arch, r.machine.aes_hardware);
    println!("batch        {} values, {} reps", r.batch_size, r.repetitions);
    println!("DP inject    {:.6} s", r.dp_seconds);
    println!("AES path     {:.6} s", r.aes_seconds);
    println!("speedup      {:.2}x", r.speedup);
    println!("noise draw   {:.6} s (ratio incl. draw on both paths: {:.2}x)", r.sampling_seconds, r.speedup_with_sampling);
    Ok(())
}
