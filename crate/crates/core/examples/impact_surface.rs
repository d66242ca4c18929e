//! Optimal impact over an ε × γ × Δf grid, written as CSV.
//!
//! ```bash
//! cargo run --release -p dpgrid --example impact_surface -- surface.csv
//! ```

use dpgrid::grid::{impact_sweep, write_sweep_csv};

fn main() -> dpgrid::Result<()> {
    let out = std::env::args().nth(1).unwrap_or_else(|| "surface.csv".into());
    let eps: Vec<f64> = (1..=10).map(|i| i as f64 / 10.0).collect();
    let gammas = [0.5, 1.0, 1.5, 2.0, 2.5];
    let sens = [0.5, 1.0, 1.5, 2.0];
    let points = impact_sweep(&eps, &gammas, &sens, 33.18)?;
    write_sweep_csv(&points, std::fs::File::create(&out)?, Some("optimal impact, theta = 33.18"))?;
    println!("wrote {} points to {out}", points.len());

    let at = |e: f64, g: f64, s: f64| {
        points.iter().find(|p| p.epsilon == e && p.gamma == g && p.sensitivity == s).map(|p| p.mu_star).unwrap()
    };
    let base = at(0.1, 0.5, 0.5);
    println!("ε=0.1 from (Δf, γ) = (0.5, 0.5): μ_a* = {base:.2}");
    println!("  γ 0.5 -> 1.0:  {:.2}", at(0.1, 1.0, 0.5));
    println!("  Δf 0.5 -> 1.0: {:.2}", at(0.1, 0.5, 1.0));
    Ok(())
}
