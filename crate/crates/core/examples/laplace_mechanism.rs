//! Noisy sum and mean queries, and an empirical check of ε-DP on two
//! adjacent datasets.
//!
//! ```bash
//! cargo run --release -p dpgrid --example laplace_mechanism
//! ```

use dpgrid::dp::{dp_query_seeded, indistinguishability_check, Dataset, PrivacyParams, QueryKind};

fn main() -> dpgrid::Result<()> {
    let readings = Dataset::new(vec![31.2, 35.9, 28.4, 40.1, 33.0, 30.7]);
    for eps in [0.1, 0.5, 1.0] {
        let p = PrivacyParams::new(1.0, eps, 0.0)?;
        let sum = dp_query_seeded(&readings, QueryKind::Sum, &p, 1)?;
        let mean = dp_query_seeded(&readings, QueryKind::Mean, &p, 1)?;
        println!(
            "ε={eps:<4} b={:<5} sum {:.2} -> {:.2}   mean {:.2} -> {:.2}",
            p.scale(),
            sum.true_value,
            sum.released,
            mean.true_value,
            mean.released
        );
    }

    let neighbour = readings.with_replaced(3, 39.1);
    let p = PrivacyParams::new(1.0, 0.5, 0.0)?;
    let report = indistinguishability_check(&readings, &neighbour, &p, 1_000_000, 100, 7)?;
    println!(
        "adjacent datasets at ε=0.5: max |ln ratio| {:.3} over {} bins -> {}",
        report.max_log_ratio,
        report.bins_used,
        if report.pass { "consistent with ε" } else { "violates ε" }
    );
    Ok(())
}
