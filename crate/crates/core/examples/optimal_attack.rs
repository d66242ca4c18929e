//! The stealthiest biased attacker for a given KL budget: tilt parameter,
//! impact, and a Monte-Carlo check of its sampler.
//!
//! ```bash
//! cargo run --release -p dpgrid --example optimal_attack
//! ```

use dpgrid::adversary::{attack_pdf, sample_attack_noise, AttackProfile};
use dpgrid::dp::PrivacyParams;
use dpgrid::seed::rng_from_seed;

fn main() -> dpgrid::Result<()> {
    // hourly mean 33.18 kWh released with Δf = 2, ε = 0.1
    let base = PrivacyParams::new(2.0, 0.1, 33.18)?;
    println!("b = {}", base.scale());
    println!("{:>6} {:>10} {:>10} {:>10}", "γ", "k1", "μ_a*", "μ_a* - θ");
    for gamma in [0.01, 0.1, 0.5, 1.0, 2.0, 5.0] {
        let a = AttackProfile::new(base, gamma)?;
        println!("{gamma:>6} {:>10.3} {:>10.3} {:>10.3}", a.k1(), a.mu_star(), a.deviation());
    }

    let a = AttackProfile::new(base, 2.0)?;
    let mut rng = rng_from_seed(42);
    let n = 200_000;
    let mean = (0..n).map(|_| sample_attack_noise(&a, &mut rng)).sum::<f64>() / n as f64;
    println!("γ=2: sample mean {mean:.2}, closed form {:.2}", a.mu_star());
    println!("density at θ: {:.5}, at μ_a*: {:.5}", attack_pdf(a.theta(), &a), attack_pdf(a.mu_star(), &a));

    // tilting honest draws gives attack draws, each moved as little as possible
    for x in [-20.0, 0.0, 20.0, 60.0] {
        println!("honest offset {x:>6.1} -> attacked {:>7.2}", a.tilt(x));
    }
    Ok(())
}
