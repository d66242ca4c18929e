//! Defender side: pick ε so that an attacker with KL budget γ can bias the
//! release by at most a chosen amount.
//!
//! ```bash
//! cargo run --release -p dpgrid --example calibrate_design -- 2.0 2.0 76.82
//! ```

use dpgrid::adversary::AttackProfile;
use dpgrid::calibrate::{boundary_report, calibrate_epsilon, DesignSpec};
use dpgrid::dp::PrivacyParams;

fn main() -> dpgrid::Result<()> {
    let args: Vec<f64> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let (sens, gamma, d) = match args[..] {
        [s, g, d] => (s, g, d),
        _ => (2.0, 2.0, 76.82),
    };
    let r = calibrate_epsilon(&DesignSpec::new(sens, gamma, 33.18, d))?;
    println!("Δf={sens} γ={gamma} max deviation {d}");
    println!("  k1 = {:.4}, b = {:.4}, ε = {:.5}", r.k1, r.scale, r.epsilon);

    let check = AttackProfile::new(PrivacyParams::new(sens, r.epsilon, 33.18)?, gamma)?;
    println!("  attacker at that ε reaches deviation {:.6}", check.deviation());

    println!("tighter caps need smaller noise:");
    for cap in [5.0, 10.0, 20.0, 40.0, 80.0] {
        let r = calibrate_epsilon(&DesignSpec::new(sens, gamma, 33.18, cap))?;
        println!("  cap {cap:>5} -> ε {:.4}", r.epsilon);
    }

    println!("limits: d=0 -> {:?}, γ=∞ -> {:?}", boundary_report(0.0, gamma)?, boundary_report(d, f64::INFINITY)?);
    Ok(())
}
