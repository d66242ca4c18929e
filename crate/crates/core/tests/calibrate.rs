use dpgrid::adversary::{solve_k1, AttackProfile};
use dpgrid::calibrate::{calibrate_epsilon, solve_design_k1, DesignSpec};
use dpgrid::dp::PrivacyParams;
use proptest::prelude::*;

/// ε → b = Δf/ε → k1 from γ → μ_a* - θ.
fn forward_deviation(sensitivity: f64, epsilon: f64, gamma: f64, theta: f64) -> f64 {
    let base = PrivacyParams::new(sensitivity, epsilon, theta).unwrap();
    AttackProfile::new(base, gamma).unwrap().mu_star() - theta
}

#[test]
fn inverse_on_log_grid() {
    for i in 0..=12 {
        let d = 1e-3 * 10f64.powf(i as f64 * 0.5);
        for &g in &[1e-3, 1e-2, 0.1, 1.0, 3.0, 10.0] {
            let r = calibrate_epsilon(&DesignSpec::new(1.5, g, 7.0, d)).unwrap();
            let dev = forward_deviation(1.5, r.epsilon, g, 7.0);
            assert!((dev - d).abs() < 1e-6 * d.max(1.0), "d={d} g={g}: {dev}");
        }
    }
}

#[test]
fn design_k1_consistent_with_attacker_k1() {
    let d = 76.82;
    let k_design = solve_design_k1(d, 2.0).unwrap();
    assert!((k_design - 26.0).abs() < 0.05 * 26.0);
    let r = calibrate_epsilon(&DesignSpec::new(2.0, 2.0, 33.18, d)).unwrap();
    let k_attacker = solve_k1(2.0, r.scale).unwrap();
    assert!((k_design - k_attacker).abs() < 1e-6 * k_design);
}

#[test]
fn epsilon_increasing_in_gamma() {
    let eps: Vec<f64> = [0.05, 0.2, 0.5, 1.0, 2.0, 4.0]
        .iter()
        .map(|&g| calibrate_epsilon(&DesignSpec::new(2.0, g, 0.0, 30.0)).unwrap().epsilon)
        .collect();
    assert!(eps.windows(2).all(|w| w[1] > w[0]), "{eps:?}");
}

proptest! {
    #[test]
    fn round_trip(sens in 0.1f64..5.0, gamma in 0.01f64..5.0, d in 0.1f64..200.0, theta in -50.0f64..50.0) {
        let r = calibrate_epsilon(&DesignSpec::new(sens, gamma, theta, d)).unwrap();
        let dev = forward_deviation(sens, r.epsilon, gamma, theta);
        prop_assert!(((dev - d) / d).abs() < 1e-6);
        prop_assert!((r.scale - sens / r.epsilon).abs() <= 1e-12 * r.scale);
        prop_assert!((r.scale - (r.k1 * r.k1 * d / (2.0 * r.k1 + d)).sqrt()).abs() <= 1e-9 * r.scale);
    }

    #[test]
    fn design_residual_small(d in 1e-3f64..1e3, gamma in 1e-3f64..10.0) {
        let k = solve_design_k1(d, gamma).unwrap();
        let residual = d / k + (2.0 * k / (2.0 * k + d)).ln() - gamma;
        prop_assert!(residual.abs() < 1e-9, "residual {}", residual);
    }
}
