mod common;

use dpgrid::dp::{
    dp_query, dp_query_seeded, indistinguishability_check, laplace_pdf, sample_laplace, Dataset,
    IndistinguishabilityTest, PrivacyParams, QueryKind,
};
use dpgrid::seed::rng_from_seed;
use dpgrid::series::{synth_pmu, SynthConfig};
use proptest::prelude::*;

#[test]
fn pdf_integrates_to_one() {
    for &(theta, sens, eps) in &[(0.0, 1.0, 1.0), (33.18, 2.0, 0.1), (-4.0, 0.3, 2.5)] {
        let p = PrivacyParams::new(sens, eps, theta).unwrap();
        let b = p.scale();
        let mass = common::integrate_kinked(&|y| laplace_pdf(y, &p), theta - 50.0 * b, theta, theta + 50.0 * b, 1e-13);
        assert!((mass - 1.0).abs() < 1e-9, "mass {mass}");
    }
}

#[test]
fn pdf_matches_definition() {
    let p = PrivacyParams::new(2.0, 0.1, 33.18).unwrap();
    for i in -50..50 {
        let y = 33.18 + i as f64 * 1.7;
        assert!((laplace_pdf(y, &p) - common::laplace_density(y, 33.18, 20.0)).abs() < 1e-16);
    }
}

#[test]
fn sampler_moments() {
    let p = PrivacyParams::from_scale(1.0, 0.0).unwrap();
    let mut rng = rng_from_seed(2024);
    let xs: Vec<f64> = (0..1_000_000).map(|_| sample_laplace(&p, &mut rng)).collect();
    let (mean, var) = common::mean_and_var(&xs);
    assert!(mean.abs() < 0.005, "mean {mean}");
    assert!((var - 2.0).abs() < 0.02, "var {var}");
}

#[test]
fn hourly_mean_tracks_truth_at_eps_one() {
    // Per-hour mean queries over a synthetic day of 60 readings per hour.
    let s = synth_pmu(&SynthConfig { days: 3, samples_per_hour: 60, seed: 5, ..Default::default() }).unwrap();
    let values = s.present_values();
    let hours: Vec<Dataset> = values.chunks(60).map(|c| Dataset::new(c.to_vec())).collect();
    let deviation = |eps: f64| {
        let p = PrivacyParams::new(60.0 * 2.0, eps, 0.0).unwrap();
        let mut rng = rng_from_seed(77);
        hours
            .iter()
            .map(|d| {
                let r = dp_query(d, QueryKind::Mean, &p, &mut rng).unwrap();
                (r.released - r.true_value).abs()
            })
            .sum::<f64>()
            / hours.len() as f64
    };
    let (tight, loose) = (deviation(1.0), deviation(0.1));
    assert!(tight < 0.25 * loose, "eps=1: {tight}, eps=0.1: {loose}");
    assert!(tight < 5.0);
}

fn adjacent_pair(delta: f64) -> (Dataset, Dataset) {
    let x = Dataset::new(vec![3.0, 1.0, 4.0, 1.0, 5.0]);
    let y = x.with_replaced(2, 4.0 + delta);
    (x, y)
}

#[test]
fn indistinguishable_at_eps_one() {
    let (x, y) = adjacent_pair(1.0);
    let p = PrivacyParams::new(1.0, 1.0, 0.0).unwrap();
    let r = indistinguishability_check(&x, &y, &p, 1_000_000, 100, 11).unwrap();
    assert!(r.pass, "{r:?}");
}

#[test]
fn indistinguishable_at_eps_tenth() {
    let (x, y) = adjacent_pair(1.0);
    let p = PrivacyParams::new(1.0, 0.1, 0.0).unwrap();
    let r = indistinguishability_check(&x, &y, &p, 1_000_000, 100, 12).unwrap();
    assert!(r.pass, "{r:?}");
}

#[test]
fn half_noise_is_caught() {
    let (x, y) = adjacent_pair(1.0);
    let test = IndistinguishabilityTest { trials: 1_000_000, bins: 100, seed: 13 };
    let r = test.run_with_scale(&x, &y, 0.5, 1.0).unwrap();
    assert!(!r.pass, "{r:?}");
}

#[test]
fn log_ratio_monotone_in_epsilon() {
    let (x, y) = adjacent_pair(1.0);
    let ratios: Vec<f64> = [0.1, 0.5, 1.0]
        .iter()
        .map(|&eps| {
            let p = PrivacyParams::new(1.0, eps, 0.0).unwrap();
            indistinguishability_check(&x, &y, &p, 200_000, 60, 21).unwrap().max_log_ratio
        })
        .collect();
    assert!(ratios.windows(2).all(|w| w[1] >= w[0]), "{ratios:?}");
}

proptest! {
    #[test]
    fn sum_query_is_linear(values in prop::collection::vec(-1e3f64..1e3, 1..20), c in -10.0f64..10.0, seed in any::<u64>()) {
        let p = PrivacyParams::new(1.0, 1.0, 0.0).unwrap();
        let d = Dataset::new(values.clone());
        let scaled = Dataset::new(values.iter().map(|v| v * c).collect());
        let a = dp_query_seeded(&d, QueryKind::Sum, &p, seed).unwrap();
        let b = dp_query_seeded(&scaled, QueryKind::Sum, &p, seed).unwrap();
        prop_assert!((b.true_value - c * a.true_value).abs() <= 1e-9 * (1.0 + a.true_value.abs() * c.abs()));
        // same seed, same noise
        prop_assert_eq!(a.noise, b.noise);
    }

    #[test]
    fn released_is_truth_plus_noise(values in prop::collection::vec(-1e3f64..1e3, 1..20), seed in any::<u64>()) {
        let p = PrivacyParams::new(2.0, 0.5, 0.0).unwrap();
        let r = dp_query_seeded(&Dataset::new(values), QueryKind::Mean, &p, seed).unwrap();
        prop_assert_eq!(r.released, r.true_value + r.noise);
    }
}
