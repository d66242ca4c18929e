mod common;

use std::collections::BTreeMap;

use chrono::{DateTime, Duration, TimeZone, Utc};
use dpgrid::adversary::AttackProfile;
use dpgrid::dp::PrivacyParams;
use dpgrid::grid::{
    detection_rate, edge_id, impact_sweep, run_query, AttackerConfig, Detector, GridQuery, GridTopology, Layer,
    LayerPolicy, QuerySpec, TopologyConfig,
};
use dpgrid::series::{synth_pmu, MeasurementSeries, SynthConfig};
use dpgrid::Error;

fn t0() -> DateTime<Utc> {
    Utc.with_ymd_and_hms(2016, 5, 2, 0, 0, 0).unwrap()
}

fn constant(value: f64, hours: usize) -> MeasurementSeries {
    MeasurementSeries::regular(Default::default(), t0(), Duration::hours(1), vec![value; hours])
}

fn scale(b: f64) -> Option<PrivacyParams> {
    Some(PrivacyParams::from_scale(b, 0.0).unwrap())
}

fn constant_inputs(topo: &GridTopology, value: f64, hours: usize) -> BTreeMap<String, MeasurementSeries> {
    topo.pmu_ids().map(|id| (id.to_string(), constant(value, hours))).collect()
}

fn lenient() -> Detector {
    Detector::new(1e12, 4).unwrap()
}

#[test]
fn two_layer_variance() {
    let b = 1.5;
    let mut cfg = TopologyConfig::tree(1, 1);
    cfg.dp_policy = LayerPolicy { pmu: scale(b), pdc: scale(b), master: None };
    let topo = GridTopology::new(cfg).unwrap();
    let inputs = constant_inputs(&topo, 33.18, 24);
    let mut errs = Vec::new();
    for run in 0..10_000u64 {
        let trace = run_query(&topo, &inputs, &QuerySpec::new(GridQuery::HourlyMean), &lenient(), run).unwrap();
        errs.extend(trace.node_records("master").map(|r| r.delivered - r.true_value));
    }
    let (mean, var) = common::mean_and_var(&errs);
    assert!(mean.abs() < 0.05, "{mean}");
    assert!((var / (4.0 * b * b) - 1.0).abs() < 0.05, "var {var}, expected {}", 4.0 * b * b);
}

#[test]
fn single_edge_attack_mean() {
    let b = 2.0;
    let gamma = 0.1;
    let mut cfg = TopologyConfig::tree(1, 1);
    cfg.dp_policy = LayerPolicy::pmu_only(PrivacyParams::from_scale(b, 0.0).unwrap());
    cfg.attacker.insert(edge_id("pmu0", "pdc0"), AttackerConfig::always(gamma));
    let topo = GridTopology::new(cfg).unwrap();
    let clean = topo.without_attackers();
    let inputs = constant_inputs(&topo, 10.0, 1);
    let q = QuerySpec::new(GridQuery::HourlyMean);
    let diffs: Vec<f64> = (0..10_000u64)
        .map(|run| {
            let a = run_query(&topo, &inputs, &q, &lenient(), run).unwrap();
            let c = run_query(&clean, &inputs, &q, &lenient(), run).unwrap();
            let m = |t: &dpgrid::grid::SimTrace| t.node_records("master").next().unwrap().delivered;
            m(&a) - m(&c)
        })
        .collect();
    let (mean, var) = common::mean_and_var(&diffs);
    let k1 = topo.attacker_on("pmu0").unwrap().k1();
    let expected = 2.0 * b * b * k1 / (k1 * k1 - b * b);
    let sigma = (var / diffs.len() as f64).sqrt();
    assert!((mean - expected).abs() < 3.0 * sigma, "mean {mean}, expected {expected} ± {}", 3.0 * sigma);
}

fn layered_topology() -> GridTopology {
    let mut cfg = TopologyConfig::tree(3, 4);
    cfg.dp_policy = LayerPolicy { pmu: scale(1.0), pdc: scale(0.5), master: scale(0.25) };
    cfg.attacker.insert(edge_id("pmu5", "pdc1"), AttackerConfig::always(0.5));
    cfg.attacker.insert(edge_id("pdc2", "master"), AttackerConfig::always(1.0));
    GridTopology::new(cfg).unwrap()
}

fn synth_inputs(topo: &GridTopology, days: u32) -> BTreeMap<String, MeasurementSeries> {
    topo.pmu_ids()
        .enumerate()
        .map(|(i, id)| {
            let cfg = SynthConfig { days, samples_per_hour: 4, missing_fraction: 0.2, seed: i as u64, ..Default::default() };
            (id.to_string(), synth_pmu(&cfg).unwrap())
        })
        .collect()
}

#[test]
fn trace_conservation() {
    let topo = layered_topology();
    let inputs = synth_inputs(&topo, 2);
    let trace = run_query(&topo, &inputs, &QuerySpec::new(GridQuery::HourlyMean), &lenient(), 9).unwrap();
    assert_eq!(trace.metadata.steps, 48);
    for r in &trace.records {
        assert_eq!(r.delivered, r.true_value + (r.noise_below + r.dp_noise + r.injected));
        if r.layer == Layer::Pmu {
            assert_eq!(r.noise_below, 0.0);
        }
        if r.node != "pmu5" && r.node != "pdc2" {
            assert_eq!(r.injected, 0.0);
        }
    }
    // a parent's true value and inherited noise are the mean over reporting children
    let cfg = topo.config();
    for step in 0..48 {
        let at = |id: &str| trace.records.iter().find(|r| r.step == step && r.node == id);
        for parent in cfg.nodes.iter().filter(|n| n.layer != Layer::Pmu) {
            let kids: Vec<_> = cfg.edges.iter().filter(|e| e.to == parent.id).filter_map(|e| at(&e.from)).collect();
            let Some(p) = at(&parent.id) else {
                assert!(kids.is_empty());
                continue;
            };
            let n = kids.len() as f64;
            let tv = kids.iter().map(|k| k.true_value).sum::<f64>() / n;
            let nz = kids.iter().map(|k| k.total_noise()).sum::<f64>() / n;
            assert!((p.true_value - tv).abs() < 1e-9);
            assert!((p.noise_below - nz).abs() < 1e-9);
        }
    }
}

#[test]
fn node_order_does_not_matter() {
    let topo = layered_topology();
    let mut shuffled = topo.config().clone();
    shuffled.nodes.reverse();
    shuffled.edges.rotate_left(5);
    let shuffled = GridTopology::new(shuffled).unwrap();
    let inputs = synth_inputs(&topo, 1);
    let q = QuerySpec::new(GridQuery::Sum);
    let a = run_query(&topo, &inputs, &q, &lenient(), 4).unwrap();
    let b = run_query(&shuffled, &inputs, &q, &lenient(), 4).unwrap();
    assert_eq!(a.metadata, b.metadata);
    for (x, y) in a.records.iter().zip(&b.records) {
        assert_eq!(x, y);
    }
    assert_eq!(a, b);
}

#[test]
fn same_seed_same_trace() {
    let topo = layered_topology();
    let inputs = synth_inputs(&topo, 1);
    let q = QuerySpec::new(GridQuery::HourlyMean);
    assert_eq!(run_query(&topo, &inputs, &q, &lenient(), 1).unwrap(), run_query(&topo, &inputs, &q, &lenient(), 1).unwrap());
    assert_ne!(run_query(&topo, &inputs, &q, &lenient(), 1).unwrap(), run_query(&topo, &inputs, &q, &lenient(), 2).unwrap());
}

#[test]
fn without_dp_matches_plain_aggregation() {
    let topo = GridTopology::new(TopologyConfig::tree(2, 3)).unwrap();
    let inputs = synth_inputs(&topo, 1);
    let trace = run_query(&topo, &inputs, &QuerySpec::new(GridQuery::HourlyMean), &lenient(), 0).unwrap();
    for r in trace.node_records("master") {
        let hour_start = r.timestamp;
        let pmu_mean = |id: &str| {
            let v: Vec<f64> = inputs[id]
                .iter()
                .filter(|(t, _)| *t >= hour_start && *t < hour_start + Duration::hours(1))
                .filter_map(|(_, v)| v)
                .collect();
            (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
        };
        let pdc_mean = |pmus: &[&str]| {
            let v: Vec<f64> = pmus.iter().filter_map(|p| pmu_mean(p)).collect();
            (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
        };
        let pdcs: Vec<f64> =
            [pdc_mean(&["pmu0", "pmu1", "pmu2"]), pdc_mean(&["pmu3", "pmu4", "pmu5"])].into_iter().flatten().collect();
        let want = pdcs.iter().sum::<f64>() / pdcs.len() as f64;
        assert!((r.delivered - want).abs() < 1e-9, "{} vs {want}", r.delivered);
        assert_eq!(r.total_noise(), 0.0);
    }
}

#[test]
fn false_positive_rate_matches_closed_form() {
    let (b, w) = (1.0, 24);
    let tau = 3.0 * b;
    let mut cfg = TopologyConfig::tree(1, 1);
    cfg.dp_policy = LayerPolicy::pmu_only(PrivacyParams::from_scale(b, 0.0).unwrap());
    let topo = GridTopology::new(cfg).unwrap();
    let inputs = constant_inputs(&topo, 33.18, 96);
    let det = Detector::new(tau, w).unwrap();
    let rates = detection_rate(&topo, &inputs, &QuerySpec::new(GridQuery::HourlyMean), &det, false, 1000, 3).unwrap();
    let oracle = common::rolling_detector_fpr(tau, b, w);
    assert_eq!(rates.true_positive_rate, None);
    assert_eq!(rates.negative_observations, 1000 * (96 - w));
    assert!((rates.false_positive_rate / oracle - 1.0).abs() < 0.1, "{} vs {oracle}", rates.false_positive_rate);
}

fn pulse_attack(gamma: f64) -> GridTopology {
    let mut cfg = TopologyConfig::tree(1, 1);
    cfg.dp_policy = LayerPolicy::pmu_only(PrivacyParams::from_scale(1.0, 0.0).unwrap());
    cfg.attacker.insert(
        edge_id("pmu0", "pdc0"),
        AttackerConfig {
            gamma,
            scale: None,
            start: Some(t0() + Duration::hours(40)),
            end: Some(t0() + Duration::hours(41)),
        },
    );
    GridTopology::new(cfg).unwrap()
}

#[test]
fn detection_grows_with_tolerance() {
    let det = Detector::new(3.0, 24).unwrap();
    let q = QuerySpec::new(GridQuery::HourlyMean);
    let tprs: Vec<f64> = [1.0, 20.0, 400.0]
        .iter()
        .map(|&gamma| {
            let topo = pulse_attack(gamma);
            let inputs = constant_inputs(&topo, 33.18, 48);
            let r = detection_rate(&topo, &inputs, &q, &det, true, 1000, 5).unwrap();
            assert_eq!(r.positive_observations, 1000);
            r.true_positive_rate.unwrap()
        })
        .collect();
    assert!(tprs.windows(2).all(|w| w[1] > w[0]), "{tprs:?}");
    assert!(tprs[2] > 0.97, "{tprs:?}");
}

#[test]
fn stealthy_attacker_looks_like_noise() {
    let topo = pulse_attack(1e-4);
    let inputs = constant_inputs(&topo, 33.18, 48);
    let det = Detector::new(3.0, 24).unwrap();
    let r = detection_rate(&topo, &inputs, &QuerySpec::new(GridQuery::HourlyMean), &det, true, 4000, 6).unwrap();
    let tpr = r.true_positive_rate.unwrap();
    assert!((tpr - r.false_positive_rate).abs() < 0.015, "{r:?}");
}

#[test]
fn detection_needs_enough_runs() {
    let topo = pulse_attack(1.0);
    let inputs = constant_inputs(&topo, 1.0, 48);
    let det = Detector::new(3.0, 24).unwrap();
    let q = QuerySpec::new(GridQuery::HourlyMean);
    assert!(matches!(detection_rate(&topo, &inputs, &q, &det, true, 999, 0), Err(Error::InvalidParameter(_))));
}

#[test]
fn invalid_topologies_rejected() {
    let mut cyclic = TopologyConfig::tree(1, 1);
    cyclic.edges.push(dpgrid::grid::EdgeConfig { from: "master".into(), to: "pmu0".into() });
    assert!(matches!(GridTopology::new(cyclic), Err(Error::InvalidTopology(_))));

    let mut orphan = TopologyConfig::tree(1, 1);
    orphan.edges.retain(|e| e.from != "pdc0");
    assert!(matches!(GridTopology::new(orphan), Err(Error::InvalidTopology(_))));

    let mut unknown = TopologyConfig::tree(1, 1);
    unknown.attacker.insert("pmu9->pdc0".into(), AttackerConfig::always(1.0));
    assert!(matches!(GridTopology::new(unknown), Err(Error::InvalidTopology(_))));

    // attacker on a plaintext edge needs an explicit scale
    let mut plain = TopologyConfig::tree(1, 1);
    plain.attacker.insert(edge_id("pmu0", "pdc0"), AttackerConfig::always(1.0));
    assert!(GridTopology::new(plain.clone()).is_err());
    plain.attacker.get_mut("pmu0->pdc0").unwrap().scale = Some(2.0);
    let topo = GridTopology::new(plain).unwrap();
    let inputs = constant_inputs(&topo, 1.0, 2);
    let trace = run_query(&topo, &inputs, &QuerySpec::new(GridQuery::Sum), &lenient(), 0).unwrap();
    assert_eq!(trace.metadata.plaintext_attacks, vec!["pmu0->pdc0".to_string()]);
}

#[test]
fn missing_series_listed() {
    let topo = GridTopology::new(TopologyConfig::tree(1, 3)).unwrap();
    let mut inputs = constant_inputs(&topo, 1.0, 5);
    inputs.remove("pmu1");
    match run_query(&topo, &inputs, &QuerySpec::new(GridQuery::Sum), &lenient(), 0) {
        Err(Error::MissingSeries(ids)) => assert_eq!(ids, vec!["pmu1".to_string()]),
        other => panic!("{other:?}"),
    }
}

#[test]
fn sweep_monotone_on_grid() {
    let eps: Vec<f64> = (1..=10).map(|i| i as f64 / 10.0).collect();
    let gammas = [0.5, 1.0, 1.5, 2.0, 2.5];
    let sens = [0.5, 1.0, 1.5, 2.0];
    let pts = impact_sweep(&eps, &gammas, &sens, 33.18).unwrap();
    let at = |e: usize, g: usize, s: usize| pts[(e * gammas.len() + g) * sens.len() + s].mu_star;
    for e in 0..eps.len() {
        for g in 0..gammas.len() {
            for s in 0..sens.len() {
                if e + 1 < eps.len() {
                    assert!(at(e + 1, g, s) < at(e, g, s));
                }
                if g + 1 < gammas.len() {
                    assert!(at(e, g + 1, s) > at(e, g, s));
                }
                if s + 1 < sens.len() {
                    assert!(at(e, g, s + 1) > at(e, g, s));
                }
            }
        }
        // one 0.5 step in Δf moves the impact more than one 0.5 step in γ
        let base = at(e, 0, 0);
        assert!(at(e, 0, 1) - base > at(e, 1, 0) - base);
    }
}

#[test]
fn sweep_matches_attack_profile() {
    let pts = impact_sweep(&[0.1], &[2.0], &[2.0], 33.18).unwrap();
    let a = AttackProfile::new(PrivacyParams::new(2.0, 0.1, 33.18).unwrap(), 2.0).unwrap();
    assert_eq!(pts[0].mu_star, a.mu_star());
    assert!((72.0..=81.0).contains(&pts[0].deviation));
    assert!(impact_sweep(&[0.1], &[1.0], &[0.0], 0.0).is_err());
}

#[test]
fn increments_near_operating_region() {
    // ε = 0.1, θ = 33.18, from (Δf, γ) = (0.5, 0.5)
    let pts = impact_sweep(&[0.1], &[0.5, 1.0], &[0.5, 1.0], 33.18).unwrap();
    let mu = |g: f64, s: f64| pts.iter().find(|p| p.gamma == g && p.sensitivity == s).unwrap().mu_star;
    assert!((mu(0.5, 0.5) - 41.0).abs() < 0.5, "{}", mu(0.5, 0.5));
    assert!((mu(1.0, 0.5) - 45.0).abs() < 0.5, "{}", mu(1.0, 0.5));
    assert!((mu(0.5, 1.0) - 49.0).abs() < 0.5, "{}", mu(0.5, 1.0));
}
