//! Layered synchrophasor network simulator.
//!
//! PMUs answer an hourly query over their own readings, PDCs and master
//! nodes re-aggregate what their children deliver. Any layer may add its own
//! Laplace noise, and any channel may carry an attacker. An attacker hiding
//! in the sender's DP noise moves that draw to the optimal attack
//! distribution at the same quantile; on other channels it adds a fresh draw
//! from that distribution. A rolling-window detector flags
//! deliveries that stray more than `τ` from the recent mean.
//!
//! Every random stream is keyed by `(run seed, node or edge id, purpose)`,
//! so results do not depend on the order in which siblings are visited.

use std::collections::{BTreeMap, VecDeque};
use std::io::Write;
use std::path::Path;

use chrono::{DateTime, Duration, SecondsFormat, Utc};
use serde::{Deserialize, Serialize};

use crate::adversary::AttackProfile;
use crate::dp::{laplace_noise, PrivacyParams};
use crate::error::{Error, Result};
use crate::seed::{derive_seed, labeled_rng, SimRng};
use crate::series::{floor_hour, MeasurementSeries};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Layer {
    Pmu,
    Pdc,
    Master,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeConfig {
    pub id: String,
    pub layer: Layer,
}

/// Directed channel from a child to its parent.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeConfig {
    pub from: String,
    pub to: String,
}

impl EdgeConfig {
    /// Edge id used as the key of the attacker map: `"from->to"`.
    pub fn id(&self) -> String {
        edge_id(&self.from, &self.to)
    }
}

pub fn edge_id(from: &str, to: &str) -> String {
    format!("{from}->{to}")
}

/// DP noise added at each layer; `None` disables it.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct LayerPolicy {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pmu: Option<PrivacyParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pdc: Option<PrivacyParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub master: Option<PrivacyParams>,
}

impl LayerPolicy {
    pub fn pmu_only(p: PrivacyParams) -> Self {
        LayerPolicy { pmu: Some(p), ..Default::default() }
    }

    pub fn get(&self, layer: Layer) -> Option<&PrivacyParams> {
        match layer {
            Layer::Pmu => self.pmu.as_ref(),
            Layer::Pdc => self.pdc.as_ref(),
            Layer::Master => self.master.as_ref(),
        }
    }
}

/// Attacker sitting on one channel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AttackerConfig {
    pub gamma: f64,
    /// Noise scale the attacker hides in. Defaults to the DP scale of the
    /// sending node's layer; required when that layer has no DP.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scale: Option<f64>,
    /// Attack interval `[start, end)`; unbounded when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start: Option<DateTime<Utc>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub end: Option<DateTime<Utc>>,
}

impl AttackerConfig {
    pub fn always(gamma: f64) -> Self {
        AttackerConfig { gamma, scale: None, start: None, end: None }
    }
}

/// Declarative topology, as read from JSON.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TopologyConfig {
    pub nodes: Vec<NodeConfig>,
    pub edges: Vec<EdgeConfig>,
    #[serde(default)]
    pub dp_policy: LayerPolicy,
    #[serde(default)]
    pub attacker: BTreeMap<String, AttackerConfig>,
}

impl TopologyConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    /// `n_pdcs` PDCs with `pmus_per_pdc` PMUs each, all reporting to one
    /// master named `master`. PMUs are named `pmu{i}`, PDCs `pdc{j}`.
    pub fn tree(n_pdcs: usize, pmus_per_pdc: usize) -> Self {
        let mut cfg = TopologyConfig::default();
        cfg.nodes.push(NodeConfig { id: "master".into(), layer: Layer::Master });
        let mut pmu = 0;
        for j in 0..n_pdcs {
            let pdc = format!("pdc{j}");
            cfg.nodes.push(NodeConfig { id: pdc.clone(), layer: Layer::Pdc });
            cfg.edges.push(EdgeConfig { from: pdc.clone(), to: "master".into() });
            for _ in 0..pmus_per_pdc {
                let id = format!("pmu{pmu}");
                pmu += 1;
                cfg.nodes.push(NodeConfig { id: id.clone(), layer: Layer::Pmu });
                cfg.edges.push(EdgeConfig { from: id, to: pdc.clone() });
            }
        }
        cfg
    }
}

#[derive(Debug, Clone, PartialEq)]
struct EdgeAttacker {
    profile: AttackProfile,
    start: Option<DateTime<Utc>>,
    end: Option<DateTime<Utc>>,
    plaintext: bool,
    /// Rewrites the sender's own DP draw instead of adding a fresh one.
    tilts: bool,
}

impl EdgeAttacker {
    fn active_at(&self, t: DateTime<Utc>) -> bool {
        self.start.is_none_or(|s| t >= s) && self.end.is_none_or(|e| t < e)
    }
}

#[derive(Debug, Clone, PartialEq)]
struct Node {
    id: String,
    layer: Layer,
    parent: Option<usize>,
    children: Vec<usize>,
}

/// Validated topology: a forest of PMU → PDC → master trees.
#[derive(Debug, Clone, PartialEq)]
pub struct GridTopology {
    nodes: Vec<Node>,
    /// Children before parents.
    order: Vec<usize>,
    dp_policy: LayerPolicy,
    /// Keyed by sending node index.
    attackers: BTreeMap<usize, EdgeAttacker>,
    config: TopologyConfig,
}

impl GridTopology {
    /// Checks that ids are unique, every edge goes strictly up the layer
    /// order, each non-master node has exactly one parent, masters have
    /// none, and attackers sit on existing edges.
    pub fn new(config: TopologyConfig) -> Result<Self> {
        let bad = |m: String| Error::InvalidTopology(m);
        let mut index = BTreeMap::new();
        let mut nodes = Vec::with_capacity(config.nodes.len());
        for (i, n) in config.nodes.iter().enumerate() {
            if index.insert(n.id.clone(), i).is_some() {
                return Err(bad(format!("duplicate node id {:?}", n.id)));
            }
            nodes.push(Node { id: n.id.clone(), layer: n.layer, parent: None, children: vec![] });
        }
        if nodes.is_empty() {
            return Err(bad("no nodes".into()));
        }
        let mut edge_from = BTreeMap::new();
        for e in &config.edges {
            let (&c, &p) = match (index.get(&e.from), index.get(&e.to)) {
                (Some(c), Some(p)) => (c, p),
                _ => return Err(bad(format!("edge {} references an unknown node", e.id()))),
            };
            if nodes[c].layer >= nodes[p].layer {
                return Err(bad(format!(
                    "edge {} must go up the layer order ({:?} -> {:?})",
                    e.id(),
                    nodes[c].layer,
                    nodes[p].layer
                )));
            }
            if nodes[c].parent.is_some() {
                return Err(bad(format!("node {:?} has more than one parent", e.from)));
            }
            nodes[c].parent = Some(p);
            nodes[p].children.push(c);
            edge_from.insert(e.id(), c);
        }
        for n in &nodes {
            match (n.layer, n.parent) {
                (Layer::Master, _) => {}
                (_, None) => return Err(bad(format!("node {:?} does not reach a master", n.id))),
                _ => {}
            }
            if n.layer != Layer::Pmu && n.children.is_empty() {
                return Err(bad(format!("{:?} node {:?} has no children", n.layer, n.id)));
            }
        }
        for n in &mut nodes {
            let mut kids = std::mem::take(&mut n.children);
            kids.sort_by(|&a, &b| config.nodes[a].id.cmp(&config.nodes[b].id));
            n.children = kids;
        }
        // Layers strictly increase along edges, so sorting by layer is a
        // valid bottom-up order; id breaks ties deterministically.
        let mut order: Vec<usize> = (0..nodes.len()).collect();
        order.sort_by(|&a, &b| (nodes[a].layer, &nodes[a].id).cmp(&(nodes[b].layer, &nodes[b].id)));

        let mut attackers = BTreeMap::new();
        for (eid, a) in &config.attacker {
            let Some(&c) = edge_from.get(eid) else {
                return Err(bad(format!("attacker on unknown edge {eid:?}")));
            };
            let layer_dp = config.dp_policy.get(nodes[c].layer);
            let scale = match (a.scale, layer_dp) {
                (Some(s), _) => s,
                (None, Some(p)) => p.scale(),
                (None, None) => {
                    return Err(bad(format!(
                        "attacker on {eid:?} needs an explicit scale: {:?} layer has no DP",
                        nodes[c].layer
                    )))
                }
            };
            let base = PrivacyParams::from_scale(scale, 0.0)?;
            let profile = AttackProfile::new(base, a.gamma)?;
            let tilts = layer_dp.is_some_and(|p| p.scale() == scale);
            attackers.insert(
                c,
                EdgeAttacker { profile, start: a.start, end: a.end, plaintext: layer_dp.is_none(), tilts },
            );
        }
        Ok(GridTopology { nodes, order, dp_policy: config.dp_policy, attackers, config })
    }

    pub fn config(&self) -> &TopologyConfig {
        &self.config
    }

    pub fn pmu_ids(&self) -> impl Iterator<Item = &str> {
        self.nodes.iter().filter(|n| n.layer == Layer::Pmu).map(|n| n.id.as_str())
    }

    pub fn master_ids(&self) -> impl Iterator<Item = &str> {
        self.nodes.iter().filter(|n| n.layer == Layer::Master).map(|n| n.id.as_str())
    }

    pub fn has_attackers(&self) -> bool {
        !self.attackers.is_empty()
    }

    /// Attack profile on the edge leaving `node`, if any.
    pub fn attacker_on(&self, node: &str) -> Option<&AttackProfile> {
        let i = self.nodes.iter().position(|n| n.id == node)?;
        self.attackers.get(&i).map(|a| &a.profile)
    }

    /// Same network with every attacker removed.
    pub fn without_attackers(&self) -> GridTopology {
        let mut t = self.clone();
        t.attackers.clear();
        t.config.attacker.clear();
        t
    }

    fn outgoing_edge(&self, i: usize) -> Option<String> {
        self.nodes[i].parent.map(|p| edge_id(&self.nodes[i].id, &self.nodes[p].id))
    }

    fn attack_active_at(&self, t: DateTime<Utc>) -> bool {
        self.attackers.values().any(|a| a.active_at(t))
    }
}

/// Rolling-window deviation detector.
///
/// A delivery is flagged when it differs from the mean of the previous
/// `window` deliveries on the same hop by more than `tau`. Nothing is
/// flagged until the window is full.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Detector {
    pub tau: f64,
    pub window: usize,
}

impl Detector {
    pub fn new(tau: f64, window: usize) -> Result<Self> {
        if !(tau > 0.0) {
            return Err(Error::InvalidParameter(format!("detector threshold must be > 0, got {tau}")));
        }
        if window == 0 {
            return Err(Error::InvalidParameter("detector window must be >= 1".into()));
        }
        Ok(Detector { tau, window })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridQuery {
    HourlyMean,
    Sum,
}

impl GridQuery {
    fn aggregate(self, values: &[f64]) -> f64 {
        let s: f64 = values.iter().sum();
        match self {
            GridQuery::Sum => s,
            GridQuery::HourlyMean => s / values.len() as f64,
        }
    }
}

/// Which hours to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuerySpec {
    pub kind: GridQuery,
    /// `[start, end)` floored to hours; defaults to the hours every PMU covers.
    #[serde(default)]
    pub window: Option<(DateTime<Utc>, DateTime<Utc>)>,
}

impl QuerySpec {
    pub fn new(kind: GridQuery) -> Self {
        QuerySpec { kind, window: None }
    }
}

/// One delivery of one node at one hour.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HopRecord {
    pub step: usize,
    pub timestamp: DateTime<Utc>,
    pub node: String,
    pub layer: Layer,
    /// Outgoing channel; `None` at a master.
    pub edge: Option<String>,
    pub true_value: f64,
    /// Aggregated noise already present in what the children delivered.
    pub noise_below: f64,
    pub dp_noise: f64,
    pub injected: f64,
    pub delivered: f64,
    pub flagged: bool,
}

impl HopRecord {
    pub fn total_noise(&self) -> f64 {
        self.noise_below + self.dp_noise + self.injected
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TraceMetadata {
    pub seed: u64,
    pub steps: usize,
    pub attacked_edges: Vec<String>,
    /// Attacked channels whose sender applies no DP.
    pub plaintext_attacks: Vec<String>,
}

/// Full record of one simulation run.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SimTrace {
    pub records: Vec<HopRecord>,
    pub metadata: TraceMetadata,
}

/// Aggregate view of a trace for JSON export.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceSummary {
    pub metadata: TraceMetadata,
    pub hops: usize,
    pub flagged: usize,
    /// Per master: mean and max absolute `delivered - true`.
    pub masters: BTreeMap<String, DeviationStats>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeviationStats {
    pub mean_deviation: f64,
    pub max_abs_deviation: f64,
    pub flags: usize,
}

impl SimTrace {
    pub fn node_records<'a>(&'a self, node: &'a str) -> impl Iterator<Item = &'a HopRecord> + 'a {
        self.records.iter().filter(move |r| r.node == node)
    }

    pub fn summary(&self) -> TraceSummary {
        let mut masters: BTreeMap<String, (f64, f64, usize, usize)> = BTreeMap::new();
        for r in self.records.iter().filter(|r| r.layer == Layer::Master) {
            let e = masters.entry(r.node.clone()).or_insert((0.0, 0.0, 0, 0));
            let dev = r.delivered - r.true_value;
            e.0 += dev;
            e.1 = e.1.max(dev.abs());
            e.2 += r.flagged as usize;
            e.3 += 1;
        }
        TraceSummary {
            metadata: self.metadata.clone(),
            hops: self.records.len(),
            flagged: self.records.iter().filter(|r| r.flagged).count(),
            masters: masters
                .into_iter()
                .map(|(k, (sum, max, flags, n))| {
                    (k, DeviationStats { mean_deviation: sum / n as f64, max_abs_deviation: max, flags })
                })
                .collect(),
        }
    }

    /// One row per hop per timestep.
    pub fn write_csv<W: Write>(&self, mut w: W, comment: Option<&str>) -> Result<()> {
        if let Some(c) = comment {
            for line in c.lines() {
                writeln!(w, "# {line}")?;
            }
        }
        let mut out = csv::Writer::from_writer(w);
        out.write_record([
            "timestamp", "step", "node", "layer", "edge", "true_value", "noise_below", "dp_noise", "injected",
            "delivered", "flagged",
        ])?;
        for r in &self.records {
            out.write_record([
                r.timestamp.to_rfc3339_opts(SecondsFormat::Secs, true),
                r.step.to_string(),
                r.node.clone(),
                format!("{:?}", r.layer).to_lowercase(),
                r.edge.clone().unwrap_or_default(),
                format!("{:?}", r.true_value),
                format!("{:?}", r.noise_below),
                format!("{:?}", r.dp_noise),
                format!("{:?}", r.injected),
                format!("{:?}", r.delivered),
                r.flagged.to_string(),
            ])?;
        }
        out.flush()?;
        Ok(())
    }
}

fn hour_span(series: &MeasurementSeries) -> Option<(DateTime<Utc>, DateTime<Utc>)> {
    let first = floor_hour(*series.timestamps().first()?);
    let last = floor_hour(*series.timestamps().last()?);
    Some((first, last + Duration::hours(1)))
}

/// Per-hour aggregate of one PMU's present readings over `[start, start + n h)`.
fn pmu_buckets(series: &MeasurementSeries, kind: GridQuery, start: DateTime<Utc>, n: usize) -> Vec<Option<f64>> {
    let mut buckets: Vec<Vec<f64>> = vec![Vec::new(); n];
    for (t, v) in series.iter() {
        let Some(v) = v else { continue };
        let h = (floor_hour(t) - start).num_hours();
        if h >= 0 && (h as usize) < n {
            buckets[h as usize].push(v);
        }
    }
    buckets.into_iter().map(|b| (!b.is_empty()).then(|| kind.aggregate(&b))).collect()
}

/// Evaluates `query` bottom-up for every hour in the window.
///
/// `series` maps PMU id to its readings. A PMU with no present reading in an
/// hour does not report that hour; a parent aggregates whichever children
/// reported. For each delivery
/// `delivered = true_value + (noise_below + dp_noise + injected)` holds exactly.
pub fn run_query(
    topo: &GridTopology,
    series: &BTreeMap<String, MeasurementSeries>,
    query: &QuerySpec,
    det: &Detector,
    seed: u64,
) -> Result<SimTrace> {
    let missing: Vec<String> =
        topo.pmu_ids().filter(|id| series.get(*id).is_none_or(|s| s.is_empty())).map(String::from).collect();
    if !missing.is_empty() {
        return Err(Error::MissingSeries(missing));
    }
    let spans: BTreeMap<&str, (DateTime<Utc>, DateTime<Utc>)> =
        topo.pmu_ids().map(|id| (id, hour_span(&series[id]).expect("non-empty"))).collect();
    let (start, end) = match query.window {
        Some((s, e)) => {
            let (s, e) = (floor_hour(s), floor_hour(e));
            let uncovered: Vec<&str> =
                spans.iter().filter(|(_, (a, b))| *a > s || *b < e).map(|(id, _)| *id).collect();
            if !uncovered.is_empty() {
                return Err(Error::WindowOutOfRange(format!(
                    "query window not covered by PMU(s): {}",
                    uncovered.join(", ")
                )));
            }
            (s, e)
        }
        None => {
            let s = spans.values().map(|v| v.0).max().expect("at least one PMU");
            let e = spans.values().map(|v| v.1).min().expect("at least one PMU");
            (s, e)
        }
    };
    let n_steps = (end - start).num_hours();
    if n_steps <= 0 {
        return Err(Error::WindowOutOfRange(format!("empty query window [{start}, {end})")));
    }
    let n_steps = n_steps as usize;

    let n = topo.nodes.len();
    let buckets: Vec<Option<Vec<Option<f64>>>> = topo
        .nodes
        .iter()
        .map(|node| (node.layer == Layer::Pmu).then(|| pmu_buckets(&series[&node.id], query.kind, start, n_steps)))
        .collect();
    let mut dp_rngs: Vec<Option<(f64, SimRng)>> = topo
        .nodes
        .iter()
        .map(|node| {
            topo.dp_policy.get(node.layer).map(|p| (p.scale(), labeled_rng(seed, &format!("dp/{}", node.id))))
        })
        .collect();
    let mut attack_rngs: BTreeMap<usize, SimRng> = topo
        .attackers
        .keys()
        .map(|&i| (i, labeled_rng(seed, &format!("attack/{}", topo.outgoing_edge(i).unwrap_or_default()))))
        .collect();
    let edges: Vec<Option<String>> = (0..n).map(|i| topo.outgoing_edge(i)).collect();
    let mut history: Vec<VecDeque<f64>> = vec![VecDeque::with_capacity(det.window + 1); n];

    // (true_value, total_noise) delivered by each node at the current step.
    let mut current: Vec<Option<(f64, f64)>> = vec![None; n];
    let mut records = Vec::new();
    let mut trues = Vec::new();
    let mut noises = Vec::new();
    for step in 0..n_steps {
        let t = start + Duration::hours(step as i64);
        current.iter_mut().for_each(|c| *c = None);
        for &i in &topo.order {
            let node = &topo.nodes[i];
            let (true_value, noise_below) = match &buckets[i] {
                Some(b) => match b[step] {
                    Some(v) => (v, 0.0),
                    None => continue,
                },
                None => {
                    trues.clear();
                    noises.clear();
                    for &c in &node.children {
                        if let Some((tv, nz)) = current[c] {
                            trues.push(tv);
                            noises.push(nz);
                        }
                    }
                    if trues.is_empty() {
                        continue;
                    }
                    (query.kind.aggregate(&trues), query.kind.aggregate(&noises))
                }
            };
            let dp_noise = match &mut dp_rngs[i] {
                Some((scale, rng)) => laplace_noise(*scale, rng),
                None => 0.0,
            };
            let injected = match topo.attackers.get(&i) {
                Some(a) if a.active_at(t) && a.tilts => a.profile.tilt(dp_noise) - dp_noise,
                Some(a) if a.active_at(t) => {
                    a.profile.sample_offset(attack_rngs.get_mut(&i).expect("rng per attacker"))
                }
                _ => 0.0,
            };
            let total_noise = noise_below + dp_noise + injected;
            let delivered = true_value + total_noise;

            let h = &mut history[i];
            let flagged = h.len() == det.window && {
                let reference = h.iter().sum::<f64>() / h.len() as f64;
                (delivered - reference).abs() > det.tau
            };
            h.push_back(delivered);
            if h.len() > det.window {
                h.pop_front();
            }

            current[i] = Some((true_value, total_noise));
            records.push(HopRecord {
                step,
                timestamp: t,
                node: node.id.clone(),
                layer: node.layer,
                edge: edges[i].clone(),
                true_value,
                noise_below,
                dp_noise,
                injected,
                delivered,
                flagged,
            });
        }
    }
    let mut attacked_edges: Vec<String> = topo.attackers.keys().filter_map(|&i| edges[i].clone()).collect();
    let mut plaintext_attacks: Vec<String> =
        topo.attackers.iter().filter(|(_, a)| a.plaintext).filter_map(|(&i, _)| edges[i].clone()).collect();
    attacked_edges.sort();
    plaintext_attacks.sort();
    let metadata = TraceMetadata { seed, steps: n_steps, attacked_edges, plaintext_attacks };
    Ok(SimTrace { records, metadata })
}

/// Detector flag rates at the master nodes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectionRates {
    /// Flag rate with the attack on, over hours inside an attack interval.
    /// Absent when the attack is off or the topology has no attacker.
    pub true_positive_rate: Option<f64>,
    /// Flag rate with every attacker removed.
    pub false_positive_rate: f64,
    pub positive_observations: usize,
    pub negative_observations: usize,
}

/// Runs `n_runs` paired simulations (with and without attackers, sharing DP
/// noise) and reports how often the detector fires at master nodes once its
/// window is full.
pub fn detection_rate(
    topo: &GridTopology,
    series: &BTreeMap<String, MeasurementSeries>,
    query: &QuerySpec,
    det: &Detector,
    attack: bool,
    n_runs: usize,
    seed: u64,
) -> Result<DetectionRates> {
    if n_runs < 1000 {
        return Err(Error::InvalidParameter(format!("n_runs must be >= 1000, got {n_runs}")));
    }
    let clean = topo.without_attackers();
    let attack = attack && topo.has_attackers();
    let (mut pos, mut pos_flags, mut neg, mut neg_flags) = (0usize, 0usize, 0usize, 0usize);
    for r in 0..n_runs {
        let run_seed = derive_seed(seed, &format!("detection/{r}"));
        let masters = |rec: &&HopRecord| rec.layer == Layer::Master && rec.step >= det.window;
        for rec in run_query(&clean, series, query, det, run_seed)?.records.iter().filter(masters) {
            neg += 1;
            neg_flags += rec.flagged as usize;
        }
        if attack {
            for rec in run_query(topo, series, query, det, run_seed)?.records.iter().filter(masters) {
                if topo.attack_active_at(rec.timestamp) {
                    pos += 1;
                    pos_flags += rec.flagged as usize;
                }
            }
        }
    }
    if neg == 0 {
        return Err(Error::WindowOutOfRange(format!(
            "query window must exceed the detector window ({} hours)",
            det.window
        )));
    }
    Ok(DetectionRates {
        true_positive_rate: (attack && pos > 0).then(|| pos_flags as f64 / pos as f64),
        false_positive_rate: neg_flags as f64 / neg as f64,
        positive_observations: pos,
        negative_observations: neg,
    })
}

/// One point of the impact surface over (ε, γ, Δf).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImpactPoint {
    pub epsilon: f64,
    pub gamma: f64,
    pub sensitivity: f64,
    pub scale: f64,
    pub k1: f64,
    pub mu_star: f64,
    pub deviation: f64,
}

/// Optimal attack impact on the full grid `epsilons × gammas × sensitivities`,
/// in that nesting order.
pub fn impact_sweep(epsilons: &[f64], gammas: &[f64], sensitivities: &[f64], theta: f64) -> Result<Vec<ImpactPoint>> {
    let mut out = Vec::with_capacity(epsilons.len() * gammas.len() * sensitivities.len());
    for &epsilon in epsilons {
        for &gamma in gammas {
            for &sensitivity in sensitivities {
                if !(sensitivity > 0.0) {
                    return Err(Error::InvalidParameter(format!("sensitivity must be > 0, got {sensitivity}")));
                }
                let base = PrivacyParams::new(sensitivity, epsilon, theta)?;
                let a = AttackProfile::new(base, gamma)?;
                out.push(ImpactPoint {
                    epsilon,
                    gamma,
                    sensitivity,
                    scale: base.scale(),
                    k1: a.k1(),
                    mu_star: a.mu_star(),
                    deviation: a.deviation(),
                });
            }
        }
    }
    Ok(out)
}

pub fn write_sweep_csv<W: Write>(points: &[ImpactPoint], mut w: W, comment: Option<&str>) -> Result<()> {
    if let Some(c) = comment {
        for line in c.lines() {
            writeln!(w, "# {line}")?;
        }
    }
    let mut out = csv::Writer::from_writer(w);
    for p in points {
        out.serialize(p)?;
    }
    out.flush()?;
    Ok(())
}
