//! Seeded discrete-event simulation of multihop entanglement delivery.
//!
//! Every S-D pair fires attempts on a fixed clock. An attempt generates one
//! Werner pair per link of its route (two routes in bidirectional mode). A
//! pair is lost with `drop_rate`, or blocked when an endpoint lacks free
//! memory. If every pair is stored, the `hops - 1` entanglement swaps along
//! each route succeed independently with `swap_success`. Nodes learn the
//! outcome only from classical messages, so every stored pair stays in
//! memory for `classical_delay * hops` whether the attempt succeeded or not.

use std::cmp::{Ordering, Reverse};
use std::collections::{BTreeSet, BinaryHeap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::channels::ChannelKind;
use crate::error::{Error, Result};
use crate::routing::{dijkstra, mcdm_costs, waxman_generate, McdmWeights, NetworkGraph, Path, WaxmanParams};

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959963984540054;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Unidirectional,
    Bidirectional,
}

impl Mode {
    pub fn label(self) -> &'static str {
        match self {
            Mode::Unidirectional => "unidirectional",
            Mode::Bidirectional => "bidirectional",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "unidirectional" | "uni" => Ok(Mode::Unidirectional),
            "bidirectional" | "bi" => Ok(Mode::Bidirectional),
            _ => Err(Error::InvalidValue { key: "mode".into(), reason: format!("unknown mode {s:?}") }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Topology {
    Waxman(WaxmanParams),
    Graph(NetworkGraph),
}

/// Channel-dependent link parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelPreset {
    pub init_link_fidelity: f64,
    /// Memory slots a link pair occupies at each endpoint.
    pub slots_per_endpoint: u32,
}

/// Slots are the larger share of channel qubits held at one end.
pub fn channel_preset(kind: ChannelKind) -> ChannelPreset {
    let (f, slots) = match kind {
        ChannelKind::WBell5 => (0.95, 3),
        ChannelKind::GhzBell5 => (0.96, 3),
        ChannelKind::ClusterBell6 => (0.94, 4),
        ChannelKind::Ghz3 | ChannelKind::W3 | ChannelKind::Wn { .. } => (0.95, 2),
        ChannelKind::ClusterN { n } => (0.95, n.div_ceil(2) as u32),
        ChannelKind::Bell => (0.95, 1),
    };
    ChannelPreset { init_link_fidelity: f, slots_per_endpoint: slots }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub topology: Topology,
    pub channel: ChannelKind,
    pub num_sd_pairs: usize,
    /// Fixed S-D pairs; when `None` they are drawn among connected node pairs.
    pub sd_pairs: Option<Vec<(usize, usize)>>,
    pub send_rate: f64,
    pub classical_delay: f64,
    pub memory_per_node: u32,
    pub slots_per_endpoint: u32,
    pub drop_rate: f64,
    pub swap_success: f64,
    pub init_link_fidelity: f64,
    pub sim_duration: f64,
    pub mode: Mode,
    /// Route costs; `None` routes on raw edge weights.
    pub mcdm: Option<McdmWeights>,
    pub runs: usize,
    pub seed: u64,
}

impl SimConfig {
    /// Reference setup: 200 Waxman nodes, 10 S-D pairs, 1000 runs.
    pub fn paper() -> Self {
        let preset = channel_preset(ChannelKind::WBell5);
        Self {
            topology: Topology::Waxman(WaxmanParams::default()),
            channel: ChannelKind::WBell5,
            num_sd_pairs: 10,
            sd_pairs: None,
            send_rate: 1000.0,
            classical_delay: 0.05,
            memory_per_node: 50,
            slots_per_endpoint: preset.slots_per_endpoint,
            drop_rate: 0.03,
            swap_success: 0.98,
            init_link_fidelity: preset.init_link_fidelity,
            sim_duration: 1.0,
            mode: Mode::Unidirectional,
            mcdm: None,
            runs: 1000,
            seed: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |key: &str, reason: String| Err(Error::InvalidValue { key: key.into(), reason });
        for (key, p) in [("drop_rate", self.drop_rate), ("swap_success", self.swap_success)] {
            if !(0.0..=1.0).contains(&p) {
                return bad(key, format!("{p} is not a probability"));
            }
        }
        for (key, v) in [
            ("send_rate", self.send_rate),
            ("sim_duration", self.sim_duration),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return bad(key, format!("{v} must be positive"));
            }
        }
        if !(self.classical_delay >= 0.0 && self.classical_delay.is_finite()) {
            return bad("classical_delay", format!("{} must be non-negative", self.classical_delay));
        }
        if !(self.init_link_fidelity > 0.25 && self.init_link_fidelity <= 1.0) {
            return bad("init_link_fidelity", format!("{} outside (0.25, 1]", self.init_link_fidelity));
        }
        if self.runs == 0 {
            return bad("runs", "need at least one run".into());
        }
        if self.num_sd_pairs == 0 && self.sd_pairs.is_none() {
            return bad("num_sd_pairs", "need at least one pair".into());
        }
        if self.slots_per_endpoint == 0 {
            return bad("slots_per_endpoint", "must be positive".into());
        }
        if let Some(w) = &self.mcdm {
            w.validate()?;
        }
        if let Topology::Waxman(p) = &self.topology {
            p.validate()?;
        }
        Ok(())
    }
}

pub fn fidelity_to_werner(f: f64) -> f64 {
    (4.0 * f - 1.0) / 3.0
}

pub fn werner_to_fidelity(w: f64) -> f64 {
    (3.0 * w + 1.0) / 4.0
}

/// Fidelity after swapping two Werner pairs: `w_out = w1 * w2`.
pub fn swap_fidelity(w1: f64, w2: f64) -> Result<f64> {
    for w in [w1, w2] {
        if !(w > 0.0 && w <= 1.0) {
            return Err(Error::InvalidValue { key: "werner".into(), reason: format!("{w} outside (0, 1]") });
        }
    }
    Ok(werner_to_fidelity(w1 * w2))
}

/// End-to-end fidelity of `hops` identical links joined by swaps.
pub fn chain_fidelity(link_fidelity: f64, hops: usize) -> f64 {
    werner_to_fidelity(fidelity_to_werner(link_fidelity).powi(hops as i32))
}

/// Per-attempt success probability of a single route.
pub fn route_success_probability(hops: usize, drop_rate: f64, swap_success: f64) -> f64 {
    if hops == 0 {
        return 1.0;
    }
    (1.0 - drop_rate).powi(hops as i32) * swap_success.powi(hops as i32 - 1)
}

pub fn memory_utilization(used: u64, available: u64) -> f64 {
    if available == 0 {
        0.0
    } else {
        used as f64 / available as f64
    }
}

/// Fate of every generated link pair.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairLedger {
    pub generated: u64,
    /// Used by a completed delivery.
    pub consumed: u64,
    /// Lost in transmission, or stored and then released by a failed attempt.
    pub dropped: u64,
    pub blocked: u64,
    pub in_memory: u64,
    /// Pairs that entered memory at some point.
    pub stored: u64,
}

impl PairLedger {
    pub fn balanced(&self) -> bool {
        self.consumed + self.dropped + self.in_memory + self.blocked == self.generated
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetrics {
    pub seed: u64,
    /// Whether any S-D pair was connected.
    pub reachable: bool,
    pub sd_pairs: Vec<(usize, usize)>,
    pub attempts: u64,
    /// Successful deliveries; a bidirectional exchange counts once.
    pub deliveries: u64,
    pub throughput: f64,
    /// Mean end-to-end fidelity over deliveries; `None` when nothing arrived.
    pub fidelity: Option<f64>,
    pub memory_utilization: f64,
    pub mean_hops: Option<f64>,
    /// Memory slot reservations per delivery.
    pub slots_per_delivery: Option<f64>,
    /// Ledger as of `sim_duration`, before in-flight attempts drain.
    pub ledger_at_end: PairLedger,
    pub ledger: PairLedger,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub mean: f64,
    /// Normal-approximation 95% half width.
    pub ci: f64,
    pub n: usize,
}

impl Summary {
    pub fn of(xs: &[f64]) -> Self {
        let n = xs.len();
        if n == 0 {
            return Self { mean: f64::NAN, ci: f64::NAN, n };
        }
        let mean = xs.iter().sum::<f64>() / n as f64;
        let ci = if n < 2 {
            0.0
        } else {
            let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
            Z95 * (var / n as f64).sqrt()
        };
        Self { mean, ci, n }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimMetrics {
    pub node_count: usize,
    pub mode: Mode,
    pub channel: ChannelKind,
    pub seed: u64,
    pub throughput: Summary,
    /// Over runs that delivered anything.
    pub fidelity: Summary,
    pub memory_utilization: Summary,
    pub runs: Vec<RunMetrics>,
}

#[derive(Clone, Copy, PartialEq)]
struct Time(f64);

impl Eq for Time {}

impl Ord for Time {
    fn cmp(&self, o: &Self) -> Ordering {
        self.0.total_cmp(&o.0)
    }
}

impl PartialOrd for Time {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord)]
enum Event {
    Attempt { pair: usize, k: u64 },
    /// Classical messages of an attempt arrive and its memory is freed.
    Release { slots: Vec<usize>, pairs: u64, delivered: bool },
}

struct Route {
    forward: Path,
    backward: Option<Path>,
}

/// Picks S-D pairs uniformly among distinct connected node pairs.
fn sample_sd_pairs<R: Rng + ?Sized>(g: &NetworkGraph, count: usize, rng: &mut R) -> Vec<(usize, usize)> {
    let n = g.num_nodes();
    let mut comp = vec![usize::MAX; n];
    let mut members: Vec<Vec<usize>> = Vec::new();
    for s in 0..n {
        if comp[s] == usize::MAX {
            let c: Vec<usize> = g.component(s).into_iter().collect();
            for &v in &c {
                comp[v] = members.len();
            }
            members.push(c);
        }
    }
    // Ordered pairs weighted by component size so each connected pair is equally likely.
    let weights: Vec<u64> = members.iter().map(|c| (c.len() * (c.len() - 1)) as u64).collect();
    let total: u64 = weights.iter().sum();
    if total == 0 {
        return vec![];
    }
    (0..count)
        .map(|_| {
            let mut r = rng.gen_range(0..total);
            let ci = weights.iter().position(|&w| if r < w { true } else { r -= w; false }).unwrap();
            let c = &members[ci];
            let a = rng.gen_range(0..c.len());
            let mut b = rng.gen_range(0..c.len() - 1);
            if b >= a {
                b += 1;
            }
            (c[a], c[b])
        })
        .collect()
}

pub type RouteFn<'a> = dyn Fn(&NetworkGraph, usize, usize, &[f64]) -> Result<Path> + Sync + 'a;

/// Default router: classical Dijkstra. The Grover-minimum variant returns
/// identical paths and can be passed in instead.
pub fn classical_route(g: &NetworkGraph, s: usize, t: usize, costs: &[f64]) -> Result<Path> {
    dijkstra(g, s, t, costs)
}

fn route_costs(cfg: &SimConfig, g: &NetworkGraph) -> Result<Vec<f64>> {
    match &cfg.mcdm {
        None => Ok(g.edges.iter().map(|e| e.weight).collect()),
        Some(w) => mcdm_costs(g, &vec![0; g.num_nodes()], w),
    }
}

/// One seeded run of the event loop.
pub fn run_simulation(cfg: &SimConfig, seed: u64, route_fn: &RouteFn<'_>) -> Result<RunMetrics> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let graph = match &cfg.topology {
        Topology::Waxman(p) => waxman_generate(p, &mut rng)?,
        Topology::Graph(g) => g.clone(),
    };
    let sd_pairs = match &cfg.sd_pairs {
        Some(p) => p.clone(),
        None => sample_sd_pairs(&graph, cfg.num_sd_pairs, &mut rng),
    };
    let costs = route_costs(cfg, &graph)?;
    let mut routes = Vec::with_capacity(sd_pairs.len());
    for &(s, t) in &sd_pairs {
        let forward = match route_fn(&graph, s, t, &costs) {
            Ok(p) => p,
            Err(Error::Unreachable { .. }) => continue,
            Err(e) => return Err(e),
        };
        let backward = match cfg.mode {
            Mode::Unidirectional => None,
            Mode::Bidirectional => Some(route_fn(&graph, t, s, &costs)?),
        };
        routes.push(Route { forward, backward });
    }

    let mut metrics = RunMetrics {
        seed,
        reachable: !routes.is_empty(),
        sd_pairs: sd_pairs.clone(),
        attempts: 0,
        deliveries: 0,
        throughput: 0.0,
        fidelity: None,
        memory_utilization: 0.0,
        mean_hops: None,
        slots_per_delivery: None,
        ledger_at_end: PairLedger::default(),
        ledger: PairLedger::default(),
    };
    if routes.is_empty() {
        return Ok(metrics);
    }

    let rate = match cfg.mode {
        Mode::Unidirectional => cfg.send_rate,
        Mode::Bidirectional => cfg.send_rate / 2.0,
    };
    let period = 1.0 / rate;
    let offsets: Vec<f64> = routes.iter().map(|_| rng.gen::<f64>() * period).collect();
    let mut queue: BinaryHeap<Reverse<(Time, u64, Event)>> = BinaryHeap::new();
    let mut seq = 0u64;
    let mut push = |q: &mut BinaryHeap<_>, t: f64, e: Event| {
        q.push(Reverse((Time(t), seq, e)));
        seq += 1;
    };
    for (i, &o) in offsets.iter().enumerate() {
        push(&mut queue, o, Event::Attempt { pair: i, k: 0 });
    }

    let cap = cfg.memory_per_node;
    let slots = cfg.slots_per_endpoint;
    let mut occupancy = vec![0u32; graph.num_nodes()];
    let mut ledger = PairLedger::default();
    let mut snapshot = None;
    let mut fidelity_sum = 0.0;
    let mut hops_sum = 0usize;
    let mut delivered_qubits = 0u64;
    let mut slot_reservations = 0u64;

    while let Some(Reverse((Time(now), _, event))) = queue.pop() {
        if now >= cfg.sim_duration && snapshot.is_none() {
            snapshot = Some(ledger);
        }
        match event {
            Event::Release { slots: nodes, pairs, delivered } => {
                for n in nodes {
                    occupancy[n] -= slots;
                }
                ledger.in_memory -= pairs;
                if delivered {
                    ledger.consumed += pairs;
                } else {
                    ledger.dropped += pairs;
                }
            }
            Event::Attempt { pair, k } => {
                let next = offsets[pair] + (k + 1) as f64 * period;
                if next < cfg.sim_duration {
                    push(&mut queue, next, Event::Attempt { pair, k: k + 1 });
                }
                metrics.attempts += 1;
                let route = &routes[pair];
                let paths: Vec<&Path> = std::iter::once(&route.forward).chain(route.backward.as_ref()).collect();
                let mut held: Vec<usize> = Vec::new();
                let mut ok = true;
                for p in &paths {
                    for w in p.nodes.windows(2) {
                        ledger.generated += 1;
                        if rng.gen::<f64>() < cfg.drop_rate {
                            ledger.dropped += 1;
                            ok = false;
                        } else if occupancy[w[0]] + slots > cap || occupancy[w[1]] + slots > cap {
                            ledger.blocked += 1;
                            ok = false;
                        } else {
                            occupancy[w[0]] += slots;
                            occupancy[w[1]] += slots;
                            held.extend([w[0], w[1]]);
                            ledger.stored += 1;
                        }
                    }
                }
                if ok {
                    for p in &paths {
                        for _ in 1..p.hop_count {
                            if rng.gen::<f64>() >= cfg.swap_success {
                                ok = false;
                            }
                        }
                    }
                }
                let pairs = (held.len() / 2) as u64;
                let hops = paths.iter().map(|p| p.hop_count).max().unwrap_or(0);
                if ok {
                    let f: f64 = paths.iter().map(|p| chain_fidelity(cfg.init_link_fidelity, p.hop_count)).product();
                    metrics.deliveries += 1;
                    delivered_qubits += paths.len() as u64;
                    fidelity_sum += f;
                    hops_sum += route.forward.hop_count;
                    slot_reservations += held.len() as u64 * slots as u64;
                }
                if pairs > 0 {
                    ledger.in_memory += pairs;
                    let release = Event::Release { slots: held, pairs, delivered: ok };
                    push(&mut queue, now + cfg.classical_delay * hops as f64, release);
                }
            }
        }
    }
    metrics.ledger_at_end = snapshot.unwrap_or(ledger);
    metrics.ledger = ledger;
    metrics.throughput = delivered_qubits as f64 / cfg.sim_duration;
    if metrics.deliveries > 0 {
        let d = metrics.deliveries as f64;
        metrics.fidelity = Some(fidelity_sum / d);
        metrics.mean_hops = Some(hops_sum as f64 / d);
        metrics.slots_per_delivery = Some(slot_reservations as f64 / d);
    }
    metrics.memory_utilization = memory_utilization(ledger.consumed, ledger.stored);
    Ok(metrics)
}

fn node_count(cfg: &SimConfig) -> usize {
    match &cfg.topology {
        Topology::Waxman(p) => p.num_nodes,
        Topology::Graph(g) => g.num_nodes(),
    }
}

/// Runs seeds `seed .. seed + runs` in parallel and summarizes them.
pub fn aggregate_runs(cfg: &SimConfig, route_fn: &RouteFn<'_>) -> Result<SimMetrics> {
    cfg.validate()?;
    let runs: Vec<RunMetrics> = (0..cfg.runs as u64)
        .into_par_iter()
        .map(|i| run_simulation(cfg, cfg.seed.wrapping_add(i), route_fn))
        .collect::<Result<_>>()?;
    let col = |f: &dyn Fn(&RunMetrics) -> Option<f64>| -> Vec<f64> { runs.iter().filter_map(f).collect() };
    Ok(SimMetrics {
        node_count: node_count(cfg),
        mode: cfg.mode,
        channel: cfg.channel,
        seed: cfg.seed,
        throughput: Summary::of(&col(&|r| Some(r.throughput))),
        fidelity: Summary::of(&col(&|r| r.fidelity)),
        memory_utilization: Summary::of(&col(&|r| Some(r.memory_utilization))),
        runs,
    })
}

/// Aggregates every `(node count, mode)` combination, counts outermost.
pub fn sweep_nodes(
    template: &SimConfig,
    node_counts: &[usize],
    modes: &[Mode],
    route_fn: &RouteFn<'_>,
) -> Result<Vec<SimMetrics>> {
    if node_counts.is_empty() || modes.is_empty() {
        return Err(Error::InvalidValue { key: "node_counts".into(), reason: "empty sweep".into() });
    }
    let mut out = Vec::new();
    for &n in node_counts {
        for &mode in modes {
            let mut cfg = template.clone();
            cfg.mode = mode;
            match &mut cfg.topology {
                Topology::Waxman(p) => p.num_nodes = n,
                Topology::Graph(g) if g.num_nodes() != n => {
                    return Err(Error::InvalidValue {
                        key: "node_counts".into(),
                        reason: "an explicit graph cannot be resized".into(),
                    })
                }
                Topology::Graph(_) => {}
            }
            out.push(aggregate_runs(&cfg, route_fn)?);
        }
    }
    Ok(out)
}

pub const METRICS_HEADER: [&str; 11] = [
    "node_count",
    "mode",
    "channel",
    "runs",
    "throughput_mean",
    "throughput_ci",
    "fidelity_mean",
    "fidelity_ci",
    "memutil_mean",
    "memutil_ci",
    "seed",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub node_count: usize,
    pub mode: Mode,
    pub channel: String,
    pub runs: usize,
    pub throughput_mean: f64,
    pub throughput_ci: f64,
    pub fidelity_mean: f64,
    pub fidelity_ci: f64,
    pub memutil_mean: f64,
    pub memutil_ci: f64,
    pub seed: u64,
}

impl From<&SimMetrics> for MetricsRow {
    fn from(m: &SimMetrics) -> Self {
        Self {
            node_count: m.node_count,
            mode: m.mode,
            channel: m.channel.label(),
            runs: m.runs.len(),
            throughput_mean: m.throughput.mean,
            throughput_ci: m.throughput.ci,
            fidelity_mean: m.fidelity.mean,
            fidelity_ci: m.fidelity.ci,
            memutil_mean: m.memory_utilization.mean,
            memutil_ci: m.memory_utilization.ci,
            seed: m.seed,
        }
    }
}

/// Paired one-sided t-test of `mean(a - b) > 0`; returns the p-value.
pub fn paired_greater_p(a: &[f64], b: &[f64]) -> f64 {
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let n = d.len();
    if n < 2 {
        return 1.0;
    }
    let mean = d.iter().sum::<f64>() / n as f64;
    let var = d.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    if var == 0.0 {
        return if mean > 0.0 { 0.0 } else { 1.0 };
    }
    let t = mean / (var / n as f64).sqrt();
    let dist = StudentsT::new(0.0, 1.0, (n - 1) as f64).expect("positive dof");
    1.0 - dist.cdf(t)
}

fn ranks(xs: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..xs.len()).collect();
    idx.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut r = vec![0.0; xs.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && xs[idx[j + 1]] == xs[idx[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            r[k] = avg;
        }
        i = j + 1;
    }
    r
}

/// Spearman rank correlation with a one-sided p-value for `rho < 0`
/// (t approximation).
pub fn spearman_negative(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len().min(y.len());
    if n < 3 {
        return (f64::NAN, 1.0);
    }
    let (rx, ry) = (ranks(&x[..n]), ranks(&y[..n]));
    let mean = (n as f64 + 1.0) / 2.0;
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mean) * (b - mean)).sum();
    let sx = rx.iter().map(|a| (a - mean).powi(2)).sum::<f64>().sqrt();
    let sy = ry.iter().map(|b| (b - mean).powi(2)).sum::<f64>().sqrt();
    if sx == 0.0 || sy == 0.0 {
        return (f64::NAN, 1.0);
    }
    let rho = (cov / (sx * sy)).clamp(-1.0, 1.0);
    if rho <= -1.0 {
        return (rho, 0.0);
    }
    let t = rho * ((n as f64 - 2.0) / (1.0 - rho * rho)).sqrt();
    let dist = StudentsT::new(0.0, 1.0, n as f64 - 2.0).expect("positive dof");
    (rho, dist.cdf(t))
}

/// Unique node ids touched by the run's S-D pairs.
pub fn sd_nodes(m: &RunMetrics) -> BTreeSet<usize> {
    m.sd_pairs.iter().flat_map(|&(a, b)| [a, b]).collect()
}
