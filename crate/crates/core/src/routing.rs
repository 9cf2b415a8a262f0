//! Graph model, Waxman topologies, shortest paths and the CNOT-chain walk.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap};
use std::fmt::Write as _;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::channels::{circuit_prepare, ChannelKind};
use crate::error::{Error, Result};
use crate::statevec::{Gate, StateVector, MAX_QUBITS};

const LENGTH_TOL: f64 = 1e-9;
/// Largest frontier the Grover minimum search will simulate.
pub const FRONTIER_GUARD: usize = 1 << 10;
/// Largest walk register for which the exact distribution is returned.
pub const EXACT_WALK_QUBITS: usize = 20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Node {
    pub id: usize,
    pub x: f64,
    pub y: f64,
    #[serde(rename = "mem")]
    pub memory_capacity: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    #[serde(default)]
    pub length_km: f64,
    pub weight: f64,
    pub fidelity: f64,
}

impl Edge {
    pub fn other(&self, n: usize) -> usize {
        if self.u == n {
            self.v
        } else {
            self.u
        }
    }
}

/// Undirected simple graph. Node ids equal their index in `nodes`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawGraph")]
pub struct NetworkGraph {
    pub nodes: Vec<Node>,
    pub edges: Vec<Edge>,
    #[serde(skip)]
    adjacency: Vec<Vec<usize>>,
}

#[derive(Deserialize)]
struct RawGraph {
    nodes: Vec<Node>,
    edges: Vec<Edge>,
}

impl TryFrom<RawGraph> for NetworkGraph {
    type Error = Error;
    fn try_from(r: RawGraph) -> Result<Self> {
        let mut g = NetworkGraph::new(r.nodes)?;
        for e in r.edges {
            let id = g.add_edge(e.u, e.v, e.weight, e.fidelity)?;
            let stored = g.edges[id].length_km;
            if e.length_km != 0.0 && (e.length_km - stored).abs() > LENGTH_TOL {
                return Err(Error::InvalidValue {
                    key: format!("edge {}-{} length_km", e.u, e.v),
                    reason: format!("{} is not the endpoint distance {stored}", e.length_km),
                });
            }
        }
        Ok(g)
    }
}

fn distance(a: &Node, b: &Node) -> f64 {
    (a.x - b.x).hypot(a.y - b.y)
}

impl NetworkGraph {
    pub fn new(nodes: Vec<Node>) -> Result<Self> {
        for (i, n) in nodes.iter().enumerate() {
            if n.id != i {
                return Err(Error::InvalidValue { key: "node id".into(), reason: format!("{} at index {i}", n.id) });
            }
        }
        let adjacency = vec![Vec::new(); nodes.len()];
        Ok(Self { nodes, edges: Vec::new(), adjacency })
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    fn check_node(&self, n: usize) -> Result<()> {
        if n < self.nodes.len() {
            Ok(())
        } else {
            Err(Error::UnknownNode(n))
        }
    }

    /// Adds `u - v` with its Euclidean length and returns the edge index.
    pub fn add_edge(&mut self, u: usize, v: usize, weight: f64, fidelity: f64) -> Result<usize> {
        self.check_node(u)?;
        self.check_node(v)?;
        let key = format!("edge {u}-{v}");
        if u == v || self.edge_between(u, v).is_some() {
            return Err(Error::InvalidValue { key, reason: "self loop or parallel edge".into() });
        }
        if !(weight > 0.0 && weight.is_finite()) {
            return Err(Error::InvalidValue { key, reason: format!("weight {weight} must be positive") });
        }
        if !(fidelity > 0.0 && fidelity <= 1.0) {
            return Err(Error::InvalidValue { key, reason: format!("fidelity {fidelity} outside (0, 1]") });
        }
        let length_km = distance(&self.nodes[u], &self.nodes[v]);
        self.edges.push(Edge { u, v, length_km, weight, fidelity });
        let id = self.edges.len() - 1;
        self.adjacency[u].push(id);
        self.adjacency[v].push(id);
        Ok(id)
    }

    pub fn edge_between(&self, u: usize, v: usize) -> Option<&Edge> {
        self.adjacency.get(u)?.iter().map(|&e| &self.edges[e]).find(|e| e.other(u) == v)
    }

    /// Edge indices incident to `n`.
    pub fn incident(&self, n: usize) -> &[usize] {
        &self.adjacency[n]
    }

    pub fn neighbors(&self, n: usize) -> impl Iterator<Item = usize> + '_ {
        self.adjacency[n].iter().map(move |&e| self.edges[e].other(n))
    }

    /// Largest pairwise node distance.
    pub fn max_pairwise_distance(&self) -> f64 {
        let mut best = 0.0f64;
        for (i, a) in self.nodes.iter().enumerate() {
            for b in &self.nodes[i + 1..] {
                best = best.max(distance(a, b));
            }
        }
        best
    }

    pub fn mean_edge_length(&self) -> Option<f64> {
        (!self.edges.is_empty()).then(|| self.edges.iter().map(|e| e.length_km).sum::<f64>() / self.edges.len() as f64)
    }

    /// Nodes reachable from `s`, including `s`.
    pub fn component(&self, s: usize) -> BTreeSet<usize> {
        let mut seen = BTreeSet::from([s]);
        let mut stack = vec![s];
        while let Some(u) = stack.pop() {
            for v in self.neighbors(u) {
                if seen.insert(v) {
                    stack.push(v);
                }
            }
        }
        seen
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    /// Path over consecutive node ids `0 - 1 - ... - (n-1)` spaced `spacing` km.
    pub fn line(n: usize, spacing: f64, memory: u32) -> Result<Self> {
        let nodes = (0..n).map(|i| Node { id: i, x: i as f64 * spacing, y: 0.0, memory_capacity: memory }).collect();
        let mut g = Self::new(nodes)?;
        for i in 1..n {
            g.add_edge(i - 1, i, spacing.max(f64::MIN_POSITIVE), 1.0)?;
        }
        Ok(g)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum WeightInit {
    Length,
    Uniform { low: f64, high: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaxmanParams {
    pub num_nodes: usize,
    pub area: (f64, f64),
    pub delta: f64,
    pub epsilon: f64,
    pub memory_capacity: u32,
    pub link_fidelity: f64,
    pub weights: WeightInit,
}

impl Default for WaxmanParams {
    fn default() -> Self {
        Self {
            num_nodes: 200,
            area: (2000.0, 4000.0),
            delta: 0.90,
            epsilon: 0.01,
            memory_capacity: 50,
            link_fidelity: 0.95,
            weights: WeightInit::Uniform { low: 1.0, high: 10.0 },
        }
    }
}

impl WaxmanParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |key: &str, reason: &str| Err(Error::InvalidValue { key: key.into(), reason: reason.into() });
        if self.num_nodes < 2 {
            return bad("num_nodes", "need at least 2 nodes");
        }
        if !(self.area.0 > 0.0 && self.area.1 > 0.0) {
            return bad("area", "width and height must be positive");
        }
        if !(self.delta > 0.0 && self.delta <= 1.0) {
            return bad("delta", "must lie in (0, 1]");
        }
        if !(self.epsilon > 0.0) {
            return bad("epsilon", "must be positive");
        }
        if !(self.link_fidelity > 0.0 && self.link_fidelity <= 1.0) {
            return bad("link_fidelity", "must lie in (0, 1]");
        }
        if let WeightInit::Uniform { low, high } = self.weights {
            if !(low > 0.0 && high >= low) {
                return bad("weights", "need 0 < low <= high");
            }
        }
        Ok(())
    }
}

pub fn waxman_edge_probability(length: f64, max_length: f64, delta: f64, epsilon: f64) -> f64 {
    if max_length <= 0.0 {
        return delta;
    }
    delta * (-length / (epsilon * max_length)).exp()
}

/// Connects a fixed layout: every pair independently with the Waxman
/// probability, `L` being the layout's max pairwise distance.
pub fn waxman_connect<R: Rng + ?Sized>(nodes: Vec<Node>, p: &WaxmanParams, rng: &mut R) -> Result<NetworkGraph> {
    let mut g = NetworkGraph::new(nodes)?;
    let l_max = g.max_pairwise_distance();
    let n = g.num_nodes();
    for u in 0..n {
        for v in u + 1..n {
            let len = distance(&g.nodes[u], &g.nodes[v]);
            if rng.gen::<f64>() < waxman_edge_probability(len, l_max, p.delta, p.epsilon) {
                let weight = match p.weights {
                    WeightInit::Length => len.max(f64::MIN_POSITIVE),
                    WeightInit::Uniform { low, high } => {
                        if high > low {
                            rng.gen_range(low..high)
                        } else {
                            low
                        }
                    }
                };
                g.add_edge(u, v, weight, p.link_fidelity)?;
            }
        }
    }
    Ok(g)
}

pub fn waxman_generate<R: Rng + ?Sized>(p: &WaxmanParams, rng: &mut R) -> Result<NetworkGraph> {
    p.validate()?;
    let nodes = (0..p.num_nodes)
        .map(|id| Node {
            id,
            x: rng.gen::<f64>() * p.area.0,
            y: rng.gen::<f64>() * p.area.1,
            memory_capacity: p.memory_capacity,
        })
        .collect();
    waxman_connect(nodes, p, rng)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McdmWeights {
    pub w_distance: f64,
    pub w_fidelity: f64,
    pub w_memory: f64,
}

impl Default for McdmWeights {
    fn default() -> Self {
        Self { w_distance: 1.0, w_fidelity: 0.0, w_memory: 0.0 }
    }
}

impl McdmWeights {
    pub fn new(w_distance: f64, w_fidelity: f64, w_memory: f64) -> Result<Self> {
        let w = Self { w_distance, w_fidelity, w_memory };
        w.validate()?;
        Ok(w)
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.w_distance, self.w_fidelity, self.w_memory];
        if all.iter().any(|w| !(*w >= 0.0)) || (all.iter().sum::<f64>() - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidValue {
                key: "mcdm".into(),
                reason: format!("weights {all:?} are not on the simplex"),
            });
        }
        Ok(())
    }
}

/// `w_d * length / l_norm + w_f * (1 - fidelity) + w_m * (1 - free_memory_fraction)`.
pub fn mcdm_cost(edge: &Edge, free_memory_fraction: f64, l_norm: f64, w: &McdmWeights) -> Result<f64> {
    w.validate()?;
    if !(l_norm > 0.0) {
        return Err(Error::InvalidValue { key: "l_norm".into(), reason: "must be positive".into() });
    }
    Ok(w.w_distance * edge.length_km / l_norm
        + w.w_fidelity * (1.0 - edge.fidelity)
        + w.w_memory * (1.0 - free_memory_fraction.clamp(0.0, 1.0)))
}

/// Per-edge MCDM costs with `used[n]` memory slots occupied at node `n`.
/// Free memory of an edge is that of its more loaded endpoint.
pub fn mcdm_costs(g: &NetworkGraph, used: &[u32], w: &McdmWeights) -> Result<Vec<f64>> {
    let l_norm = g.max_pairwise_distance().max(f64::MIN_POSITIVE);
    g.edges
        .iter()
        .map(|e| {
            let free = |n: usize| {
                let cap = g.nodes[n].memory_capacity as f64;
                if cap == 0.0 {
                    0.0
                } else {
                    1.0 - used.get(n).copied().unwrap_or(0) as f64 / cap
                }
            };
            mcdm_cost(e, free(e.u).min(free(e.v)), l_norm, w)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Path {
    pub nodes: Vec<usize>,
    pub total_cost: f64,
    pub hop_count: usize,
}

impl Path {
    pub fn single(n: usize) -> Self {
        Self { nodes: vec![n], total_cost: 0.0, hop_count: 0 }
    }

    pub fn reversed(&self) -> Self {
        let mut nodes = self.nodes.clone();
        nodes.reverse();
        Self { nodes, ..self.clone() }
    }
}

#[derive(Clone, Copy, PartialEq)]
struct HeapItem(f64, usize);

impl Eq for HeapItem {}

impl Ord for HeapItem {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then_with(|| other.1.cmp(&self.1))
    }
}

impl PartialOrd for HeapItem {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn check_costs(g: &NetworkGraph, costs: &[f64]) -> Result<()> {
    if costs.len() != g.edges.len() {
        return Err(Error::InvalidValue {
            key: "costs".into(),
            reason: format!("{} costs for {} edges", costs.len(), g.edges.len()),
        });
    }
    if let Some(c) = costs.iter().find(|c| !(**c >= 0.0 && c.is_finite())) {
        return Err(Error::InvalidValue { key: "costs".into(), reason: format!("negative or non-finite cost {c}") });
    }
    Ok(())
}

/// Walks back from `t` picking the smallest-id tight predecessor.
fn reconstruct(g: &NetworkGraph, costs: &[f64], dist: &[f64], s: usize, t: usize) -> Result<Path> {
    if !dist[t].is_finite() {
        return Err(Error::Unreachable { source_node: s, target: t });
    }
    let mut nodes = vec![t];
    let mut v = t;
    let mut on_path = BTreeSet::from([t]);
    while v != s {
        let u = g.adjacency[v]
            .iter()
            .filter_map(|&e| {
                let u = g.edges[e].other(v);
                (dist[u] + costs[e] == dist[v] && !on_path.contains(&u)).then_some(u)
            })
            .min()
            .expect("finite distance has a tight predecessor");
        on_path.insert(u);
        nodes.push(u);
        v = u;
    }
    nodes.reverse();
    let total_cost = nodes
        .windows(2)
        .map(|w| {
            let e = g.adjacency[w[0]].iter().find(|&&e| g.edges[e].other(w[0]) == w[1]).unwrap();
            costs[*e]
        })
        .fold(0.0, |a, c| a + c);
    let hop_count = nodes.len() - 1;
    Ok(Path { nodes, total_cost, hop_count })
}

fn relax(g: &NetworkGraph, costs: &[f64], dist: &mut [f64], u: usize, mut improved: impl FnMut(usize, f64)) {
    for &e in &g.adjacency[u] {
        let v = g.edges[e].other(u);
        let nd = dist[u] + costs[e];
        if nd < dist[v] {
            dist[v] = nd;
            improved(v, nd);
        }
    }
}

/// Shortest path under per-edge `costs` (indexed like `g.edges`).
pub fn dijkstra(g: &NetworkGraph, s: usize, t: usize, costs: &[f64]) -> Result<Path> {
    g.check_node(s)?;
    g.check_node(t)?;
    check_costs(g, costs)?;
    let mut dist = vec![f64::INFINITY; g.num_nodes()];
    let mut done = vec![false; g.num_nodes()];
    let mut heap = BinaryHeap::from([HeapItem(0.0, s)]);
    dist[s] = 0.0;
    while let Some(HeapItem(d, u)) = heap.pop() {
        if done[u] || d > dist[u] {
            continue;
        }
        done[u] = true;
        relax(g, costs, &mut dist, u, |v, nd| heap.push(HeapItem(nd, v)));
    }
    reconstruct(g, costs, &dist, s, t)
}

pub fn edge_weights(g: &NetworkGraph) -> Vec<f64> {
    g.edges.iter().map(|e| e.weight).collect()
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MinSearchStats {
    pub oracle_queries: u64,
    /// Whether the returned index is the true minimum.
    pub found_minimum: bool,
}

/// Dürr–Høyer minimum finding, simulated on a state vector.
///
/// Each round runs a BBHT search for an index strictly below the current
/// threshold (ties ordered by index) with growth factor 6/5. Oracle queries
/// count Grover iterations plus one per candidate check. The search stops
/// after `22.5 sqrt(m) + 1.4 log2(m)^2` queries.
pub fn durr_hoyer_min<R: Rng + ?Sized>(values: &[f64], rng: &mut R) -> Result<(usize, MinSearchStats)> {
    let m = values.len();
    if m == 0 {
        return Err(Error::InvalidValue { key: "frontier".into(), reason: "empty".into() });
    }
    if m > FRONTIER_GUARD {
        return Err(Error::ResourceGuard(format!("frontier of {m} exceeds {FRONTIER_GUARD}")));
    }
    let true_min = (0..m).min_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b))).unwrap();
    if m == 1 {
        return Ok((0, MinSearchStats { oracle_queries: 0, found_minimum: true }));
    }
    let below = |i: usize, y: usize| i < m && values[i].total_cmp(&values[y]).then(i.cmp(&y)) == Ordering::Less;
    let n_qubits = m.next_power_of_two().trailing_zeros() as usize;
    let big_n = 1usize << n_qubits;
    let log_m = (m as f64).log2();
    let budget = (22.5 * (m as f64).sqrt() + 1.4 * log_m * log_m).ceil() as u64;
    let mut y = rng.gen_range(0..m);
    let mut queries = 0u64;
    'outer: while queries < budget {
        let mut k = 1.0f64;
        while queries < budget {
            let j = rng.gen_range(0..k.ceil().max(1.0) as u64);
            let mut psi = StateVector::uniform(n_qubits)?;
            for _ in 0..j {
                psi.phase_oracle(|i| below(i, y));
                psi.diffuse();
            }
            queries += j + 1;
            let probs = psi.probabilities();
            let r: f64 = rng.gen();
            let mut acc = 0.0;
            let mut pick = big_n - 1;
            for (i, p) in probs.iter().enumerate() {
                acc += p;
                if r < acc {
                    pick = i;
                    break;
                }
            }
            if below(pick, y) {
                y = pick;
                continue 'outer;
            }
            k = (k * 6.0 / 5.0).min((big_n as f64).sqrt());
        }
    }
    Ok((y, MinSearchStats { oracle_queries: queries, found_minimum: y == true_min }))
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct GroverStats {
    pub oracle_queries: u64,
    pub frontier_extractions: u64,
    /// `(frontier size, queries)` per quantum extraction.
    pub per_extraction: Vec<(usize, u64)>,
    /// Extractions that did not return the frontier minimum.
    pub non_minimal_extractions: u64,
    /// Extractions done classically because the frontier exceeded the guard.
    pub classical_fallbacks: u64,
}

/// Dijkstra with each frontier minimum taken by [`durr_hoyer_min`].
///
/// The search is label correcting: a node settled through a non-minimal
/// extraction is reopened when a shorter label reaches it, so the
/// distances (and hence the path) always equal classical Dijkstra's.
pub fn grover_min_dijkstra<R: Rng + ?Sized>(
    g: &NetworkGraph,
    s: usize,
    t: usize,
    costs: &[f64],
    rng: &mut R,
) -> Result<(Path, GroverStats)> {
    g.check_node(s)?;
    g.check_node(t)?;
    check_costs(g, costs)?;
    let mut dist = vec![f64::INFINITY; g.num_nodes()];
    dist[s] = 0.0;
    let mut open = BTreeSet::from([s]);
    let mut stats = GroverStats::default();
    while !open.is_empty() {
        let frontier: Vec<usize> = open.iter().copied().collect();
        let u = if frontier.len() > FRONTIER_GUARD {
            stats.classical_fallbacks += 1;
            *frontier.iter().min_by(|&&a, &&b| dist[a].total_cmp(&dist[b]).then(a.cmp(&b))).unwrap()
        } else {
            let values: Vec<f64> = frontier.iter().map(|&n| dist[n]).collect();
            let (i, st) = durr_hoyer_min(&values, rng)?;
            stats.oracle_queries += st.oracle_queries;
            stats.per_extraction.push((frontier.len(), st.oracle_queries));
            if !st.found_minimum {
                stats.non_minimal_extractions += 1;
            }
            frontier[i]
        };
        stats.frontier_extractions += 1;
        open.remove(&u);
        relax(g, costs, &mut dist, u, |v, _| {
            open.insert(v);
        });
    }
    Ok((reconstruct(g, costs, &dist, s, t)?, stats))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BidirectionalPaths {
    pub forward: Path,
    pub backward: Path,
    pub forward_stats: GroverStats,
    pub backward_stats: GroverStats,
}

pub fn find_paths_bidirectional<R: Rng + ?Sized>(
    g: &NetworkGraph,
    s: usize,
    t: usize,
    costs: &[f64],
    rng: &mut R,
) -> Result<BidirectionalPaths> {
    if s == t {
        return Err(Error::InvalidValue { key: "target".into(), reason: "source and target coincide".into() });
    }
    let (forward, forward_stats) = grover_min_dijkstra(g, s, t, costs, rng)?;
    let (backward, backward_stats) = grover_min_dijkstra(g, t, s, costs, rng)?;
    Ok(BidirectionalPaths { forward, backward, forward_stats, backward_stats })
}

/// Preparation of the walk's source end.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "channel")]
pub enum WalkSource {
    Zero,
    One,
    /// The channel's preparation gates, its qubits spread from the first to
    /// the last path node.
    Channel(ChannelKind),
}

pub fn build_walk_circuit(path: &Path, max_steps: usize, source: WalkSource) -> Result<Vec<Gate>> {
    let m = path.nodes.len();
    if m == 0 || m > MAX_QUBITS {
        return Err(Error::ResourceGuard(format!("walk over {m} nodes exceeds {MAX_QUBITS} qubits")));
    }
    let mut gates = match source {
        WalkSource::Zero => vec![],
        WalkSource::One => vec![Gate::x(0)],
        WalkSource::Channel(kind) => {
            let (prep, _) = circuit_prepare(kind)?;
            let k = kind.num_qubits();
            if m < k {
                return Err(Error::InvalidValue {
                    key: "path".into(),
                    reason: format!("{kind} needs at least {k} path nodes, got {m}"),
                });
            }
            let place = |q: usize| if k == 1 { 0 } else { q * (m - 1) / (k - 1) };
            prep.iter().map(|g| remap(g, place)).collect()
        }
    };
    for _ in 0..max_steps {
        gates.extend((1..m).map(|i| Gate::cnot(i - 1, i)));
    }
    Ok(gates)
}

fn remap(g: &Gate, f: impl Fn(usize) -> usize) -> Gate {
    match *g {
        Gate::H { target } => Gate::h(f(target)),
        Gate::X { target } => Gate::x(f(target)),
        Gate::Z { target } => Gate::z(f(target)),
        Gate::Ry { target, theta } => Gate::ry(f(target), theta),
        Gate::Cnot { control, target } => Gate::cnot(f(control), f(target)),
        Gate::Ch { control, target } => Gate::ch(f(control), f(target)),
        Gate::Ccnot { control1, control2, target } => Gate::ccnot(f(control1), f(control2), f(target)),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WalkResult {
    pub path: Path,
    pub steps: usize,
    pub shots: u64,
    pub histogram: BTreeMap<String, u64>,
    /// Born probabilities of every nonzero outcome, when the register is small enough.
    pub exact: Option<BTreeMap<String, f64>>,
}

pub fn run_walk<R: Rng + ?Sized>(
    path: &Path,
    steps: usize,
    shots: u64,
    source: WalkSource,
    rng: &mut R,
) -> Result<WalkResult> {
    if shots == 0 {
        return Err(Error::InvalidValue { key: "shots".into(), reason: "must be positive".into() });
    }
    let gates = build_walk_circuit(path, steps, source)?;
    let state = StateVector::new(path.nodes.len())?.apply_all(&gates)?;
    let exact = (state.num_qubits() <= EXACT_WALK_QUBITS).then(|| {
        state
            .probabilities()
            .iter()
            .enumerate()
            .filter(|(_, p)| **p > 0.0)
            .map(|(i, p)| (state.bitstring(i), *p))
            .collect()
    });
    let histogram = state.sample_all(shots, rng);
    Ok(WalkResult { path: path.clone(), steps, shots, histogram, exact })
}

/// SVG of the graph with the forward path in red and the backward path in green.
pub fn render_svg(g: &NetworkGraph, paths: Option<&BidirectionalPaths>) -> String {
    let (w, h) = (800.0, 600.0);
    let pad = 20.0;
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for n in &g.nodes {
        x0 = x0.min(n.x);
        x1 = x1.max(n.x);
        y0 = y0.min(n.y);
        y1 = y1.max(n.y);
    }
    let sx = (w - 2.0 * pad) / (x1 - x0).max(1e-9);
    let sy = (h - 2.0 * pad) / (y1 - y0).max(1e-9);
    let scale = sx.min(sy);
    let pt = |n: usize| (pad + (g.nodes[n].x - x0) * scale, pad + (g.nodes[n].y - y0) * scale);
    let mut out = String::new();
    let _ = writeln!(out, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#);
    let _ = writeln!(out, r##"<rect width="100%" height="100%" fill="#ffffff"/>"##);
    for e in &g.edges {
        let ((ax, ay), (bx, by)) = (pt(e.u), pt(e.v));
        let _ = writeln!(
            out,
            r##"<line x1="{ax:.2}" y1="{ay:.2}" x2="{bx:.2}" y2="{by:.2}" stroke="#bbbbbb" stroke-width="1"/>"##
        );
    }
    if let Some(p) = paths {
        for (path, colour, offset) in [(&p.forward, "#d62728", -2.0), (&p.backward, "#2ca02c", 2.0)] {
            for win in path.nodes.windows(2) {
                let ((ax, ay), (bx, by)) = (pt(win[0]), pt(win[1]));
                let _ = writeln!(
                    out,
                    r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="{colour}" stroke-width="3"/>"#,
                    ax + offset,
                    ay + offset,
                    bx + offset,
                    by + offset
                );
            }
        }
    }
    for n in &g.nodes {
        let (x, y) = pt(n.id);
        let _ = writeln!(out, r##"<circle cx="{x:.2}" cy="{y:.2}" r="5" fill="#1f77b4"/>"##);
        let _ = writeln!(out, r#"<text x="{:.2}" y="{:.2}" font-size="10">{}</text>"#, x + 6.0, y - 6.0, n.id);
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn triangle() -> NetworkGraph {
        let nodes = (0..3).map(|id| Node { id, x: id as f64, y: 0.0, memory_capacity: 5 }).collect();
        let mut g = NetworkGraph::new(nodes).unwrap();
        g.add_edge(0, 1, 1.0, 1.0).unwrap();
        g.add_edge(1, 2, 1.0, 1.0).unwrap();
        g.add_edge(0, 2, 3.0, 1.0).unwrap();
        g
    }

    #[test]
    fn triangle_shortest_path() {
        let g = triangle();
        let p = dijkstra(&g, 0, 2, &edge_weights(&g)).unwrap();
        assert_eq!(p.nodes, vec![0, 1, 2]);
        assert_eq!(p.total_cost, 2.0);
        assert_eq!(p.hop_count, 2);
    }

    #[test]
    fn trivial_path() {
        let g = triangle();
        let p = dijkstra(&g, 1, 1, &edge_weights(&g)).unwrap();
        assert_eq!(p, Path::single(1));
    }

    #[test]
    fn unreachable_reported() {
        let nodes = (0..3).map(|id| Node { id, x: 0.0, y: id as f64, memory_capacity: 1 }).collect();
        let mut g = NetworkGraph::new(nodes).unwrap();
        g.add_edge(0, 1, 1.0, 1.0).unwrap();
        let w = edge_weights(&g);
        assert_eq!(dijkstra(&g, 0, 2, &w), Err(Error::Unreachable { source_node: 0, target: 2 }));
        assert!(matches!(dijkstra(&g, 0, 7, &w), Err(Error::UnknownNode(7))));
    }

    #[test]
    fn equal_cost_ties_prefer_smaller_ids() {
        // Square 0-1-3 and 0-2-3 with equal weights.
        let nodes = (0..4).map(|id| Node { id, x: 0.0, y: id as f64, memory_capacity: 1 }).collect();
        let mut g = NetworkGraph::new(nodes).unwrap();
        for (u, v) in [(0, 2), (2, 3), (0, 1), (1, 3)] {
            g.add_edge(u, v, 1.0, 1.0).unwrap();
        }
        assert_eq!(dijkstra(&g, 0, 3, &edge_weights(&g)).unwrap().nodes, vec![0, 1, 3]);
    }

    #[test]
    fn frontier_min_example() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..20 {
            let (i, st) = durr_hoyer_min(&[5.0, 2.0, 8.0], &mut rng).unwrap();
            assert!(st.oracle_queries > 0);
            if st.found_minimum {
                assert_eq!(i, 1);
            }
        }
        let (i, st) = durr_hoyer_min(&[4.0], &mut rng).unwrap();
        assert_eq!((i, st.oracle_queries), (0, 0));
        assert!(durr_hoyer_min(&vec![0.0; FRONTIER_GUARD + 1], &mut rng).is_err());
    }

    #[test]
    fn durr_hoyer_usually_succeeds() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut hits = 0;
        for _ in 0..200 {
            let vals: Vec<f64> = (0..37).map(|_| rng.gen()).collect();
            hits += durr_hoyer_min(&vals, &mut rng).unwrap().1.found_minimum as u32;
        }
        assert!(hits >= 180, "{hits}");
    }

    #[test]
    fn line_graph_bidirectional() {
        let g = NetworkGraph::line(3, 10.0, 4).unwrap();
        let p = find_paths_bidirectional(&g, 0, 2, &edge_weights(&g), &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
        assert_eq!(p.forward.nodes, vec![0, 1, 2]);
        assert_eq!(p.backward.nodes, vec![2, 1, 0]);
    }

    #[test]
    fn mcdm_examples() {
        let e = Edge { u: 0, v: 1, length_km: 100.0, weight: 1.0, fidelity: 0.9 };
        let c = |w: (f64, f64, f64), f: f64| mcdm_cost(&e, f, 100.0, &McdmWeights::new(w.0, w.1, w.2).unwrap()).unwrap();
        assert_eq!(c((1.0, 0.0, 0.0), 1.0), 1.0);
        assert!((c((0.5, 0.5, 0.0), 1.0) - 0.55).abs() < 1e-12);
        let perfect = Edge { fidelity: 1.0, ..e };
        let w = McdmWeights::new(0.0, 1.0, 0.0).unwrap();
        assert_eq!(mcdm_cost(&perfect, 1.0, 100.0, &w).unwrap(), 0.0);
        assert!(McdmWeights::new(0.5, 0.6, 0.0).is_err());
        assert!(McdmWeights::new(1.5, -0.5, 0.0).is_err());
    }

    #[test]
    fn waxman_probability_examples() {
        assert_eq!(waxman_edge_probability(0.0, 100.0, 0.9, 0.01), 0.9);
        let far = waxman_edge_probability(100.0, 100.0, 0.9, 0.01);
        assert!((far - 0.9 * (-100.0f64).exp()).abs() < 1e-300);
    }

    #[test]
    fn waxman_graph_invariants() {
        let p = WaxmanParams { num_nodes: 60, ..Default::default() };
        let g = waxman_generate(&p, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        assert_eq!(g.num_nodes(), 60);
        for e in &g.edges {
            assert!(e.u != e.v);
            let d = distance(&g.nodes[e.u], &g.nodes[e.v]);
            assert!((e.length_km - d).abs() < 1e-9);
            assert!((1.0..=10.0).contains(&e.weight));
        }
        let back = NetworkGraph::from_json(&g.to_json().unwrap()).unwrap();
        assert_eq!(back, g);
        assert!(waxman_generate(&WaxmanParams { num_nodes: 1, ..p }, &mut ChaCha8Rng::seed_from_u64(3)).is_err());
    }

    #[test]
    fn graph_json_rejects_wrong_length() {
        let s = r#"{"nodes":[{"id":0,"x":0,"y":0,"mem":1},{"id":1,"x":3,"y":4,"mem":1}],
                    "edges":[{"u":0,"v":1,"length_km":6,"weight":1,"fidelity":1}]}"#;
        assert!(NetworkGraph::from_json(s).is_err());
        let ok = s.replace("\"length_km\":6,", "");
        assert_eq!(NetworkGraph::from_json(&ok).unwrap().edges[0].length_km, 5.0);
    }

    #[test]
    fn walk_deterministic_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let two = Path { nodes: vec![0, 1], total_cost: 1.0, hop_count: 1 };
        let r = run_walk(&two, 1, 50, WalkSource::One, &mut rng).unwrap();
        assert_eq!(r.histogram, BTreeMap::from([("11".to_string(), 50)]));
        let three = Path { nodes: vec![0, 1, 2], total_cost: 2.0, hop_count: 2 };
        let r = run_walk(&three, 1, 10, WalkSource::One, &mut rng).unwrap();
        assert_eq!(r.histogram, BTreeMap::from([("111".to_string(), 10)]));
        let r = run_walk(&three, 3, 10, WalkSource::Zero, &mut rng).unwrap();
        assert_eq!(r.histogram, BTreeMap::from([("000".to_string(), 10)]));
        assert!(run_walk(&three, 1, 0, WalkSource::Zero, &mut rng).is_err());
    }

    #[test]
    fn walk_guard() {
        let long = Path { nodes: (0..25).collect(), total_cost: 0.0, hop_count: 24 };
        assert!(matches!(build_walk_circuit(&long, 1, WalkSource::One), Err(Error::ResourceGuard(_))));
    }

    #[test]
    fn svg_marks_both_paths() {
        let g = NetworkGraph::line(3, 10.0, 4).unwrap();
        let p = find_paths_bidirectional(&g, 0, 2, &edge_weights(&g), &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
        let svg = render_svg(&g, Some(&p));
        assert!(svg.contains("#d62728") && svg.contains("#2ca02c"));
    }
}
