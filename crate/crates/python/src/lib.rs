//! Python bindings. Rich results cross the boundary as plain dicts and lists.

use num_complex::Complex64;
use pyo3::exceptions::{PyLookupError, PyMemoryError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use qteleroute::channels::{make_channel, verify_channel, ChannelKind};
use qteleroute::config::{parse_config, PAPER_CFG, SMOKE_CFG};
use qteleroute::netsim::{self, classical_route, sweep_nodes, MetricsRow, Mode};
use qteleroute::protocol::{derive_correction_table, run_bqt, run_uqt, Direction};
use qteleroute::routing::{self, WalkSource, WaxmanParams, WeightInit};
use qteleroute::statevec::{self, Gate};
use qteleroute::Error;

fn py_err(e: Error) -> PyErr {
    let msg = e.to_string();
    match e {
        Error::Config(_) | Error::InvalidValue { .. } | Error::InvalidChannel(_) | Error::UnsupportedChannel(_) => {
            PyValueError::new_err(msg)
        }
        Error::Unreachable { .. } | Error::UnknownNode(_) => PyLookupError::new_err(msg),
        Error::ResourceGuard(_) | Error::QubitCount(_) => PyMemoryError::new_err(msg),
        _ => PyRuntimeError::new_err(msg),
    }
}

trait OrPy<T> {
    fn py(self) -> PyResult<T>;
}

impl<T> OrPy<T> for qteleroute::Result<T> {
    fn py(self) -> PyResult<T> {
        self.map_err(py_err)
    }
}

fn to_py<'py, T: Serialize>(py: Python<'py>, v: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(v).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

fn channel(name: &str) -> PyResult<ChannelKind> {
    name.parse().py()
}

fn rng(seed: Option<u64>) -> ChaCha8Rng {
    match seed {
        Some(s) => ChaCha8Rng::seed_from_u64(s),
        None => ChaCha8Rng::from_entropy(),
    }
}

/// Dense state vector; qubit 0 is the most significant bit.
#[pyclass(module = "qteleroute_py", from_py_object)]
#[derive(Clone)]
pub struct StateVector(statevec::StateVector);

#[pymethods]
impl StateVector {
    #[new]
    fn new(num_qubits: usize) -> PyResult<Self> {
        statevec::StateVector::new(num_qubits).py().map(Self)
    }

    #[staticmethod]
    fn basis(bits: &str) -> PyResult<Self> {
        statevec::StateVector::basis(bits).py().map(Self)
    }

    /// Normalizes the given amplitudes.
    #[staticmethod]
    fn from_amplitudes(amplitudes: Vec<Complex64>) -> PyResult<Self> {
        statevec::StateVector::from_amplitudes(amplitudes).py().map(Self)
    }

    /// Ideal state of a named channel such as `"wbell"`.
    #[staticmethod]
    fn channel(name: &str) -> PyResult<Self> {
        Ok(Self(make_channel(channel(name)?).py()?.state))
    }

    #[getter]
    fn num_qubits(&self) -> usize {
        self.0.num_qubits()
    }

    fn norm(&self) -> f64 {
        self.0.norm()
    }

    fn amplitudes(&self) -> Vec<Complex64> {
        self.0.amplitudes().to_vec()
    }

    fn probabilities(&self) -> Vec<f64> {
        self.0.probabilities()
    }

    fn prob_one(&self, qubit: usize) -> PyResult<f64> {
        self.0.prob_one(qubit).py()
    }

    /// Applies `h`, `x`, `z`, `ry`, `cnot`, `ch` or `ccnot`, returning a new state.
    #[pyo3(signature = (name, *qubits, theta=None))]
    fn apply(&self, name: &str, qubits: Vec<usize>, theta: Option<f64>) -> PyResult<Self> {
        let gate = match (name.to_ascii_lowercase().as_str(), qubits.as_slice(), theta) {
            ("h", &[t], None) => Gate::h(t),
            ("x", &[t], None) => Gate::x(t),
            ("z", &[t], None) => Gate::z(t),
            ("ry", &[t], Some(a)) => Gate::ry(t, a),
            ("cnot", &[c, t], None) => Gate::cnot(c, t),
            ("ch", &[c, t], None) => Gate::ch(c, t),
            ("ccnot", &[a, b, t], None) => Gate::ccnot(a, b, t),
            _ => return Err(PyValueError::new_err(format!("bad gate {name} on {qubits:?} (theta {theta:?})"))),
        };
        self.0.apply(&gate).py().map(Self)
    }

    fn fidelity(&self, other: &StateVector) -> PyResult<f64> {
        statevec::StateVector::fidelity(&self.0, &other.0).py()
    }

    #[pyo3(signature = (shots, seed=None))]
    fn sample(&self, shots: u64, seed: Option<u64>) -> std::collections::BTreeMap<String, u64> {
        self.0.sample_all(shots, &mut rng(seed))
    }

    fn __repr__(&self) -> String {
        format!("StateVector(num_qubits={})", self.0.num_qubits())
    }
}

#[pyclass(module = "qteleroute_py", get_all, from_py_object)]
#[derive(Clone)]
pub struct Path {
    nodes: Vec<usize>,
    total_cost: f64,
    hop_count: usize,
}

impl From<routing::Path> for Path {
    fn from(p: routing::Path) -> Self {
        Self { nodes: p.nodes, total_cost: p.total_cost, hop_count: p.hop_count }
    }
}

#[pymethods]
impl Path {
    fn __repr__(&self) -> String {
        format!("Path(nodes={:?}, total_cost={}, hop_count={})", self.nodes, self.total_cost, self.hop_count)
    }
}

/// Undirected network of quantum nodes with weighted, lossy links.
#[pyclass(module = "qteleroute_py")]
pub struct Graph(routing::NetworkGraph);

#[pymethods]
impl Graph {
    #[staticmethod]
    #[pyo3(signature = (nodes, width=2000.0, height=4000.0, delta=0.9, epsilon=0.01, seed=None, by_length=false))]
    fn waxman(
        nodes: usize,
        width: f64,
        height: f64,
        delta: f64,
        epsilon: f64,
        seed: Option<u64>,
        by_length: bool,
    ) -> PyResult<Self> {
        let mut p = WaxmanParams { num_nodes: nodes, area: (width, height), delta, epsilon, ..WaxmanParams::default() };
        if by_length {
            p.weights = WeightInit::Length;
        }
        routing::waxman_generate(&p, &mut rng(seed)).py().map(Self)
    }

    #[staticmethod]
    #[pyo3(signature = (n, spacing=1.0, memory=50))]
    fn line(n: usize, spacing: f64, memory: u32) -> PyResult<Self> {
        routing::NetworkGraph::line(n, spacing, memory).py().map(Self)
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        routing::NetworkGraph::from_json(text).py().map(Self)
    }

    fn to_json(&self) -> PyResult<String> {
        self.0.to_json().py()
    }

    #[getter]
    fn num_nodes(&self) -> usize {
        self.0.num_nodes()
    }

    #[getter]
    fn num_edges(&self) -> usize {
        self.0.edges.len()
    }

    fn edges<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &self.0.edges)
    }

    fn dijkstra(&self, source: usize, target: usize) -> PyResult<Path> {
        let costs = routing::edge_weights(&self.0);
        routing::dijkstra(&self.0, source, target, &costs).py().map(Path::from)
    }

    /// Dijkstra with simulated Grover minimum finding; returns the path and query statistics.
    #[pyo3(signature = (source, target, seed=None))]
    fn grover_dijkstra<'py>(
        &self,
        py: Python<'py>,
        source: usize,
        target: usize,
        seed: Option<u64>,
    ) -> PyResult<(Path, Bound<'py, PyAny>)> {
        let costs = routing::edge_weights(&self.0);
        let (p, stats) = routing::grover_min_dijkstra(&self.0, source, target, &costs, &mut rng(seed)).py()?;
        Ok((p.into(), to_py(py, &stats)?))
    }

    /// Forward and backward paths for a bidirectional exchange.
    #[pyo3(signature = (source, target, seed=None))]
    fn route(&self, source: usize, target: usize, seed: Option<u64>) -> PyResult<(Path, Path)> {
        let costs = routing::edge_weights(&self.0);
        let b = routing::find_paths_bidirectional(&self.0, source, target, &costs, &mut rng(seed)).py()?;
        Ok((b.forward.into(), b.backward.into()))
    }

    #[pyo3(signature = (source=None, target=None, seed=None))]
    fn svg(&self, source: Option<usize>, target: Option<usize>, seed: Option<u64>) -> PyResult<String> {
        let paths = match (source, target) {
            (Some(s), Some(t)) => {
                let costs = routing::edge_weights(&self.0);
                Some(routing::find_paths_bidirectional(&self.0, s, t, &costs, &mut rng(seed)).py()?)
            }
            _ => None,
        };
        Ok(routing::render_svg(&self.0, paths.as_ref()))
    }

    fn __repr__(&self) -> String {
        format!("Graph(num_nodes={}, num_edges={})", self.0.num_nodes(), self.0.edges.len())
    }
}

#[pyfunction]
fn channel_report<'py>(py: Python<'py>, name: &str) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &verify_channel(channel(name)?).py()?)
}

#[pyfunction]
#[pyo3(signature = (name, bidirectional=true))]
fn correction_table<'py>(py: Python<'py>, name: &str, bidirectional: bool) -> PyResult<Bound<'py, PyAny>> {
    let dir = if bidirectional { Direction::Bidirectional } else { Direction::Unidirectional };
    to_py(py, &derive_correction_table(channel(name)?, dir).py()?)
}

/// One teleportation run. Omitting `theta_b` runs the one-way protocol.
#[pyfunction]
#[pyo3(signature = (name, theta_a=None, theta_b=None, bidirectional=true, seed=None))]
fn teleport<'py>(
    py: Python<'py>,
    name: &str,
    theta_a: Option<f64>,
    theta_b: Option<f64>,
    bidirectional: bool,
    seed: Option<u64>,
) -> PyResult<Bound<'py, PyAny>> {
    let ch = channel(name)?;
    let mut r = rng(seed);
    let ta = theta_a.unwrap_or_else(|| r.gen_range(0.0..std::f64::consts::PI));
    let result = if bidirectional {
        let tb = theta_b.unwrap_or_else(|| r.gen_range(0.0..std::f64::consts::PI));
        let table = derive_correction_table(ch, Direction::Bidirectional).py()?;
        run_bqt(ch, ta, tb, &table, &mut r).py()?
    } else {
        let table = derive_correction_table(ch, Direction::Unidirectional).py()?;
        run_uqt(ch, ta, &table, &mut r).py()?
    };
    let out = to_py(py, &result.trace)?;
    out.set_item("success", result.success)?;
    Ok(out)
}

/// Quantum walk along `path`; `source` is `"zero"`, `"one"` or a channel name.
#[pyfunction]
#[pyo3(signature = (path, steps=None, shots=1024, source="zero", seed=None))]
fn walk<'py>(
    py: Python<'py>,
    path: Vec<usize>,
    steps: Option<usize>,
    shots: u64,
    source: &str,
    seed: Option<u64>,
) -> PyResult<Bound<'py, PyAny>> {
    let src = match source {
        "zero" => WalkSource::Zero,
        "one" => WalkSource::One,
        other => WalkSource::Channel(channel(other)?),
    };
    let hops = path.len().saturating_sub(1);
    let p = routing::Path { nodes: path, total_cost: hops as f64, hop_count: hops };
    let steps = steps.unwrap_or(hops);
    to_py(py, &routing::run_walk(&p, steps, shots, src, &mut rng(seed)).py()?)
}

/// Runs a simulation sweep and returns one metrics row per (node count, mode).
///
/// `config` is the text of a config file; otherwise `preset` names a built-in one.
#[pyfunction]
#[pyo3(signature = (config=None, preset="smoke", node_counts=None, modes=None, runs=None, seed=None))]
fn simulate<'py>(
    py: Python<'py>,
    config: Option<&str>,
    preset: &str,
    node_counts: Option<Vec<usize>>,
    modes: Option<Vec<String>>,
    runs: Option<usize>,
    seed: Option<u64>,
) -> PyResult<Bound<'py, PyAny>> {
    let text = match (config, preset) {
        (Some(t), _) => t,
        (None, "smoke") => SMOKE_CFG,
        (None, "paper") => PAPER_CFG,
        (None, other) => return Err(PyValueError::new_err(format!("unknown preset {other}"))),
    };
    let mut cfg = parse_config(text).py()?;
    if let Some(n) = node_counts {
        cfg.node_counts = n;
    }
    if let Some(m) = modes {
        cfg.modes = m.iter().map(|s| Mode::parse(s)).collect::<qteleroute::Result<_>>().py()?;
    }
    if let Some(r) = runs {
        cfg.sim.runs = r;
    }
    if let Some(s) = seed {
        cfg.sim.seed = s;
    }
    let metrics = py.detach(|| sweep_nodes(&cfg.sim, &cfg.node_counts, &cfg.modes, &classical_route)).py()?;
    let rows: Vec<MetricsRow> = metrics.iter().map(MetricsRow::from).collect();
    to_py(py, &rows)
}

#[pyfunction]
fn chain_fidelity(link_fidelity: f64, hops: usize) -> f64 {
    netsim::chain_fidelity(link_fidelity, hops)
}

#[pymodule]
pub fn qteleroute_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<StateVector>()?;
    m.add_class::<Path>()?;
    m.add_class::<Graph>()?;
    m.add_function(wrap_pyfunction!(channel_report, m)?)?;
    m.add_function(wrap_pyfunction!(correction_table, m)?)?;
    m.add_function(wrap_pyfunction!(teleport, m)?)?;
    m.add_function(wrap_pyfunction!(walk, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(chain_fidelity, m)?)?;
    m.add("MAX_QUBITS", statevec::MAX_QUBITS)?;
    Ok(())
}
