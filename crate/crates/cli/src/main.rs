//! `qteleroute`: teleportation protocols, routing, walks and network sweeps.
//!
//! Exit codes: 0 success, 1 protocol failure, 2 usage or configuration
//! error, 3 unreachable target, 4 resource guard exceeded.

use std::f64::consts::PI;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use qteleroute::channels::{verify_channel, ChannelKind};
use qteleroute::config::{parse_config, CliConfig, PAPER_CFG, SMOKE_CFG};
use qteleroute::netsim::{classical_route, sweep_nodes, MetricsRow, Mode, SimMetrics};
use qteleroute::protocol::{
    derive_correction_table, run_bqt, run_uqt, verify_printed_steps, Direction, ProtocolTrace,
};
use qteleroute::report::{bar_plot_svg, histogram_rows, line_plot_svg, metrics_csv, to_csv, ProtocolRow};
use qteleroute::routing::{
    dijkstra, edge_weights, find_paths_bidirectional, grover_min_dijkstra, mcdm_costs, render_svg, run_walk,
    waxman_generate, BidirectionalPaths, McdmWeights, NetworkGraph, Path, WalkSource, WaxmanParams, WeightInit,
};
use qteleroute::{Error, Result};

#[derive(Parser)]
#[command(name = "qteleroute", version, about = "Bidirectional teleportation, routing and network simulation")]
struct Cli {
    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    /// Output directory (QTELEROUTE_OUT takes precedence).
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Derive the correction table and run teleportation trials.
    Protocol(ProtocolArgs),
    /// Check a channel against its closed form and gate preparation.
    Channel {
        #[arg(long, value_parser = parse_channel)]
        channel: ChannelKind,
    },
    /// Forward and backward routes on a Waxman or JSON graph.
    Route(RouteArgs),
    /// CNOT-chain walk along a path.
    Walk(WalkArgs),
    /// Network simulation sweep from a config file or bundled preset.
    Simulate(SimulateArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum CliMode {
    Uni,
    Bi,
}

#[derive(Args)]
struct ProtocolArgs {
    #[arg(long, value_parser = parse_channel)]
    channel: ChannelKind,
    /// Alice's payload angle; random per trial when omitted.
    #[arg(long, allow_hyphen_values = true)]
    theta_a: Option<f64>,
    /// Bob's payload angle; random per trial when omitted.
    #[arg(long, allow_hyphen_values = true)]
    theta_b: Option<f64>,
    #[arg(long, default_value_t = 1)]
    trials: usize,
    #[arg(long, value_enum, default_value = "bi")]
    mode: CliMode,
    /// Trials whose full state snapshots are written.
    #[arg(long, default_value_t = 1)]
    trace_limit: usize,
}

#[derive(Args)]
struct RouteArgs {
    /// Graph JSON; a seeded Waxman graph is generated when omitted.
    #[arg(long)]
    graph: Option<PathBuf>,
    #[arg(long, default_value_t = 10)]
    nodes: usize,
    #[arg(long, default_value_t = 0.9)]
    delta: f64,
    /// Waxman length scale; the default gives a connected-looking demo graph.
    #[arg(long, default_value_t = 0.4)]
    epsilon: f64,
    #[arg(long, default_value_t = 2000.0)]
    width: f64,
    #[arg(long, default_value_t = 4000.0)]
    height: f64,
    #[arg(long, default_value_t = 0)]
    source: usize,
    /// Defaults to the last node.
    #[arg(long)]
    target: Option<usize>,
    /// MCDM weights `distance,fidelity,memory`; raw edge weights when omitted.
    #[arg(long)]
    mcdm: Option<String>,
}

#[derive(Args)]
struct WalkArgs {
    /// Comma-separated node ids; `--nodes` builds `0,1,...` instead.
    #[arg(long)]
    path: Option<String>,
    #[arg(long, default_value_t = 3)]
    nodes: usize,
    #[arg(long, default_value_t = 1)]
    steps: usize,
    #[arg(long, default_value_t = 1024)]
    shots: u64,
    /// `zero`, `one` or a channel name.
    #[arg(long, default_value = "one")]
    source: String,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    /// Bundled preset used when no config file is given.
    #[arg(long, default_value = "smoke")]
    preset: String,
    /// Restrict to one mode.
    #[arg(long, value_enum)]
    mode: Option<CliMode>,
    /// Override node counts, comma separated.
    #[arg(long)]
    nodes: Option<String>,
    #[arg(long)]
    channel: Option<String>,
    /// Write per-run metrics as JSON.
    #[arg(long)]
    verbose: bool,
}

fn parse_channel(s: &str) -> std::result::Result<ChannelKind, String> {
    s.parse::<ChannelKind>().map_err(|e| e.to_string())
}

fn usage(key: &str, reason: impl Into<String>) -> Error {
    Error::InvalidValue { key: key.into(), reason: reason.into() }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) | Error::InvalidValue { .. } | Error::InvalidChannel(_) | Error::UnsupportedChannel(_) => 2,
        Error::Unreachable { .. } | Error::UnknownNode(_) => 3,
        Error::ResourceGuard(_) | Error::QubitCount(_) => 4,
        _ => 1,
    }
}

struct Out(PathBuf);

impl Out {
    fn new(dir: PathBuf) -> Result<Self> {
        fs::create_dir_all(&dir)?;
        Ok(Self(dir))
    }

    fn write(&self, name: &str, body: impl AsRef<[u8]>) -> Result<PathBuf> {
        let p = self.0.join(name);
        fs::write(&p, body)?;
        Ok(p)
    }

    fn json<T: Serialize>(&self, name: &str, v: &T) -> Result<PathBuf> {
        self.write(name, serde_json::to_string_pretty(v)? + "\n")
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let out_dir = std::env::var_os("QTELEROUTE_OUT").map(PathBuf::from).unwrap_or_else(|| cli.out.clone());
    let result = Out::new(out_dir).and_then(|out| match &cli.command {
        Command::Protocol(a) => cmd_protocol(a, cli.seed, &out),
        Command::Channel { channel } => cmd_channel(*channel, &out),
        Command::Route(a) => cmd_route(a, cli.seed, &out),
        Command::Walk(a) => cmd_walk(a, cli.seed, &out),
        Command::Simulate(a) => cmd_simulate(a, cli.seed, &out),
    });
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

#[derive(Serialize)]
struct TrialTrace<'a> {
    trial: usize,
    success: bool,
    trace: &'a ProtocolTrace,
}

fn cmd_protocol(a: &ProtocolArgs, seed: u64, out: &Out) -> Result<u8> {
    if a.trials == 0 {
        return Err(usage("trials", "must be positive"));
    }
    let direction = match a.mode {
        CliMode::Uni => Direction::Unidirectional,
        CliMode::Bi => Direction::Bidirectional,
    };
    let table = derive_correction_table(a.channel, direction)?;
    out.json("correction_table.json", &table)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::with_capacity(a.trials);
    let mut traces = Vec::new();
    let mut failures = 0;
    for trial in 0..a.trials {
        let ta = a.theta_a.unwrap_or_else(|| rng.gen_range(0.0..2.0 * PI));
        let tb = a.theta_b.unwrap_or_else(|| rng.gen_range(0.0..2.0 * PI));
        let r = match direction {
            Direction::Bidirectional => run_bqt(a.channel, ta, tb, &table, &mut rng)?,
            Direction::Unidirectional => run_uqt(a.channel, ta, &table, &mut rng)?,
        };
        if !r.success {
            failures += 1;
            eprintln!(
                "trial {trial}: fidelity A->B {} B->A {} below threshold",
                r.trace.fidelity_a_to_b, r.trace.fidelity_b_to_a
            );
        }
        rows.push(ProtocolRow::new(trial, &r.trace, r.success));
        if trial < a.trace_limit {
            traces.push((trial, r.success, r.trace));
        }
    }
    out.write("protocol_summary.csv", to_csv(&rows)?)?;
    let traces: Vec<TrialTrace> =
        traces.iter().map(|(trial, success, trace)| TrialTrace { trial: *trial, success: *success, trace }).collect();
    out.json("protocol_traces.json", &traces)?;
    println!("{}: {}/{} trials recovered both states", a.channel, a.trials - failures, a.trials);
    Ok(if failures == 0 { 0 } else { 1 })
}

#[derive(Serialize)]
struct ChannelOutput {
    report: qteleroute::channels::ChannelReport,
    printed_steps: Option<Vec<qteleroute::protocol::StepDeviation>>,
}

fn cmd_channel(kind: ChannelKind, out: &Out) -> Result<u8> {
    let report = verify_channel(kind)?;
    let printed_steps = verify_printed_steps(kind).ok();
    println!(
        "{}: closed-form deviation {:.3e}, printed norm {:.6}, circuit fidelity {}",
        report.channel,
        report.max_amplitude_error,
        report.printed_norm,
        report.circuit_fidelity.map_or("n/a".into(), |f| format!("{f:.6}"))
    );
    out.json("channel_report.json", &ChannelOutput { report, printed_steps })?;
    Ok(0)
}

#[derive(Serialize)]
struct RouteReport<'a> {
    source: usize,
    target: usize,
    paths: &'a BidirectionalPaths,
    classical_cost: f64,
    grover_cost: f64,
    equivalent: bool,
    costs_symmetric: bool,
}

fn parse_mcdm(s: &str) -> Result<McdmWeights> {
    let v: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|_| usage("mcdm", format!("cannot parse {s:?}"))))
        .collect::<Result<_>>()?;
    match v.as_slice() {
        [d, f, m] => McdmWeights::new(*d, *f, *m),
        _ => Err(usage("mcdm", "expected three weights")),
    }
}

fn cmd_route(a: &RouteArgs, seed: u64, out: &Out) -> Result<u8> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let graph = match &a.graph {
        Some(p) => NetworkGraph::from_json(&fs::read_to_string(p)?).map_err(|e| usage("graph", e.to_string()))?,
        None => {
            let params = WaxmanParams {
                num_nodes: a.nodes,
                area: (a.width, a.height),
                delta: a.delta,
                epsilon: a.epsilon,
                weights: WeightInit::Uniform { low: 1.0, high: 10.0 },
                ..WaxmanParams::default()
            };
            waxman_generate(&params, &mut rng)?
        }
    };
    out.write("graph.json", graph.to_json()? + "\n")?;
    let s = a.source;
    let t = a.target.unwrap_or(graph.num_nodes().saturating_sub(1));
    let costs = match &a.mcdm {
        Some(m) => mcdm_costs(&graph, &vec![0; graph.num_nodes()], &parse_mcdm(m)?)?,
        None => edge_weights(&graph),
    };
    let classical = dijkstra(&graph, s, t, &costs);
    let paths = match classical {
        Err(e @ Error::Unreachable { .. }) => {
            out.json("route_report.json", &serde_json::json!({"source": s, "target": t, "reachable": false}))?;
            out.write("route.svg", render_svg(&graph, None))?;
            return Err(e);
        }
        Err(e) => return Err(e),
        Ok(_) if s == t => {
            let (p, stats) = grover_min_dijkstra(&graph, s, t, &costs, &mut rng)?;
            BidirectionalPaths { forward: p.clone(), backward: p, forward_stats: stats.clone(), backward_stats: stats }
        }
        Ok(_) => find_paths_bidirectional(&graph, s, t, &costs, &mut rng)?,
    };
    let classical = dijkstra(&graph, s, t, &costs)?;
    let report = RouteReport {
        source: s,
        target: t,
        paths: &paths,
        classical_cost: classical.total_cost,
        grover_cost: paths.forward.total_cost,
        equivalent: classical.total_cost == paths.forward.total_cost,
        costs_symmetric: (paths.forward.total_cost - paths.backward.total_cost).abs() <= 1e-12,
    };
    out.json("forward_path.json", &paths.forward)?;
    out.json("backward_path.json", &paths.backward)?;
    out.json("route_report.json", &report)?;
    out.write("route.svg", render_svg(&graph, Some(&paths)))?;
    println!(
        "forward {:?} cost {:.6}; backward {:?} cost {:.6}; matches classical: {}",
        paths.forward.nodes, paths.forward.total_cost, paths.backward.nodes, paths.backward.total_cost, report.equivalent
    );
    Ok(0)
}

fn cmd_walk(a: &WalkArgs, seed: u64, out: &Out) -> Result<u8> {
    if a.shots == 0 {
        return Err(usage("shots", "must be positive"));
    }
    let nodes: Vec<usize> = match &a.path {
        Some(p) => p
            .split(',')
            .map(|x| x.trim().parse().map_err(|_| usage("path", format!("cannot parse {p:?}"))))
            .collect::<Result<_>>()?,
        None => (0..a.nodes).collect(),
    };
    if nodes.is_empty() {
        return Err(usage("path", "empty path"));
    }
    let source = match a.source.as_str() {
        "zero" | "0" => WalkSource::Zero,
        "one" | "1" => WalkSource::One,
        other => WalkSource::Channel(other.parse()?),
    };
    let hop_count = nodes.len() - 1;
    let path = Path { nodes, total_cost: hop_count as f64, hop_count };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let w = run_walk(&path, a.steps, a.shots, source, &mut rng)?;
    let rows = histogram_rows(&w);
    out.write("walk_histogram.csv", to_csv(&rows)?)?;
    let bars: Vec<(String, f64)> =
        rows.iter().map(|r| (r.bitstring.clone(), r.count as f64 / a.shots as f64)).collect();
    let markers: Option<Vec<f64>> = rows.iter().map(|r| r.exact).collect();
    out.write("walk.svg", bar_plot_svg("Walk outcome distribution", "probability", &bars, markers.as_deref()))?;
    println!("{} outcomes over {} shots", w.histogram.len(), a.shots);
    Ok(0)
}

fn load_config(a: &SimulateArgs) -> Result<CliConfig> {
    let text = match &a.config {
        Some(p) => fs::read_to_string(p).map_err(|e| Error::Config(format!("{}: {e}", p.display())))?,
        None => match a.preset.as_str() {
            "paper" => PAPER_CFG.to_string(),
            "smoke" => SMOKE_CFG.to_string(),
            other => return Err(Error::Config(format!("unknown preset {other:?}"))),
        },
    };
    let mut cfg = parse_config(&text)?;
    if let Some(n) = &a.nodes {
        cfg.node_counts = n
            .split(',')
            .map(|x| x.trim().parse().map_err(|_| usage("nodes", format!("cannot parse {n:?}"))))
            .collect::<Result<_>>()?;
    }
    if let Some(m) = a.mode {
        cfg.modes = vec![match m {
            CliMode::Uni => Mode::Unidirectional,
            CliMode::Bi => Mode::Bidirectional,
        }];
    }
    if let Some(c) = &a.channel {
        cfg.sim.channel = c.parse()?;
    }
    Ok(cfg)
}

fn series(metrics: &[SimMetrics], pick: impl Fn(&SimMetrics) -> f64) -> Vec<(String, Vec<(f64, f64)>)> {
    let mut modes: Vec<Mode> = metrics.iter().map(|m| m.mode).collect();
    modes.sort();
    modes.dedup();
    modes
        .into_iter()
        .map(|mode| {
            let pts = metrics.iter().filter(|m| m.mode == mode).map(|m| (m.node_count as f64, pick(m))).collect();
            (mode.label().to_string(), pts)
        })
        .collect()
}

type MetricPick = fn(&SimMetrics) -> f64;

fn cmd_simulate(a: &SimulateArgs, seed: u64, out: &Out) -> Result<u8> {
    let mut cfg = load_config(a)?;
    if a.config.is_none() {
        cfg.sim.seed = seed;
    }
    let metrics = sweep_nodes(&cfg.sim, &cfg.node_counts, &cfg.modes, &classical_route)?;
    let rows: Vec<MetricsRow> = metrics.iter().map(MetricsRow::from).collect();
    out.write("metrics.csv", metrics_csv(&rows)?)?;
    let plots: [(&str, &str, MetricPick); 3] = [
        ("throughput.svg", "throughput (qubits/s)", |m| m.throughput.mean),
        ("fidelity.svg", "end-to-end fidelity", |m| m.fidelity.mean),
        ("memory.svg", "memory utilization", |m| m.memory_utilization.mean),
    ];
    for (file, label, pick) in plots {
        let title = format!("{label} vs node count ({})", cfg.sim.channel);
        out.write(file, line_plot_svg(&title, "nodes", label, &series(&metrics, pick)))?;
    }
    if a.verbose {
        out.json("runs.json", &metrics)?;
    }
    for r in &rows {
        println!(
            "{:>4} nodes {:<14} throughput {:>10.2} ± {:<8.2} fidelity {:.4} memory {:.3}",
            r.node_count,
            r.mode.label(),
            r.throughput_mean,
            r.throughput_ci,
            r.fidelity_mean,
            r.memutil_mean
        );
    }
    Ok(0)
}
