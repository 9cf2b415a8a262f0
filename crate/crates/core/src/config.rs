//! Flat `key = value` configuration for simulation sweeps.
//!
//! Blank lines and `#` comments are ignored. Every key in [`SCHEMA`] marked
//! required must appear exactly once; unknown keys are rejected. All
//! problems are collected and reported together.

use std::collections::BTreeMap;
use std::str::FromStr;

use crate::channels::ChannelKind;
use crate::error::{Error, Result};
use crate::netsim::{channel_preset, Mode, SimConfig, Topology};
use crate::routing::{McdmWeights, WaxmanParams, WeightInit};

pub const PAPER_CFG: &str = include_str!("../presets/paper.cfg");
pub const SMOKE_CFG: &str = include_str!("../presets/smoke.cfg");

pub struct KeySpec {
    pub key: &'static str,
    pub required: bool,
    pub help: &'static str,
}

const fn req(key: &'static str, help: &'static str) -> KeySpec {
    KeySpec { key, required: true, help }
}

const fn opt(key: &'static str, help: &'static str) -> KeySpec {
    KeySpec { key, required: false, help }
}

pub const SCHEMA: &[KeySpec] = &[
    req("seed", "base seed; run i uses seed + i"),
    req("runs", "runs per (node count, mode)"),
    req("channel", "wbell | ghzbell | clusterbell | bell"),
    req("modes", "comma list of unidirectional, bidirectional"),
    req("node_counts", "comma list of Waxman node counts"),
    req("area_width_km", "deployment rectangle width"),
    req("area_height_km", "deployment rectangle height"),
    req("waxman_delta", "edge probability scale in (0, 1]"),
    req("waxman_epsilon", "edge length scale relative to L"),
    req("weight_low", "lower bound of random edge weights"),
    req("weight_high", "upper bound of random edge weights"),
    req("num_sd_pairs", "source-destination pairs per run"),
    req("send_rate", "attempts per second per S-D pair"),
    req("classical_delay", "seconds per hop of classical signalling"),
    req("memory_per_node", "memory slots per node"),
    req("drop_rate", "loss probability per generated link pair"),
    req("swap_success", "success probability of each swap"),
    req("sim_duration", "simulated seconds per run"),
    opt("init_link_fidelity", "link Werner fidelity; channel preset by default"),
    opt("slots_per_endpoint", "memory slots per pair end; channel preset by default"),
    opt("mcdm_distance", "MCDM weight on normalized length"),
    opt("mcdm_fidelity", "MCDM weight on link infidelity"),
    opt("mcdm_memory", "MCDM weight on memory load"),
];

/// A parsed sweep: the per-run template plus the sweep axes.
#[derive(Debug, Clone, PartialEq)]
pub struct CliConfig {
    pub sim: SimConfig,
    pub node_counts: Vec<usize>,
    pub modes: Vec<Mode>,
}

fn parse_list<T: FromStr>(s: &str) -> std::result::Result<Vec<T>, String> {
    let items: std::result::Result<Vec<T>, _> = s.split(',').map(|p| p.trim().parse::<T>()).collect();
    match items {
        Ok(v) if !v.is_empty() => Ok(v),
        _ => Err(format!("expected a comma list, got {s:?}")),
    }
}

struct Fields {
    map: BTreeMap<String, String>,
    problems: Vec<String>,
}

impl Fields {
    fn get<T: FromStr>(&mut self, key: &str) -> Option<T> {
        let raw = self.map.get(key)?;
        match raw.parse::<T>() {
            Ok(v) => Some(v),
            Err(_) => {
                self.problems.push(format!("{key}: cannot parse {raw:?}"));
                None
            }
        }
    }

    fn with<T>(&mut self, key: &str, f: impl FnOnce(&str) -> std::result::Result<T, String>) -> Option<T> {
        let raw = self.map.get(key)?.clone();
        match f(&raw) {
            Ok(v) => Some(v),
            Err(e) => {
                self.problems.push(format!("{key}: {e}"));
                None
            }
        }
    }
}

pub fn parse_config(text: &str) -> Result<CliConfig> {
    let mut map = BTreeMap::new();
    let mut problems = Vec::new();
    for (no, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            problems.push(format!("line {}: expected key = value", no + 1));
            continue;
        };
        let (k, v) = (k.trim().to_string(), v.trim().to_string());
        if !SCHEMA.iter().any(|s| s.key == k) {
            problems.push(format!("{k}: unknown key"));
        } else if map.insert(k.clone(), v).is_some() {
            problems.push(format!("{k}: given more than once"));
        }
    }
    for s in SCHEMA.iter().filter(|s| s.required) {
        if !map.contains_key(s.key) {
            problems.push(format!("{}: missing required key", s.key));
        }
    }
    let mut f = Fields { map, problems };

    let seed = f.get::<u64>("seed");
    let runs = f.get::<usize>("runs");
    let channel = f.with("channel", |s| s.parse::<ChannelKind>().map_err(|e| e.to_string()));
    let modes = f.with("modes", |s| {
        s.split(',').map(|m| Mode::parse(m.trim()).map_err(|e| e.to_string())).collect::<std::result::Result<Vec<_>, _>>()
    });
    let node_counts = f.with("node_counts", parse_list::<usize>);
    let width = f.get::<f64>("area_width_km");
    let height = f.get::<f64>("area_height_km");
    let delta = f.get::<f64>("waxman_delta");
    let epsilon = f.get::<f64>("waxman_epsilon");
    let low = f.get::<f64>("weight_low");
    let high = f.get::<f64>("weight_high");
    let num_sd_pairs = f.get::<usize>("num_sd_pairs");
    let send_rate = f.get::<f64>("send_rate");
    let classical_delay = f.get::<f64>("classical_delay");
    let memory_per_node = f.get::<u32>("memory_per_node");
    let drop_rate = f.get::<f64>("drop_rate");
    let swap_success = f.get::<f64>("swap_success");
    let sim_duration = f.get::<f64>("sim_duration");
    let init_link_fidelity = f.get::<f64>("init_link_fidelity");
    let slots = f.get::<u32>("slots_per_endpoint");
    let mcdm_keys = ["mcdm_distance", "mcdm_fidelity", "mcdm_memory"];
    let mcdm_vals: Vec<Option<f64>> = mcdm_keys.iter().map(|k| f.get::<f64>(k)).collect();
    let present = mcdm_keys.iter().filter(|k| f.map.contains_key(**k)).count();
    if present != 0 && present != 3 {
        f.problems.push("mcdm_*: give all three weights or none".into());
    }

    if !f.problems.is_empty() {
        return Err(Error::Config(f.problems.join("; ")));
    }
    let channel = channel.expect("checked");
    let preset = channel_preset(channel);
    let mcdm = match mcdm_vals.as_slice() {
        [Some(d), Some(fi), Some(m)] => Some(McdmWeights { w_distance: *d, w_fidelity: *fi, w_memory: *m }),
        _ => None,
    };
    let node_counts = node_counts.expect("checked");
    let init_link_fidelity = init_link_fidelity.unwrap_or(preset.init_link_fidelity);
    let sim = SimConfig {
        topology: Topology::Waxman(WaxmanParams {
            num_nodes: node_counts[0],
            area: (width.expect("checked"), height.expect("checked")),
            delta: delta.expect("checked"),
            epsilon: epsilon.expect("checked"),
            memory_capacity: memory_per_node.expect("checked"),
            link_fidelity: init_link_fidelity,
            weights: WeightInit::Uniform { low: low.expect("checked"), high: high.expect("checked") },
        }),
        channel,
        num_sd_pairs: num_sd_pairs.expect("checked"),
        sd_pairs: None,
        send_rate: send_rate.expect("checked"),
        classical_delay: classical_delay.expect("checked"),
        memory_per_node: memory_per_node.expect("checked"),
        slots_per_endpoint: slots.unwrap_or(preset.slots_per_endpoint),
        drop_rate: drop_rate.expect("checked"),
        swap_success: swap_success.expect("checked"),
        init_link_fidelity,
        sim_duration: sim_duration.expect("checked"),
        mode: Mode::Unidirectional,
        mcdm,
        runs: runs.expect("checked"),
        seed: seed.expect("checked"),
    };
    let mut bad = Vec::new();
    for &n in &node_counts {
        let mut c = sim.clone();
        if let Topology::Waxman(p) = &mut c.topology {
            p.num_nodes = n;
        }
        if let Err(e) = c.validate() {
            bad.push(e.to_string());
        }
    }
    bad.dedup();
    if !bad.is_empty() {
        return Err(Error::Config(bad.join("; ")));
    }
    Ok(CliConfig { sim, node_counts, modes: modes.expect("checked") })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn paper_preset_parses() {
        let c = parse_config(PAPER_CFG).unwrap();
        assert_eq!(c.sim.runs, 1000);
        assert_eq!(c.sim.num_sd_pairs, 10);
        assert_eq!(c.sim.memory_per_node, 50);
        assert_eq!(c.sim.drop_rate, 0.03);
        assert_eq!(c.sim.swap_success, 0.98);
        assert_eq!(c.sim.send_rate, 1000.0);
        assert_eq!(c.sim.classical_delay, 0.05);
        assert_eq!(*c.node_counts.last().unwrap(), 200);
        assert_eq!(c.modes, vec![Mode::Unidirectional, Mode::Bidirectional]);
        let Topology::Waxman(p) = &c.sim.topology else { panic!() };
        assert_eq!((p.delta, p.epsilon, p.area), (0.90, 0.01, (2000.0, 4000.0)));
        parse_config(SMOKE_CFG).unwrap();
    }

    #[test]
    fn unknown_and_missing_keys_listed() {
        let text = PAPER_CFG.replace("drop_rate", "drop_rat").replace("seed =", "# seed =");
        let Err(Error::Config(msg)) = parse_config(&text) else { panic!() };
        assert!(msg.contains("drop_rat: unknown key"), "{msg}");
        assert!(msg.contains("drop_rate: missing"), "{msg}");
        assert!(msg.contains("seed: missing"), "{msg}");
    }

    #[test]
    fn bad_values_rejected() {
        let text = PAPER_CFG.replace("drop_rate = 0.03", "drop_rate = 1.5");
        assert!(parse_config(&text).is_err());
        let text = PAPER_CFG.replace("runs = 1000", "runs = many");
        assert!(parse_config(&text).is_err());
        let text = format!("{PAPER_CFG}\nmcdm_distance = 1\n");
        assert!(parse_config(&text).is_err());
        let text = format!("{PAPER_CFG}\nseed = 3\n");
        assert!(parse_config(&text).is_err());
    }

    #[test]
    fn optional_overrides() {
        let text = format!("{PAPER_CFG}\ninit_link_fidelity = 0.9\nmcdm_distance = 0.5\nmcdm_fidelity = 0.5\nmcdm_memory = 0\n");
        let c = parse_config(&text).unwrap();
        assert_eq!(c.sim.init_link_fidelity, 0.9);
        assert_eq!(c.sim.mcdm.unwrap().w_fidelity, 0.5);
    }
}
