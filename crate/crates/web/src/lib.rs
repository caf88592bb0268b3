//! Browser bindings for the simulator.
//!
//! Each exported function returns a JSON string consumed by `www/app.js`.
//! The `*_json` functions hold the logic and are plain Rust so they can be
//! tested off the browser.

use serde::Serialize;
use wasm_bindgen::prelude::*;
use wsnsim_core::harness::{run_scenario, Simulation};
use wsnsim_core::network::Role;
use wsnsim_core::{ProtocolKind, RunOutcome, RunSummary, ScenarioConfig, SinkMode};

const MAX_POINTS: usize = 500;

#[derive(Serialize)]
struct Curves {
    protocol: &'static str,
    rounds: Vec<u32>,
    alive: Vec<u32>,
    throughput: Vec<u64>,
    summary: RunSummary,
}

#[derive(Serialize)]
struct NodeView {
    x: f64,
    y: f64,
    alive: bool,
    head: bool,
    energy: f64,
    cluster_of: Option<usize>,
}

#[derive(Serialize)]
struct Snapshot {
    round: u32,
    field: f64,
    sink: (f64, f64),
    nodes: Vec<NodeView>,
}

fn scenario(nodes: u32, rounds: u32) -> Result<ScenarioConfig, String> {
    let mut config = ScenarioConfig {
        rounds,
        ..Default::default()
    };
    config.set("nodes", &nodes.to_string()).map_err(|e| e.to_string())?;
    config.validate().map_err(|e| e.to_string())?;
    Ok(config)
}

fn parse<T: std::str::FromStr>(s: &str) -> Result<T, String>
where
    T::Err: std::fmt::Display,
{
    s.parse::<T>().map_err(|e| e.to_string())
}

fn curves(o: &RunOutcome) -> Curves {
    let rows = o.history.rounds();
    let stride = rows.len().div_ceil(MAX_POINTS).max(1);
    let mut c = Curves {
        protocol: o.summary.protocol.name(),
        rounds: Vec::new(),
        alive: Vec::new(),
        throughput: Vec::new(),
        summary: o.summary.clone(),
    };
    for (i, r) in rows.iter().enumerate() {
        if i % stride == 0 || i + 1 == rows.len() {
            c.rounds.push(r.round);
            c.alive.push(r.alive);
            c.throughput.push(r.cumulative_packets_to_bs);
        }
    }
    c
}

/// Alive-node and cumulative-throughput curves for every protocol under
/// one sink mode.
pub fn compare_json(sink: &str, nodes: u32, rounds: u32, seed: u64) -> Result<String, String> {
    let config = scenario(nodes, rounds)?;
    let mode: SinkMode = parse(sink)?;
    let all = ProtocolKind::ALL
        .into_iter()
        .map(|p| run_scenario(&config, p, mode, seed).map(|o| curves(&o)))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| e.to_string())?;
    serde_json::to_string(&all).map_err(|e| e.to_string())
}

/// Field state after `round` rounds: positions, heads, membership, sink.
pub fn snapshot_json(protocol: &str, sink: &str, nodes: u32, round: u32, seed: u64) -> Result<String, String> {
    let config = scenario(nodes, round.max(1))?;
    let mut sim = Simulation::new(&config, parse(protocol)?, parse(sink)?, seed).map_err(|e| e.to_string())?;
    for _ in 0..round {
        sim.step().map_err(|e| e.to_string())?;
    }
    let shown = round.saturating_sub(1);
    let p = sim.sink.position(shown);
    let snap = Snapshot {
        round: shown,
        field: config.field_m,
        sink: (p.x, p.y),
        nodes: sim
            .network
            .nodes
            .iter()
            .map(|n| NodeView {
                x: n.position.x,
                y: n.position.y,
                alive: n.alive,
                head: round > 0 && n.role == Role::ClusterHead,
                energy: n.residual_energy / n.initial_energy,
                cluster_of: n.cluster_of,
            })
            .collect(),
    };
    serde_json::to_string(&snap).map_err(|e| e.to_string())
}

/// Sink position for each of the first `rounds` rounds.
pub fn sink_path_json(sink: &str, rounds: u32) -> Result<String, String> {
    let config = ScenarioConfig::default();
    let state = wsnsim_core::SinkState::new(
        parse(sink)?,
        config.field_m,
        config.sink_step_m,
        config.sink_pause_rounds,
    )
    .map_err(|e| e.to_string())?;
    let path: Vec<(f64, f64)> = (0..rounds).map(|r| state.position(r)).map(|p| (p.x, p.y)).collect();
    serde_json::to_string(&path).map_err(|e| e.to_string())
}

fn js(r: Result<String, String>) -> Result<String, JsError> {
    r.map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn compare(sink: &str, nodes: u32, rounds: u32, seed: u32) -> Result<String, JsError> {
    js(compare_json(sink, nodes, rounds, u64::from(seed)))
}

#[wasm_bindgen]
pub fn snapshot(protocol: &str, sink: &str, nodes: u32, round: u32, seed: u32) -> Result<String, JsError> {
    js(snapshot_json(protocol, sink, nodes, round, u64::from(seed)))
}

#[wasm_bindgen(js_name = sinkPath)]
pub fn sink_path(sink: &str, rounds: u32) -> Result<String, JsError> {
    js(sink_path_json(sink, rounds))
}
