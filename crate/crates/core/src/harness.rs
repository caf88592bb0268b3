//! Scenario execution: single runs and protocol × sink × seed matrices.

use std::fs;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::config::ScenarioConfig;
use crate::error::{Result, SimError};
use crate::metrics::{self, History, RunSummary};
use crate::network::{self, Heterogeneity, NetworkState};
use crate::protocol::{self, Engine, ProtocolKind, SimRng};
use crate::sink::{SinkMode, SinkState};

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Seed of the per-run random stream. Depends only on the scenario seed,
/// protocol and sink mode, never on scheduling.
pub fn stream_seed(seed: u64, protocol: ProtocolKind, mode: SinkMode) -> u64 {
    let tag = ((protocol as u64) << 8) | mode as u64;
    splitmix64(splitmix64(seed) ^ splitmix64(tag.wrapping_add(0x5eed)))
}

/// One run in progress. Deployment depends only on the scenario seed, so
/// every protocol sees the same node positions for a given seed.
pub struct Simulation {
    pub network: NetworkState,
    pub sink: SinkState,
    pub history: History,
    engine: Box<dyn Engine>,
    rng: SimRng,
    config: ScenarioConfig,
}

impl Simulation {
    pub fn new(config: &ScenarioConfig, protocol: ProtocolKind, mode: SinkMode, seed: u64) -> Result<Self> {
        config.validate()?;
        let het = if protocol.is_heterogeneous() {
            config.protocol.heterogeneity
        } else {
            Heterogeneity::HOMOGENEOUS
        };
        let network = network::deploy(config.node_count, config.field_m, config.initial_energy_j, het, seed)?;
        let sink = SinkState::new(mode, config.field_m, config.sink_step_m, config.sink_pause_rounds)?;
        let engine = protocol::build_engine(protocol, &config.protocol, &config.energy, &network)?;
        Ok(Simulation {
            network,
            sink,
            history: History::with_capacity(config.rounds as usize),
            engine,
            rng: SimRng::seed_from_u64(stream_seed(seed, protocol, mode)),
            config: config.clone(),
        })
    }

    pub fn step(&mut self) -> Result<()> {
        let metrics = protocol::run_round(
            self.engine.as_mut(),
            &mut self.network,
            &self.sink,
            &self.config.energy,
            &self.config.protocol,
            &mut self.rng,
        )?;
        self.history.record(metrics)
    }

    pub fn run_to_end(&mut self) -> Result<()> {
        while self.history.len() < self.config.rounds as usize {
            self.step()?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub history: History,
    pub summary: RunSummary,
    /// Final network state, kept for cross-checks.
    pub network: NetworkState,
}

/// Deploy, then `rounds` × {sense, setup, steady state, record}, then
/// summarize. Rounds after the last death are recorded with no activity.
pub fn run_scenario(config: &ScenarioConfig, protocol: ProtocolKind, mode: SinkMode, seed: u64) -> Result<RunOutcome> {
    let mut sim = Simulation::new(config, protocol, mode, seed)?;
    sim.run_to_end()?;
    let mut summary = metrics::summarize(&sim.history, protocol, mode, seed)?;
    summary.config_fingerprint = config.fingerprint();
    Ok(RunOutcome {
        history: sim.history,
        summary,
        network: sim.network,
    })
}

/// Runs every combination, possibly in parallel, and returns outcomes in
/// lexicographic `(protocol, mode, seed)` order.
pub fn run_matrix(
    config: &ScenarioConfig,
    protocols: &[ProtocolKind],
    modes: &[SinkMode],
    seeds: &[u64],
) -> Result<Vec<RunOutcome>> {
    if protocols.is_empty() || modes.is_empty() || seeds.is_empty() {
        return Err(SimError::invalid(
            "matrix needs at least one protocol, sink mode and seed",
        ));
    }
    let mut plan = Vec::new();
    for &p in protocols {
        for &m in modes {
            for &s in seeds {
                plan.push((p, m, s));
            }
        }
    }
    plan.sort_by(|a, b| (a.0.name(), a.1.name(), a.2).cmp(&(b.0.name(), b.1.name(), b.2)));
    plan.dedup();

    #[cfg(feature = "parallel")]
    let iter = plan.par_iter();
    #[cfg(not(feature = "parallel"))]
    let iter = plan.iter();
    iter.map(|&(p, m, s)| {
        run_scenario(config, p, m, s).map_err(|e| SimError::invalid(format!("run {p}/{m}/seed {s} failed: {e}")))
    })
    .collect()
}

pub fn csv_file_name(summary: &RunSummary) -> String {
    format!("{}_{}_seed{}.csv", summary.protocol, summary.sink_mode, summary.seed)
}

pub const SUMMARY_FILE: &str = "summary.json";

/// Writes one CSV per run plus `summary.json`, in the given order.
pub fn write_outputs(outcomes: &[RunOutcome], dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| SimError::io(dir, e))?;
    let mut written = Vec::with_capacity(outcomes.len() + 1);
    for o in outcomes {
        let path = dir.join(csv_file_name(&o.summary));
        metrics::write_csv(&o.history, &path)?;
        written.push(path);
    }
    let summaries: Vec<RunSummary> = outcomes.iter().map(|o| o.summary.clone()).collect();
    let path = dir.join(SUMMARY_FILE);
    metrics::write_summary(&summaries, &path)?;
    written.push(path);
    Ok(written)
}

/// Relative gap between energy drawn from batteries and energy recorded in
/// the per-round metrics.
pub fn conservation_error(outcome: &RunOutcome) -> f64 {
    let drawn = outcome.network.e_total - outcome.network.residual_total();
    let recorded = outcome.history.total_energy();
    (drawn - recorded).abs() / drawn.abs().max(f64::MIN_POSITIVE)
}
