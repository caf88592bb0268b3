//! Clustering protocols.
//!
//! Every protocol implements [`Engine`], which only covers the setup phase:
//! electing heads and wiring members and heads into a forwarding plan. The
//! steady state in [`run_round`] is shared, so all five protocols charge
//! energy the same way and every joule flows through
//! [`NetworkState::consume`].

mod campteen;
mod deec;
mod hteen;
mod leach;
mod teen;

use std::fmt;
use std::str::FromStr;

use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::energy::{self, EnergyParams};
use crate::error::{Result, SimError};
use crate::metrics::RoundMetrics;
use crate::network::{self, Heterogeneity, NetworkState, NodeId, Role};
use crate::sink::{collection_distance, SinkState};

pub use campteen::{campteen_elect_chs, campteen_timer, neighbor_table, CampTeenEngine};
pub use deec::{deec_average_energy, deec_elect_chs, deec_lifetime_estimate, deec_p_i, DeecEngine};
pub use hteen::{hteen_build_hierarchy, Hierarchy, HteenEngine};
pub use leach::{leach_elect_chs, leach_threshold, LeachEngine};
pub use teen::teen_should_transmit;

/// Random stream used by a single run.
pub type SimRng = ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProtocolKind {
    Leach,
    Teen,
    Deec,
    Hteen,
    Campteen,
}

impl ProtocolKind {
    pub const ALL: [ProtocolKind; 5] = [
        ProtocolKind::Leach,
        ProtocolKind::Teen,
        ProtocolKind::Deec,
        ProtocolKind::Hteen,
        ProtocolKind::Campteen,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ProtocolKind::Leach => "leach",
            ProtocolKind::Teen => "teen",
            ProtocolKind::Deec => "deec",
            ProtocolKind::Hteen => "hteen",
            ProtocolKind::Campteen => "campteen",
        }
    }

    /// Threshold-gated protocols of the TEEN family.
    pub fn is_reactive(self) -> bool {
        matches!(self, ProtocolKind::Teen | ProtocolKind::Hteen | ProtocolKind::Campteen)
    }

    /// Only DEEC deploys a heterogeneous population.
    pub fn is_heterogeneous(self) -> bool {
        self == ProtocolKind::Deec
    }
}

impl fmt::Display for ProtocolKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ProtocolKind {
    type Err = SimError;

    fn from_str(s: &str) -> Result<Self> {
        let key: String = s
            .trim()
            .chars()
            .filter(|c| *c != '-' && *c != '_')
            .collect::<String>()
            .to_ascii_lowercase();
        ProtocolKind::ALL
            .into_iter()
            .find(|p| p.name() == key)
            .ok_or_else(|| SimError::config("protocol", format!("unknown protocol `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProtocolConfig {
    /// Target fraction of heads per round.
    pub p_opt: f64,
    pub hard_threshold: f64,
    pub soft_threshold: f64,
    /// Number of head tiers in H-TEEN; 1 is plain TEEN.
    pub hierarchy_layers: u32,
    /// Per-tier head fraction in H-TEEN.
    pub layer_p: f64,
    /// Timer constant of CAMP-TEEN.
    pub timer_k: f64,
    /// Neighbourhood radius of CAMP-TEEN, metres.
    pub comm_range: f64,
    pub heterogeneity: Heterogeneity,
}

impl Default for ProtocolConfig {
    fn default() -> Self {
        ProtocolConfig {
            p_opt: 0.1,
            hard_threshold: 100.0,
            soft_threshold: 2.0,
            hierarchy_layers: 3,
            layer_p: 0.1,
            timer_k: 1.0,
            comm_range: 25.0,
            heterogeneity: Heterogeneity::default(),
        }
    }
}

impl ProtocolConfig {
    pub fn validate(&self) -> Result<()> {
        let fraction = |key: &str, v: f64| {
            if v.is_finite() && v > 0.0 && v <= 1.0 {
                Ok(())
            } else {
                Err(SimError::config(key, format!("must lie in (0, 1], got {v}")))
            }
        };
        fraction("p_opt", self.p_opt)?;
        fraction("layer_p", self.layer_p)?;
        if !(self.hard_threshold.is_finite() && self.hard_threshold >= 0.0) {
            return Err(SimError::config("hard_threshold", "must be >= 0"));
        }
        if !(self.soft_threshold.is_finite() && self.soft_threshold >= 0.0) {
            return Err(SimError::config("soft_threshold", "must be >= 0"));
        }
        if self.hierarchy_layers == 0 {
            return Err(SimError::config("layers", "must be >= 1"));
        }
        if !(self.timer_k.is_finite() && self.timer_k > 0.0) {
            return Err(SimError::config("timer_k", "must be > 0"));
        }
        if !(self.comm_range.is_finite() && self.comm_range > 0.0) {
            return Err(SimError::config("comm_range", "must be > 0"));
        }
        self.heterogeneity
            .validate()
            .map_err(|e| SimError::config("heterogeneity", e.to_string()))
    }
}

/// Epoch length `⌈1/p⌉` in rounds.
pub fn epoch_length(p: f64) -> u32 {
    ((1.0 / p) - 1e-9).ceil().max(1.0) as u32
}

/// Eligibility set `G`: a node elected head stays out until the next epoch.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EpochTracker {
    eligible: Vec<bool>,
    epoch_length: u32,
}

impl EpochTracker {
    pub fn new(nodes: usize, p: f64) -> Self {
        EpochTracker {
            eligible: vec![true; nodes],
            epoch_length: epoch_length(p),
        }
    }

    pub fn epoch_length(&self) -> u32 {
        self.epoch_length
    }

    /// Refills `G` at every epoch boundary.
    pub fn start_round(&mut self, round: u32) {
        if round.is_multiple_of(self.epoch_length) {
            self.eligible.fill(true);
        }
    }

    pub fn is_eligible(&self, id: NodeId) -> bool {
        self.eligible[id]
    }

    pub fn set_eligible(&mut self, id: NodeId, eligible: bool) {
        self.eligible[id] = eligible;
    }

    pub fn eligible_count(&self) -> usize {
        self.eligible.iter().filter(|e| **e).count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NextHop {
    Sink,
    Head(NodeId),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Head {
    pub id: NodeId,
    /// Highest hierarchy tier the node serves in; 0 for flat protocols.
    pub level: u32,
    pub next_hop: NextHop,
}

/// Result of the setup phase.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoundPlan {
    /// Heads sorted by `(level, id)`, so every head forwards after its
    /// children have reported.
    pub heads: Vec<Head>,
    /// Head of each alive non-head node, indexed by node id.
    pub member_of: Vec<Option<NodeId>>,
}

impl RoundPlan {
    /// Flat plan: every head reports to the sink, members join the nearest head.
    pub fn flat(network: &NetworkState, mut ch_ids: Vec<NodeId>) -> Result<Self> {
        ch_ids.sort_unstable();
        let member_of = network::assign_clusters(network, &ch_ids)?;
        let heads = ch_ids
            .into_iter()
            .map(|id| Head {
                id,
                level: 0,
                next_hop: NextHop::Sink,
            })
            .collect();
        Ok(RoundPlan { heads, member_of })
    }

    pub fn head_ids(&self) -> Vec<NodeId> {
        self.heads.iter().map(|h| h.id).collect()
    }
}

/// Setup phase of one clustering protocol.
pub trait Engine: Send {
    fn kind(&self) -> ProtocolKind;

    /// Elects heads for `network.round` and forms clusters. Engines read the
    /// network but never charge energy.
    fn setup(&mut self, network: &NetworkState, rng: &mut SimRng) -> Result<RoundPlan>;
}

pub fn build_engine(
    kind: ProtocolKind,
    config: &ProtocolConfig,
    params: &EnergyParams,
    network: &NetworkState,
) -> Result<Box<dyn Engine>> {
    config.validate()?;
    let n = network.len();
    Ok(match kind {
        ProtocolKind::Leach => Box::new(LeachEngine::new(ProtocolKind::Leach, n, config.p_opt)),
        ProtocolKind::Teen => Box::new(LeachEngine::new(ProtocolKind::Teen, n, config.p_opt)),
        ProtocolKind::Deec => Box::new(DeecEngine::new(config, params, network)?),
        ProtocolKind::Hteen => Box::new(HteenEngine::new(n, config.layer_p, config.hierarchy_layers)),
        ProtocolKind::Campteen => Box::new(CampTeenEngine::new(network, config)),
    })
}

/// TEEN gate on the node's current reading; records the value when it fires.
fn gate(network: &mut NetworkState, id: NodeId, config: &ProtocolConfig) -> bool {
    let node = &mut network.nodes[id];
    let fire = teen_should_transmit(
        node.sensed_value,
        node.last_transmitted_value,
        config.hard_threshold,
        config.soft_threshold,
    );
    if fire {
        node.last_transmitted_value = Some(node.sensed_value);
    }
    fire
}

/// Executes one full round: sensing, setup, steady state.
///
/// Random draws happen in a fixed order: one sensing draw per alive node in
/// id order, then whatever the engine's election consumes.
pub fn run_round(
    engine: &mut dyn Engine,
    network: &mut NetworkState,
    sink: &SinkState,
    params: &EnergyParams,
    config: &ProtocolConfig,
    rng: &mut SimRng,
) -> Result<RoundMetrics> {
    let round = network.round;
    let consumed_before = network.consumed;
    let bits = params.packet_bits;
    let reactive = engine.kind().is_reactive();

    network::sense_environment(network, rng);
    let plan = engine.setup(network, rng)?;

    for node in network.nodes.iter_mut() {
        node.role = Role::Member;
        node.cluster_of = plan.member_of[node.id];
    }
    for head in &plan.heads {
        let node = &mut network.nodes[head.id];
        node.role = Role::ClusterHead;
        node.rounds_as_ch += 1;
    }

    let rx = energy::rx_energy(params, bits)?;
    let mut received = vec![0u64; network.len()];
    let mut packets_to_ch = 0u64;
    let mut packets_to_bs = 0u64;

    for id in 0..network.len() {
        let Some(ch) = plan.member_of[id] else { continue };
        if !network.nodes[id].alive {
            continue;
        }
        if reactive && !gate(network, id, config) {
            continue;
        }
        let tx = energy::tx_energy(params, bits, network.distance(id, ch))?;
        if !network.consume(id, tx)?.completed || !network.nodes[ch].alive {
            continue;
        }
        if network.consume(ch, rx)?.completed {
            received[ch] += 1;
            packets_to_ch += 1;
        }
    }

    for head in &plan.heads {
        let id = head.id;
        if !network.nodes[id].alive {
            continue;
        }
        let own = if !reactive || gate(network, id, config) { 1 } else { 0 };
        let signals = received[id] + own;
        if signals == 0 {
            continue;
        }
        let agg = energy::aggregation_energy(params, bits, signals)?;
        if !network.consume(id, agg)?.completed {
            continue;
        }
        match head.next_hop {
            NextHop::Sink => {
                let d = collection_distance(sink, network.nodes[id].position, round);
                if network.consume(id, energy::tx_energy(params, bits, d)?)?.completed {
                    packets_to_bs += 1;
                }
            }
            NextHop::Head(parent) => {
                let tx = energy::tx_energy(params, bits, network.distance(id, parent))?;
                if network.consume(id, tx)?.completed
                    && network.nodes[parent].alive
                    && network.consume(parent, rx)?.completed
                {
                    received[parent] += 1;
                    packets_to_ch += 1;
                }
            }
        }
    }

    network.round += 1;
    let alive = network.alive_count() as u32;
    Ok(RoundMetrics {
        round,
        alive,
        dead: network.len() as u32 - alive,
        ch_count: plan.heads.len() as u32,
        packets_to_ch,
        packets_to_bs,
        cumulative_packets_to_bs: 0,
        energy_consumed: network.consumed - consumed_before,
    })
}
