//! CAMP-TEEN: timer-based head claims over a neighbourhood table.
//!
//! Every alive node starts a timer `K/E − α` (`E` = residual/initial energy,
//! `α ~ U[0,1)`). Timers expire in ascending order; a node whose timer fires
//! while no head is in its neighbourhood claims the head role and cancels its
//! neighbours' timers.

use rand::Rng;

use super::{Engine, ProtocolConfig, ProtocolKind, RoundPlan, SimRng};
use crate::error::Result;
use crate::network::{NetworkState, NodeId};

/// Timer value, or `None` for a node with no energy left.
pub fn campteen_timer(e_norm: f64, k_const: f64, alpha: f64) -> Option<f64> {
    if e_norm <= 0.0 {
        return None;
    }
    Some(k_const / e_norm - alpha)
}

/// Neighbours of every node within `comm_range` (inclusive), ascending.
pub fn neighbor_table(network: &NetworkState, comm_range: f64) -> Vec<Vec<NodeId>> {
    let r2 = comm_range * comm_range;
    let n = network.len();
    let mut table = vec![Vec::new(); n];
    for i in 0..n {
        for j in (i + 1)..n {
            if network.nodes[i].position.distance_sq(&network.nodes[j].position) <= r2 {
                table[i].push(j);
                table[j].push(i);
            }
        }
    }
    table
}

/// Draws one `α` per alive node in id order and returns the elected heads
/// sorted by id.
pub fn campteen_elect_chs<R: Rng + ?Sized>(
    network: &NetworkState,
    config: &ProtocolConfig,
    neighbors: &[Vec<NodeId>],
    rng: &mut R,
) -> Vec<NodeId> {
    let mut timers: Vec<(f64, NodeId)> = Vec::new();
    for node in network.nodes.iter().filter(|n| n.alive) {
        let alpha: f64 = rng.random();
        if let Some(t) = campteen_timer(node.normalized_energy(), config.timer_k, alpha) {
            timers.push((t, node.id));
        }
    }
    timers.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

    let mut cancelled = vec![false; network.len()];
    let mut heads = Vec::new();
    for (_, id) in timers {
        if cancelled[id] {
            continue;
        }
        heads.push(id);
        for &nb in &neighbors[id] {
            cancelled[nb] = true;
        }
    }
    heads.sort_unstable();
    heads
}

#[derive(Debug, Clone)]
pub struct CampTeenEngine {
    config: ProtocolConfig,
    neighbors: Vec<Vec<NodeId>>,
}

impl CampTeenEngine {
    /// Builds the neighbourhood table once; nodes do not move.
    pub fn new(network: &NetworkState, config: &ProtocolConfig) -> Self {
        CampTeenEngine {
            config: *config,
            neighbors: neighbor_table(network, config.comm_range),
        }
    }
}

impl Engine for CampTeenEngine {
    fn kind(&self) -> ProtocolKind {
        ProtocolKind::Campteen
    }

    fn setup(&mut self, network: &NetworkState, rng: &mut SimRng) -> Result<RoundPlan> {
        let heads = campteen_elect_chs(network, &self.config, &self.neighbors, rng);
        RoundPlan::flat(network, heads)
    }
}
