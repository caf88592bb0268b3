use rand::Rng;

use super::{epoch_length, Engine, EpochTracker, ProtocolKind, RoundPlan, SimRng};
use crate::error::Result;
use crate::network::{NetworkState, NodeId};

/// Rotating election threshold `p / (1 − p·(r mod ⌈1/p⌉))` for nodes in `G`,
/// zero otherwise.
pub fn leach_threshold(p: f64, round: u32, in_g: bool) -> f64 {
    if !in_g {
        return 0.0;
    }
    let phase = (round % epoch_length(p)) as f64;
    let denom = 1.0 - p * phase;
    if denom <= 0.0 {
        return 1.0;
    }
    (p / denom).clamp(0.0, 1.0)
}

/// Draws one uniform per alive eligible node, in id order. Elected nodes
/// leave `G` until the tracker's next epoch.
pub fn leach_elect_chs<R: Rng + ?Sized>(
    network: &NetworkState,
    p: f64,
    tracker: &mut EpochTracker,
    rng: &mut R,
) -> Vec<NodeId> {
    let round = network.round;
    tracker.start_round(round);
    let mut heads = Vec::new();
    for node in network.nodes.iter().filter(|n| n.alive) {
        if !tracker.is_eligible(node.id) {
            continue;
        }
        let u: f64 = rng.random();
        if u < leach_threshold(p, round, true) {
            tracker.set_eligible(node.id, false);
            heads.push(node.id);
        }
    }
    heads
}

/// LEACH, and TEEN which shares its election.
#[derive(Debug, Clone)]
pub struct LeachEngine {
    kind: ProtocolKind,
    p: f64,
    tracker: EpochTracker,
}

impl LeachEngine {
    pub fn new(kind: ProtocolKind, nodes: usize, p: f64) -> Self {
        LeachEngine {
            kind,
            p,
            tracker: EpochTracker::new(nodes, p),
        }
    }

    pub fn tracker(&self) -> &EpochTracker {
        &self.tracker
    }
}

impl Engine for LeachEngine {
    fn kind(&self) -> ProtocolKind {
        self.kind
    }

    fn setup(&mut self, network: &NetworkState, rng: &mut SimRng) -> Result<RoundPlan> {
        let heads = leach_elect_chs(network, self.p, &mut self.tracker, rng);
        RoundPlan::flat(network, heads)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{deploy, Heterogeneity};
    use rand::SeedableRng;

    #[test]
    fn threshold_examples() {
        assert!((leach_threshold(0.1, 0, true) - 0.1).abs() < 1e-15);
        assert_eq!(leach_threshold(0.1, 9, true), 1.0);
        assert_eq!(leach_threshold(0.1, 19, true), 1.0);
        for r in [0, 3, 9, 1234] {
            assert_eq!(leach_threshold(0.1, r, false), 0.0);
            assert_eq!(leach_threshold(0.37, r, false), 0.0);
        }
        // r mod 10 = 5 → 0.1 / 0.5
        assert!((leach_threshold(0.1, 25, true) - 0.2).abs() < 1e-12);
    }

    #[test]
    fn threshold_stays_a_probability() {
        for p in [0.05, 0.1, 0.15, 0.3, 0.7, 1.0] {
            for r in 0..50 {
                let t = leach_threshold(p, r, true);
                assert!((0.0..=1.0).contains(&t), "p={p} r={r} t={t}");
            }
            assert_eq!(leach_threshold(p, epoch_length(p) - 1, true), 1.0);
        }
    }

    #[test]
    fn epoch_end_elects_everyone_left() {
        let mut net = deploy(100, 100.0, 0.5, Heterogeneity::HOMOGENEOUS, 5).unwrap();
        let mut tracker = EpochTracker::new(100, 0.1);
        let mut rng = SimRng::seed_from_u64(3);
        net.round = 9;
        for id in 0..50 {
            tracker.set_eligible(id, false);
        }
        let heads = leach_elect_chs(&net, 0.1, &mut tracker, &mut rng);
        assert_eq!(heads, (50..100).collect::<Vec<_>>());
        assert_eq!(tracker.eligible_count(), 0);
    }

    #[test]
    fn empty_g_elects_nobody() {
        let mut net = deploy(20, 100.0, 0.5, Heterogeneity::HOMOGENEOUS, 5).unwrap();
        let mut tracker = EpochTracker::new(20, 0.1);
        for id in 0..20 {
            tracker.set_eligible(id, false);
        }
        net.round = 4;
        let mut rng = SimRng::seed_from_u64(3);
        assert!(leach_elect_chs(&net, 0.1, &mut tracker, &mut rng).is_empty());
    }

    #[test]
    fn every_node_once_per_epoch() {
        let mut net = deploy(100, 100.0, 0.5, Heterogeneity::HOMOGENEOUS, 8).unwrap();
        for seed in 0..20 {
            let mut tracker = EpochTracker::new(100, 0.1);
            let mut rng = SimRng::seed_from_u64(seed);
            let mut times = vec![0u32; 100];
            for r in 0..10 {
                net.round = r;
                for h in leach_elect_chs(&net, 0.1, &mut tracker, &mut rng) {
                    times[h] += 1;
                }
            }
            assert!(times.iter().all(|&t| t == 1), "seed {seed}: {times:?}");
        }
    }

    #[test]
    fn dead_nodes_are_skipped() {
        let mut net = deploy(10, 100.0, 0.5, Heterogeneity::HOMOGENEOUS, 1).unwrap();
        net.nodes[2].alive = false;
        net.round = 9;
        let mut tracker = EpochTracker::new(10, 0.1);
        let mut rng = SimRng::seed_from_u64(0);
        let heads = leach_elect_chs(&net, 0.1, &mut tracker, &mut rng);
        assert!(!heads.contains(&2));
        assert_eq!(heads.len(), 9);
    }
}
