//! Hierarchical TEEN: heads of tier ℓ elect tier ℓ+1 heads among themselves
//! with the same rotating threshold, one eligibility set per tier.

use rand::Rng;

use super::{leach_elect_chs, leach_threshold, Engine, EpochTracker, Head, NextHop, ProtocolKind, RoundPlan, SimRng};
use crate::error::Result;
use crate::network::{self, NetworkState, NodeId};

/// Layered head forest for one round.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Hierarchy {
    /// `tiers[ℓ]` lists the heads serving tier ℓ, ascending. A node in tier
    /// ℓ+1 is also in tier ℓ.
    pub tiers: Vec<Vec<NodeId>>,
    /// Next hop of every head from its highest tier.
    pub heads: Vec<Head>,
}

impl Hierarchy {
    pub fn top_tier(&self) -> usize {
        self.tiers.len().saturating_sub(1)
    }
}

fn nearest(network: &NetworkState, from: NodeId, candidates: &[NodeId]) -> NodeId {
    let p = network.nodes[from].position;
    let mut best = candidates[0];
    let mut best_d = p.distance_sq(&network.nodes[best].position);
    for &c in &candidates[1..] {
        let d = p.distance_sq(&network.nodes[c].position);
        if d < best_d {
            best = c;
            best_d = d;
        }
    }
    best
}

/// Builds tiers above the already-elected tier-0 heads.
///
/// `upper` holds one tracker per tier above 0 and its length fixes the
/// number of tiers. When a tier elects nobody the tier below reports
/// straight to the sink. Non-promoted heads attach to the nearest head of
/// the next tier (lowest id on ties).
pub fn hteen_build_hierarchy<R: Rng + ?Sized>(
    network: &NetworkState,
    tier0: Vec<NodeId>,
    p_c: f64,
    upper: &mut [EpochTracker],
    rng: &mut R,
) -> Hierarchy {
    let round = network.round;
    let mut tiers = vec![{
        let mut t = tier0;
        t.sort_unstable();
        t
    }];
    for tracker in upper.iter_mut() {
        tracker.start_round(round);
        let below = tiers.last().expect("tier 0 present");
        if below.is_empty() {
            break;
        }
        let mut promoted = Vec::new();
        for &id in below {
            if !tracker.is_eligible(id) {
                continue;
            }
            let u: f64 = rng.random();
            if u < leach_threshold(p_c, round, true) {
                tracker.set_eligible(id, false);
                promoted.push(id);
            }
        }
        if promoted.is_empty() {
            break;
        }
        tiers.push(promoted);
    }

    let mut level = vec![None::<u32>; network.len()];
    for (l, tier) in tiers.iter().enumerate() {
        for &id in tier {
            level[id] = Some(l as u32);
        }
    }
    let top = tiers.len() - 1;
    let mut heads = Vec::new();
    for (l, tier) in tiers.iter().enumerate() {
        for &id in tier {
            if level[id] != Some(l as u32) {
                continue;
            }
            let next_hop = if l == top {
                NextHop::Sink
            } else {
                NextHop::Head(nearest(network, id, &tiers[l + 1]))
            };
            heads.push(Head {
                id,
                level: l as u32,
                next_hop,
            });
        }
    }
    Hierarchy { tiers, heads }
}

#[derive(Debug, Clone)]
pub struct HteenEngine {
    p_c: f64,
    base: EpochTracker,
    upper: Vec<EpochTracker>,
}

impl HteenEngine {
    /// `layers` counts head tiers; `layers = 1` is plain TEEN.
    pub fn new(nodes: usize, p_c: f64, layers: u32) -> Self {
        let extra = layers.saturating_sub(1) as usize;
        HteenEngine {
            p_c,
            base: EpochTracker::new(nodes, p_c),
            upper: (0..extra).map(|_| EpochTracker::new(nodes, p_c)).collect(),
        }
    }
}

impl Engine for HteenEngine {
    fn kind(&self) -> ProtocolKind {
        ProtocolKind::Hteen
    }

    fn setup(&mut self, network: &NetworkState, rng: &mut SimRng) -> Result<RoundPlan> {
        let tier0 = leach_elect_chs(network, self.p_c, &mut self.base, rng);
        let hierarchy = hteen_build_hierarchy(network, tier0, self.p_c, &mut self.upper, rng);
        let member_of = network::assign_clusters(network, &hierarchy.tiers[0])?;
        Ok(RoundPlan {
            heads: hierarchy.heads,
            member_of,
        })
    }
}
