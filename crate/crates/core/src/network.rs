//! Node deployment, energy bookkeeping and cluster membership.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};

pub type NodeId = usize;

/// Upper bound of the sensed attribute; readings are uniform on `[0, SENSED_MAX]`.
pub const SENSED_MAX: f64 = 200.0;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn distance_sq(&self, other: &Point) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        dx * dx + dy * dy
    }

    pub fn distance(&self, other: &Point) -> f64 {
        self.distance_sq(other).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TierKind {
    Normal,
    Advanced,
    Super,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NodeTier {
    pub kind: TierKind,
    /// Extra-energy multiplier `a_i`; a node starts with `E₀·(1 + a_i)`.
    pub extra: f64,
}

impl NodeTier {
    pub const NORMAL: NodeTier = NodeTier {
        kind: TierKind::Normal,
        extra: 0.0,
    };
}

/// Fractions and multipliers of the advanced and super tiers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Heterogeneity {
    /// Fraction of advanced nodes.
    pub m: f64,
    /// Extra-energy multiplier of advanced nodes.
    pub a: f64,
    /// Fraction of super nodes.
    pub m0: f64,
    /// Extra-energy multiplier of super nodes.
    pub b: f64,
}

impl Heterogeneity {
    pub const HOMOGENEOUS: Heterogeneity = Heterogeneity {
        m: 0.0,
        a: 0.0,
        m0: 0.0,
        b: 0.0,
    };

    pub fn validate(&self) -> Result<()> {
        let all = [self.m, self.a, self.m0, self.b];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(SimError::invalid("heterogeneity values must be finite"));
        }
        if self.m < 0.0 || self.m0 < 0.0 || self.m + self.m0 > 1.0 {
            return Err(SimError::invalid(format!(
                "tier fractions must be >= 0 and sum to <= 1 (m = {}, m0 = {})",
                self.m, self.m0
            )));
        }
        if self.a < 0.0 || self.b < self.a {
            return Err(SimError::invalid(format!(
                "multipliers must satisfy 0 <= a <= b (a = {}, b = {})",
                self.a, self.b
            )));
        }
        Ok(())
    }
}

impl Default for Heterogeneity {
    fn default() -> Self {
        Heterogeneity {
            m: 0.1,
            a: 1.0,
            m0: 0.0,
            b: 2.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Role {
    Member,
    ClusterHead,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeState {
    pub id: NodeId,
    pub position: Point,
    pub tier: NodeTier,
    pub initial_energy: f64,
    pub residual_energy: f64,
    pub alive: bool,
    pub role: Role,
    pub cluster_of: Option<NodeId>,
    /// Member of the eligible set for the current epoch.
    pub eligible: bool,
    pub rounds_as_ch: u32,
    pub sensed_value: f64,
    pub last_transmitted_value: Option<f64>,
    pub died_at: Option<u32>,
}

/// Outcome of a single energy charge.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Charge {
    /// Joules actually removed from the battery.
    pub spent: f64,
    /// False when the node could not pay in full (or was already dead).
    pub completed: bool,
}

impl NodeState {
    pub fn new(id: NodeId, position: Point, tier: NodeTier, e0: f64) -> Self {
        let initial = e0 * (1.0 + tier.extra);
        NodeState {
            id,
            position,
            tier,
            initial_energy: initial,
            residual_energy: initial,
            alive: initial > 0.0,
            role: Role::Member,
            cluster_of: None,
            eligible: true,
            rounds_as_ch: 0,
            sensed_value: 0.0,
            last_transmitted_value: None,
            died_at: None,
        }
    }

    /// Draws `amount` joules. A node that cannot pay in full spends what it
    /// has and dies; the action it was paying for does not happen.
    pub fn consume(&mut self, amount: f64) -> Result<Charge> {
        if !(amount.is_finite() && amount >= 0.0) {
            return Err(SimError::invalid(format!(
                "energy charge must be finite and >= 0, got {amount}"
            )));
        }
        if !self.alive {
            return Ok(Charge {
                spent: 0.0,
                completed: false,
            });
        }
        if amount <= self.residual_energy {
            self.residual_energy -= amount;
            if self.residual_energy <= 0.0 {
                self.residual_energy = 0.0;
                self.alive = false;
            }
            Ok(Charge {
                spent: amount,
                completed: true,
            })
        } else {
            let spent = self.residual_energy;
            self.residual_energy = 0.0;
            self.alive = false;
            Ok(Charge {
                spent,
                completed: false,
            })
        }
    }

    pub fn normalized_energy(&self) -> f64 {
        if self.initial_energy > 0.0 {
            self.residual_energy / self.initial_energy
        } else {
            0.0
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkState {
    pub nodes: Vec<NodeState>,
    pub field_m: f64,
    /// Index of the next round to execute.
    pub round: u32,
    pub e_total: f64,
    /// Cumulative joules drawn through [`NetworkState::consume`].
    pub consumed: f64,
}

impl NetworkState {
    pub fn from_nodes(nodes: Vec<NodeState>, field_m: f64) -> Self {
        let e_total = nodes.iter().map(|n| n.initial_energy).sum();
        NetworkState {
            nodes,
            field_m,
            round: 0,
            e_total,
            consumed: 0.0,
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn alive_count(&self) -> usize {
        self.nodes.iter().filter(|n| n.alive).count()
    }

    pub fn alive_ids(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.nodes.iter().filter(|n| n.alive).map(|n| n.id)
    }

    pub fn residual_total(&self) -> f64 {
        self.nodes.iter().map(|n| n.residual_energy).sum()
    }

    /// Sum of the tier multipliers `Σ a_i`.
    pub fn extra_total(&self) -> f64 {
        self.nodes.iter().map(|n| n.tier.extra).sum()
    }

    pub fn distance(&self, a: NodeId, b: NodeId) -> f64 {
        self.nodes[a].position.distance(&self.nodes[b].position)
    }

    /// Charges node `id`, recording the death round if the charge kills it.
    pub fn consume(&mut self, id: NodeId, amount: f64) -> Result<Charge> {
        let round = self.round;
        let node = &mut self.nodes[id];
        let was_alive = node.alive;
        let charge = node.consume(amount)?;
        if was_alive && !node.alive {
            node.died_at = Some(round);
        }
        self.consumed += charge.spent;
        Ok(charge)
    }
}

/// Places `node_count` nodes uniformly at random in `[0, field_m]²`. The
/// first `⌊m·N⌋` ids are advanced, the next `⌊m0·N⌋` super, the rest normal.
pub fn deploy(
    node_count: usize,
    field_m: f64,
    e0: f64,
    heterogeneity: Heterogeneity,
    rng_seed: u64,
) -> Result<NetworkState> {
    if node_count == 0 {
        return Err(SimError::invalid("node count must be >= 1"));
    }
    if !(field_m.is_finite() && field_m > 0.0) {
        return Err(SimError::invalid("field side must be > 0"));
    }
    if !(e0.is_finite() && e0 > 0.0) {
        return Err(SimError::invalid("initial energy must be > 0"));
    }
    heterogeneity.validate()?;

    let n = node_count as f64;
    let advanced = (heterogeneity.m * n + 1e-9).floor() as usize;
    let supers = (heterogeneity.m0 * n + 1e-9).floor() as usize;

    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let nodes = (0..node_count)
        .map(|id| {
            let x = rng.random::<f64>() * field_m;
            let y = rng.random::<f64>() * field_m;
            let tier = if id < advanced {
                NodeTier {
                    kind: TierKind::Advanced,
                    extra: heterogeneity.a,
                }
            } else if id < advanced + supers {
                NodeTier {
                    kind: TierKind::Super,
                    extra: heterogeneity.b,
                }
            } else {
                NodeTier::NORMAL
            };
            NodeState::new(id, Point::new(x, y), tier, e0)
        })
        .collect();
    Ok(NetworkState::from_nodes(nodes, field_m))
}

/// Assigns every alive non-head node to its nearest head (lowest id on ties).
/// The result is indexed by node id; heads and dead nodes map to `None`.
pub fn assign_clusters(network: &NetworkState, ch_ids: &[NodeId]) -> Result<Vec<Option<NodeId>>> {
    let mut heads: Vec<NodeId> = ch_ids.to_vec();
    heads.sort_unstable();
    heads.dedup();
    for &h in &heads {
        match network.nodes.get(h) {
            Some(node) if node.alive => {}
            Some(_) => return Err(SimError::invalid(format!("dead node {h} listed as cluster head"))),
            None => return Err(SimError::invalid(format!("unknown node {h} listed as cluster head"))),
        }
    }

    let mut assignment = vec![None; network.len()];
    if heads.is_empty() {
        return Ok(assignment);
    }
    let mut is_head = vec![false; network.len()];
    for &h in &heads {
        is_head[h] = true;
    }
    for node in network.nodes.iter().filter(|n| n.alive && !is_head[n.id]) {
        let mut best = heads[0];
        let mut best_d = node.position.distance_sq(&network.nodes[best].position);
        for &h in &heads[1..] {
            let d = node.position.distance_sq(&network.nodes[h].position);
            if d < best_d {
                best = h;
                best_d = d;
            }
        }
        assignment[node.id] = Some(best);
    }
    Ok(assignment)
}

/// Draws a fresh reading for every alive node, in id order.
pub fn sense_environment<R: Rng + ?Sized>(network: &mut NetworkState, rng: &mut R) {
    for node in network.nodes.iter_mut().filter(|n| n.alive) {
        node.sensed_value = rng.random::<f64>() * SENSED_MAX;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn homogeneous_total_energy() {
        let net = deploy(100, 100.0, 0.5, Heterogeneity::HOMOGENEOUS, 7).unwrap();
        assert_relative_eq!(net.e_total, 50.0, max_relative = 1e-12);
        assert!(net.nodes.iter().all(|n| n.tier.kind == TierKind::Normal));
    }

    #[test]
    fn two_level_total_energy() {
        let het = Heterogeneity {
            m: 0.1,
            a: 1.0,
            m0: 0.0,
            b: 1.0,
        };
        let net = deploy(100, 100.0, 0.5, het, 7).unwrap();
        assert_relative_eq!(net.e_total, 55.0, max_relative = 1e-12);
        let adv = net.nodes.iter().filter(|n| n.tier.kind == TierKind::Advanced).count();
        assert_eq!(adv, 10);
        // E_total = E₀·(N + Σa_i)
        assert_relative_eq!(net.e_total, 0.5 * (100.0 + net.extra_total()), max_relative = 1e-12);
    }

    #[test]
    fn three_level_tier_counts() {
        let het = Heterogeneity {
            m: 0.2,
            a: 1.0,
            m0: 0.3,
            b: 2.0,
        };
        let net = deploy(50, 100.0, 0.5, het, 1).unwrap();
        let count = |k| net.nodes.iter().filter(|n| n.tier.kind == k).count();
        assert_eq!(count(TierKind::Advanced), 10);
        assert_eq!(count(TierKind::Super), 15);
        assert_eq!(count(TierKind::Normal), 25);
        assert_relative_eq!(net.e_total, 0.5 * (50.0 + 10.0 + 30.0), max_relative = 1e-12);
    }

    #[test]
    fn deploy_rejects_bad_fractions() {
        let het = Heterogeneity {
            m: 0.7,
            a: 1.0,
            m0: 0.4,
            b: 2.0,
        };
        assert!(deploy(100, 100.0, 0.5, het, 1).is_err());
        let het = Heterogeneity {
            m: 0.1,
            a: 2.0,
            m0: 0.1,
            b: 1.0,
        };
        assert!(deploy(100, 100.0, 0.5, het, 1).is_err());
        assert!(deploy(0, 100.0, 0.5, Heterogeneity::HOMOGENEOUS, 1).is_err());
    }

    #[test]
    fn deploy_is_deterministic_and_in_field() {
        let a = deploy(100, 100.0, 0.5, Heterogeneity::default(), 42).unwrap();
        let b = deploy(100, 100.0, 0.5, Heterogeneity::default(), 42).unwrap();
        let c = deploy(100, 100.0, 0.5, Heterogeneity::default(), 43).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.nodes[0].position, c.nodes[0].position);
        assert!(a
            .nodes
            .iter()
            .all(|n| (0.0..=100.0).contains(&n.position.x) && (0.0..=100.0).contains(&n.position.y)));
    }

    #[test]
    fn consume_examples() {
        let mut node = NodeState::new(0, Point::default(), NodeTier::NORMAL, 0.5);
        let c = node.consume(0.2).unwrap();
        assert!(c.completed);
        assert_relative_eq!(node.residual_energy, 0.3, max_relative = 1e-12);
        assert!(node.alive);

        let mut node = NodeState::new(0, Point::default(), NodeTier::NORMAL, 1e-5);
        let c = node.consume(3e-4).unwrap();
        assert!(!c.completed);
        assert_eq!(c.spent, 1e-5);
        assert_eq!(node.residual_energy, 0.0);
        assert!(!node.alive);

        let before = node.clone();
        let c = node.consume(1.0).unwrap();
        assert_eq!(c.spent, 0.0);
        assert_eq!(node, before);

        assert!(node.consume(-1.0).is_err());
    }

    #[test]
    fn exact_payment_completes_then_dies() {
        let mut node = NodeState::new(0, Point::default(), NodeTier::NORMAL, 0.25);
        let c = node.consume(0.25).unwrap();
        assert!(c.completed);
        assert!(!node.alive);
    }

    #[test]
    fn network_consume_records_death_round() {
        let mut net = deploy(3, 10.0, 0.1, Heterogeneity::HOMOGENEOUS, 0).unwrap();
        net.round = 17;
        net.consume(1, 0.5).unwrap();
        assert_eq!(net.nodes[1].died_at, Some(17));
        assert_relative_eq!(net.consumed, 0.1, max_relative = 1e-12);
        assert_eq!(net.alive_count(), 2);
    }

    fn line_network(xs: &[f64]) -> NetworkState {
        let nodes = xs
            .iter()
            .enumerate()
            .map(|(i, &x)| NodeState::new(i, Point::new(x, 0.0), NodeTier::NORMAL, 1.0))
            .collect();
        NetworkState::from_nodes(nodes, 100.0)
    }

    #[test]
    fn single_head_takes_everyone() {
        let net = line_network(&[0.0, 10.0, 20.0, 30.0]);
        let a = assign_clusters(&net, &[2]).unwrap();
        assert_eq!(a, vec![Some(2), Some(2), None, Some(2)]);
    }

    #[test]
    fn ties_go_to_lowest_head_id() {
        let mut xs = vec![100.0; 8];
        xs[3] = 0.0;
        xs[7] = 20.0;
        xs[5] = 10.0;
        let net = line_network(&xs);
        let a = assign_clusters(&net, &[7, 3]).unwrap();
        assert_eq!(a[5], Some(3));
    }

    #[test]
    fn empty_heads_and_dead_heads() {
        let mut net = line_network(&[0.0, 1.0, 2.0]);
        assert_eq!(assign_clusters(&net, &[]).unwrap(), vec![None; 3]);
        net.nodes[1].alive = false;
        assert!(assign_clusters(&net, &[1]).is_err());
        let a = assign_clusters(&net, &[0]).unwrap();
        assert_eq!(a, vec![None, None, Some(0)]);
    }

    #[test]
    fn sensing_range_and_determinism() {
        let mut a = deploy(50, 100.0, 0.5, Heterogeneity::HOMOGENEOUS, 3).unwrap();
        let mut b = a.clone();
        a.nodes[4].alive = false;
        b.nodes[4].alive = false;
        let mut r1 = ChaCha8Rng::seed_from_u64(9);
        let mut r2 = ChaCha8Rng::seed_from_u64(9);
        sense_environment(&mut a, &mut r1);
        sense_environment(&mut b, &mut r2);
        assert_eq!(a, b);
        assert_eq!(a.nodes[4].sensed_value, 0.0);
        assert!(a.nodes.iter().all(|n| (0.0..=SENSED_MAX).contains(&n.sensed_value)));
    }

    #[test]
    fn sensed_mean_is_centered() {
        let mut net = deploy(1000, 100.0, 0.5, Heterogeneity::HOMOGENEOUS, 3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut sum = 0.0;
        for _ in 0..1000 {
            sense_environment(&mut net, &mut rng);
            sum += net.nodes.iter().map(|n| n.sensed_value).sum::<f64>();
        }
        let mean = sum / 1e6;
        assert!((mean - 100.0).abs() < 0.5, "mean = {mean}");
    }
}
