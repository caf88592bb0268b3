//! Distributed energy-efficient clustering for heterogeneous populations.
//!
//! A node's head probability scales with its residual energy relative to an
//! estimate of the network average, `Ē(r) = E_total/N · (1 − r/R)`, where the
//! lifetime estimate `R = E_total / E_round` comes from the analytical round
//! energy. Each node rotates on its own epoch of `⌊1/pᵢ⌋` rounds.

use rand::Rng;

use super::{Engine, ProtocolConfig, ProtocolKind, RoundPlan, SimRng};
use crate::energy::{self, EnergyParams};
use crate::error::{Result, SimError};
use crate::network::{NetworkState, NodeId, NodeState, TierKind};

/// Estimated mean residual energy at round `r`, floored at zero past `R`.
pub fn deec_average_energy(e_total: f64, nodes: usize, r: u32, big_r: f64) -> Result<f64> {
    if !(big_r.is_finite() && big_r > 0.0) {
        return Err(SimError::invalid(format!("lifetime estimate must be > 0, got {big_r}")));
    }
    if nodes == 0 {
        return Err(SimError::invalid("node count must be >= 1"));
    }
    Ok((e_total / nodes as f64 * (1.0 - r as f64 / big_r)).max(0.0))
}

/// Rounds until the network's energy is spent at `e_round` joules per round.
pub fn deec_lifetime_estimate(e_total: f64, e_round: f64) -> Result<f64> {
    if !(e_round.is_finite() && e_round > 0.0) {
        return Err(SimError::invalid(format!("round energy must be > 0, got {e_round}")));
    }
    Ok(e_total / e_round)
}

/// Head probability of `node` given the estimated average energy.
///
/// Without super nodes this is the two-level form, which weights normal nodes
/// by `1/(1 + a·m)` and advanced nodes by `(1 + a)/(1 + a·m)`. With super
/// nodes the multi-level form `(1 + a_i)/(1 + a·m + b·m0)` is used. Both
/// forms agree whenever there are no super nodes.
pub fn deec_p_i(node: &NodeState, avg_energy: f64, config: &ProtocolConfig) -> Result<f64> {
    if !(avg_energy.is_finite() && avg_energy > 0.0) {
        return Err(SimError::invalid(format!(
            "average energy must be > 0, got {avg_energy}"
        )));
    }
    let het = &config.heterogeneity;
    let ratio = node.residual_energy / avg_energy;
    let p = if het.m0 == 0.0 {
        let scale = 1.0 + het.a * het.m;
        match node.tier.kind {
            TierKind::Normal => config.p_opt * ratio / scale,
            TierKind::Advanced => config.p_opt * (1.0 + het.a) * ratio / scale,
            TierKind::Super => config.p_opt * (1.0 + node.tier.extra) * ratio / scale,
        }
    } else {
        let scale = 1.0 + het.a * het.m + het.b * het.m0;
        config.p_opt * (1.0 + node.tier.extra) * ratio / scale
    };
    Ok(p.clamp(0.0, 1.0))
}

fn node_threshold(p_i: f64, round: u32) -> (u32, f64) {
    let epoch = (1.0 / p_i + 1e-9).floor().max(1.0) as u32;
    let phase = (round % epoch) as f64;
    let denom = 1.0 - p_i * phase;
    let t = if denom <= 0.0 {
        1.0
    } else {
        (p_i / denom).clamp(0.0, 1.0)
    };
    (epoch, t)
}

/// One election round. `eligible` is the per-node set `G`; a node re-enters
/// it when the round is a multiple of its current `⌊1/pᵢ⌋`.
///
/// Once the average-energy estimate has reached zero every alive node gets
/// `pᵢ = 1`, the limit of `p_opt·Eᵢ/Ē` as `Ē → 0⁺`.
pub fn deec_elect_chs<R: Rng + ?Sized>(
    network: &NetworkState,
    config: &ProtocolConfig,
    big_r: f64,
    eligible: &mut [bool],
    rng: &mut R,
) -> Result<Vec<NodeId>> {
    let round = network.round;
    let avg = deec_average_energy(network.e_total, network.len(), round, big_r)?;
    let mut heads = Vec::new();
    for node in network.nodes.iter().filter(|n| n.alive) {
        let p_i = if avg > 0.0 { deec_p_i(node, avg, config)? } else { 1.0 };
        if p_i <= 0.0 {
            continue;
        }
        let (epoch, threshold) = node_threshold(p_i, round);
        if round.is_multiple_of(epoch) {
            eligible[node.id] = true;
        }
        if !eligible[node.id] {
            continue;
        }
        let u: f64 = rng.random();
        if u < threshold {
            eligible[node.id] = false;
            heads.push(node.id);
        }
    }
    Ok(heads)
}

#[derive(Debug, Clone)]
pub struct DeecEngine {
    config: ProtocolConfig,
    lifetime_estimate: f64,
    eligible: Vec<bool>,
}

impl DeecEngine {
    /// Estimates `R` from the analytical round energy with
    /// `k = round(N·p_opt)` clusters and the mean head-to-sink distance.
    pub fn new(config: &ProtocolConfig, params: &EnergyParams, network: &NetworkState) -> Result<Self> {
        let n = network.len() as u32;
        let k = ((n as f64 * config.p_opt).round() as u32).clamp(1, n.max(1));
        let e_round = energy::expected_round_energy(
            params,
            k,
            n,
            network.field_m,
            energy::mean_distance_to_sink(network.field_m),
        )?;
        Ok(DeecEngine {
            config: *config,
            lifetime_estimate: deec_lifetime_estimate(network.e_total, e_round)?,
            eligible: vec![true; network.len()],
        })
    }

    pub fn lifetime_estimate(&self) -> f64 {
        self.lifetime_estimate
    }
}

impl Engine for DeecEngine {
    fn kind(&self) -> ProtocolKind {
        ProtocolKind::Deec
    }

    fn setup(&mut self, network: &NetworkState, rng: &mut SimRng) -> Result<RoundPlan> {
        let heads = deec_elect_chs(network, &self.config, self.lifetime_estimate, &mut self.eligible, rng)?;
        RoundPlan::flat(network, heads)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{deploy, Heterogeneity, NodeTier, Point};
    use approx::assert_relative_eq;
    use rand::SeedableRng;

    fn node(kind: TierKind, extra: f64, residual: f64) -> NodeState {
        let mut n = NodeState::new(0, Point::default(), NodeTier { kind, extra }, 1.0);
        n.residual_energy = residual;
        n
    }

    fn two_level() -> ProtocolConfig {
        ProtocolConfig {
            heterogeneity: Heterogeneity {
                m: 0.1,
                a: 1.0,
                m0: 0.0,
                b: 1.0,
            },
            ..Default::default()
        }
    }

    #[test]
    fn average_energy_examples() {
        assert_relative_eq!(deec_average_energy(50.0, 100, 0, 4000.0).unwrap(), 0.5);
        assert_eq!(deec_average_energy(50.0, 100, 4000, 4000.0).unwrap(), 0.0);
        assert_relative_eq!(deec_average_energy(50.0, 100, 2000, 4000.0).unwrap(), 0.25);
        assert_eq!(deec_average_energy(50.0, 100, 9000, 4000.0).unwrap(), 0.0);
        assert!(deec_average_energy(50.0, 100, 0, 0.0).is_err());
    }

    #[test]
    fn lifetime_examples() {
        assert_relative_eq!(
            deec_lifetime_estimate(50.0, 0.01).unwrap(),
            5000.0,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            deec_lifetime_estimate(100.0, 0.01).unwrap(),
            2.0 * deec_lifetime_estimate(50.0, 0.01).unwrap(),
            max_relative = 1e-12
        );
        assert!(deec_lifetime_estimate(50.0, 0.0).is_err());
    }

    #[test]
    fn p_i_examples() {
        let homo = ProtocolConfig {
            heterogeneity: Heterogeneity::HOMOGENEOUS,
            ..Default::default()
        };
        assert_relative_eq!(deec_p_i(&node(TierKind::Normal, 0.0, 0.3), 0.3, &homo).unwrap(), 0.1);

        let c = two_level();
        let normal = deec_p_i(&node(TierKind::Normal, 0.0, 0.4), 0.4, &c).unwrap();
        let adv = deec_p_i(&node(TierKind::Advanced, 1.0, 0.4), 0.4, &c).unwrap();
        assert_relative_eq!(normal, 0.1 / 1.1, max_relative = 1e-12);
        assert_relative_eq!(adv, 0.2 / 1.1, max_relative = 1e-12);
        assert!(deec_p_i(&node(TierKind::Normal, 0.0, 0.4), 0.0, &c).is_err());
        assert_eq!(deec_p_i(&node(TierKind::Normal, 0.0, 100.0), 0.01, &c).unwrap(), 1.0);
    }

    #[test]
    fn two_level_and_multi_level_forms_agree() {
        let c = two_level();
        // Multi-level form evaluated independently: p_opt·N(1+a_i)E_i/((N+Σa_i)Ē)
        let n = 100.0;
        let sum_a = 10.0;
        for (kind, extra) in [(TierKind::Normal, 0.0), (TierKind::Advanced, 1.0)] {
            for e in [0.05, 0.3, 0.61] {
                let got = deec_p_i(&node(kind, extra, e), 0.37, &c).unwrap();
                let multi = 0.1 * n * (1.0 + extra) * e / ((n + sum_a) * 0.37);
                assert_relative_eq!(got, multi, max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn expected_heads_match_population_identity() {
        let c = two_level();
        let net = deploy(100, 100.0, 0.5, c.heterogeneity, 4).unwrap();
        let avg = 0.21;
        let total: f64 = net
            .nodes
            .iter()
            .map(|n| {
                let mut n = n.clone();
                n.residual_energy = avg;
                deec_p_i(&n, avg, &c).unwrap()
            })
            .sum();
        // normals 90·(0.1/1.1) + advanced 10·(0.2/1.1) = 10
        assert_relative_eq!(total, 10.0, max_relative = 1e-12);
    }

    #[test]
    fn zero_probability_never_elected() {
        let mut net = deploy(10, 100.0, 0.5, Heterogeneity::HOMOGENEOUS, 1).unwrap();
        for n in net.nodes.iter_mut() {
            n.residual_energy = 0.0;
        }
        net.nodes[0].residual_energy = 0.5;
        let cfg = ProtocolConfig {
            heterogeneity: Heterogeneity::HOMOGENEOUS,
            ..Default::default()
        };
        let mut eligible = vec![true; 10];
        let mut rng = SimRng::seed_from_u64(0);
        for r in 0..50 {
            net.round = r;
            let heads = deec_elect_chs(&net, &cfg, 1e6, &mut eligible, &mut rng).unwrap();
            assert!(heads.iter().all(|&h| h == 0));
        }
    }

    #[test]
    fn epoch_end_threshold_is_near_certain() {
        // p_i = 0.1 → epoch 10, phase 9 → 0.1 / (1 − 0.9)
        let (epoch, t) = node_threshold(0.1, 9);
        assert_eq!(epoch, 10);
        assert_eq!(t, 1.0);
        let (epoch, t) = node_threshold(0.26, 2);
        assert_eq!(epoch, 3);
        assert_relative_eq!(t, 0.26 / (1.0 - 0.52), max_relative = 1e-12);
    }

    #[test]
    fn exhausted_estimate_elects_every_alive_node() {
        let mut net = deploy(30, 100.0, 0.5, Heterogeneity::HOMOGENEOUS, 1).unwrap();
        net.nodes[7].alive = false;
        net.round = 500;
        let cfg = ProtocolConfig::default();
        let mut eligible = vec![true; 30];
        let mut rng = SimRng::seed_from_u64(0);
        let heads = deec_elect_chs(&net, &cfg, 100.0, &mut eligible, &mut rng).unwrap();
        assert_eq!(heads.len(), 29);
    }

    #[test]
    fn head_count_tracks_target_on_homogeneous_rounds() {
        let cfg = ProtocolConfig {
            heterogeneity: Heterogeneity::HOMOGENEOUS,
            ..Default::default()
        };
        let mut net = deploy(100, 100.0, 0.5, cfg.heterogeneity, 2).unwrap();
        let mut eligible = vec![true; 100];
        let mut rng = SimRng::seed_from_u64(5);
        let rounds = 600;
        let mut total = 0usize;
        for r in 0..rounds {
            net.round = r;
            // hold every node at the estimated average so pᵢ = p_opt
            let avg = deec_average_energy(net.e_total, 100, r, 1e6).unwrap();
            for n in net.nodes.iter_mut() {
                n.residual_energy = avg;
            }
            total += deec_elect_chs(&net, &cfg, 1e6, &mut eligible, &mut rng).unwrap().len();
        }
        let mean = total as f64 / rounds as f64;
        assert!((mean - 10.0).abs() <= 2.0, "mean heads per round {mean}");
    }

    #[test]
    fn engine_lifetime_estimate_uses_analytical_round_energy() {
        let params = EnergyParams::default();
        let cfg = two_level();
        let net = deploy(100, 100.0, 0.5, cfg.heterogeneity, 3).unwrap();
        let engine = DeecEngine::new(&cfg, &params, &net).unwrap();
        let d_ch = 100.0 / (20.0 * std::f64::consts::PI).sqrt();
        let e_round = 4000.0
            * (200.0 * 50e-9 + 100.0 * 5e-9 + 10.0 * 0.0013e-12 * 38.25f64.powi(4) + 100.0 * 10e-12 * d_ch * d_ch);
        assert_relative_eq!(engine.lifetime_estimate(), 55.0 / e_round, max_relative = 1e-12);
    }
}
