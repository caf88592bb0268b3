//! First-order radio energy model.
//!
//! Transmitting `L` bits over `d` metres costs `L·E_elec` for the electronics
//! plus an amplifier term, `L·ε_fs·d²` below the crossover distance
//! `d₀ = √(ε_fs/ε_mp)` and `L·ε_mp·d⁴` above it. Receiving costs `L·E_elec`
//! and aggregation costs `E_DA` per bit per signal.

use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};

/// Radio constants. `d0` is derived from `e_fs / e_mp` and never stored.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyParams {
    /// J/bit for transmitter or receiver electronics.
    pub e_elec: f64,
    /// J/bit/m² free-space amplifier.
    pub e_fs: f64,
    /// J/bit/m⁴ multipath amplifier.
    pub e_mp: f64,
    /// J/bit/signal for data aggregation.
    pub e_da: f64,
    /// Data packet length in bits.
    pub packet_bits: u64,
}

impl Default for EnergyParams {
    fn default() -> Self {
        EnergyParams {
            e_elec: 50e-9,
            e_fs: 10e-12,
            e_mp: 0.0013e-12,
            e_da: 5e-9,
            packet_bits: 4000,
        }
    }
}

impl EnergyParams {
    pub fn new(e_elec: f64, e_fs: f64, e_mp: f64, e_da: f64, packet_bits: u64) -> Result<Self> {
        let params = EnergyParams {
            e_elec,
            e_fs,
            e_mp,
            e_da,
            packet_bits,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, value) in [
            ("e_elec", self.e_elec),
            ("e_fs", self.e_fs),
            ("e_mp", self.e_mp),
            ("e_da", self.e_da),
        ] {
            if !(value.is_finite() && value > 0.0) {
                return Err(SimError::invalid(format!("{name} must be finite and > 0, got {value}")));
            }
        }
        if self.packet_bits == 0 {
            return Err(SimError::invalid("packet_bits must be > 0"));
        }
        Ok(())
    }

    /// Crossover distance between the free-space and multipath regimes.
    pub fn d0(&self) -> f64 {
        (self.e_fs / self.e_mp).sqrt()
    }
}

fn check_bits(bits: u64) -> Result<()> {
    if bits == 0 {
        return Err(SimError::invalid("bit count must be > 0"));
    }
    Ok(())
}

fn check_distance(distance: f64) -> Result<()> {
    if !(distance.is_finite() && distance >= 0.0) {
        return Err(SimError::invalid(format!(
            "distance must be finite and >= 0, got {distance}"
        )));
    }
    Ok(())
}

pub fn tx_energy(params: &EnergyParams, bits: u64, distance: f64) -> Result<f64> {
    check_bits(bits)?;
    check_distance(distance)?;
    let l = bits as f64;
    let d2 = distance * distance;
    let amp = if distance < params.d0() {
        params.e_fs * d2
    } else {
        params.e_mp * d2 * d2
    };
    Ok(l * params.e_elec + l * amp)
}

pub fn rx_energy(params: &EnergyParams, bits: u64) -> Result<f64> {
    check_bits(bits)?;
    Ok(bits as f64 * params.e_elec)
}

pub fn aggregation_energy(params: &EnergyParams, bits: u64, signals: u64) -> Result<f64> {
    check_bits(bits)?;
    Ok(signals as f64 * bits as f64 * params.e_da)
}

/// Whether relaying A→B→C is cheaper than sending A→C directly.
pub fn relay_beneficial(params: &EnergyParams, d_ab: f64, d_bc: f64, d_ac: f64, bits: u64) -> Result<bool> {
    let two_hop = tx_energy(params, bits, d_ab)? + tx_energy(params, bits, d_bc)?;
    Ok(two_hop < tx_energy(params, bits, d_ac)?)
}

/// Mean member-to-head distance for `clusters` heads uniformly covering an
/// `field_m × field_m` square.
pub fn mean_distance_to_head(field_m: f64, clusters: u32) -> Result<f64> {
    if clusters == 0 {
        return Err(SimError::invalid("cluster count must be >= 1"));
    }
    if !(field_m.is_finite() && field_m > 0.0) {
        return Err(SimError::invalid("field side must be > 0"));
    }
    Ok(field_m / (2.0 * std::f64::consts::PI * clusters as f64).sqrt())
}

/// Analytical mean head-to-sink distance for a square field.
pub fn mean_distance_to_sink(field_m: f64) -> f64 {
    0.765 * field_m / 2.0
}

/// Expected network-wide energy spent in one round of clustered collection.
pub fn expected_round_energy(
    params: &EnergyParams,
    clusters: u32,
    nodes: u32,
    field_m: f64,
    d_to_bs: f64,
) -> Result<f64> {
    if nodes < clusters {
        return Err(SimError::invalid("node count must be >= cluster count"));
    }
    check_distance(d_to_bs)?;
    let d_to_ch = mean_distance_to_head(field_m, clusters)?;
    let l = params.packet_bits as f64;
    let n = nodes as f64;
    let k = clusters as f64;
    Ok(l * (2.0 * n * params.e_elec
        + n * params.e_da
        + k * params.e_mp * d_to_bs.powi(4)
        + n * params.e_fs * d_to_ch * d_to_ch))
}

/// Analytically optimal number of clusters; returned unrounded.
pub fn optimal_cluster_count(params: &EnergyParams, nodes: u32, field_m: f64, d_to_bs: f64) -> Result<f64> {
    if nodes == 0 {
        return Err(SimError::invalid("node count must be >= 1"));
    }
    if !(field_m.is_finite() && field_m > 0.0) {
        return Err(SimError::invalid("field side must be > 0"));
    }
    if !(d_to_bs.is_finite() && d_to_bs > 0.0) {
        return Err(SimError::invalid("distance to sink must be > 0"));
    }
    let n = nodes as f64;
    Ok(n.sqrt() / (2.0 * std::f64::consts::PI).sqrt() * params.d0() * field_m / (d_to_bs * d_to_bs))
}
