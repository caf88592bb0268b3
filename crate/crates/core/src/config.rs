//! Scenario configuration.
//!
//! The file format is flat `key = value` text; `#` starts a comment. Values
//! from the file override defaults, and explicit overrides (command-line
//! flags) override the file. Unknown keys are rejected.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::energy::EnergyParams;
use crate::error::{Result, SimError};
use crate::protocol::{ProtocolConfig, ProtocolKind};
use crate::sink::SinkMode;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub node_count: usize,
    pub field_m: f64,
    pub initial_energy_j: f64,
    pub rounds: u32,
    pub energy: EnergyParams,
    pub protocol: ProtocolConfig,
    pub protocols: Vec<ProtocolKind>,
    pub sink_modes: Vec<SinkMode>,
    pub sink_step_m: f64,
    pub sink_pause_rounds: u32,
    pub seeds: Vec<u64>,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            node_count: 100,
            field_m: 100.0,
            initial_energy_j: 0.5,
            rounds: 5000,
            energy: EnergyParams::default(),
            protocol: ProtocolConfig::default(),
            protocols: ProtocolKind::ALL.to_vec(),
            sink_modes: vec![SinkMode::StaticCenter, SinkMode::MobileTop],
            sink_step_m: 10.0,
            sink_pause_rounds: 1,
            seeds: vec![1],
        }
    }
}

/// Every key accepted in a config file or as an override.
pub const KEYS: &[&str] = &[
    "nodes",
    "field",
    "initial_energy",
    "rounds",
    "packet_bits",
    "e_elec",
    "e_fs",
    "e_mp",
    "e_da",
    "p_opt",
    "protocol",
    "sink",
    "sink_step",
    "sink_pause",
    "hard_threshold",
    "soft_threshold",
    "layers",
    "layer_p",
    "timer_k",
    "comm_range",
    "het_m",
    "het_a",
    "het_m0",
    "het_b",
    "seed",
    "seeds",
];

fn num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    value
        .trim()
        .parse::<T>()
        .map_err(|e| SimError::config(key, format!("cannot parse `{value}`: {e}")))
}

fn list<T, F>(key: &str, value: &str, parse: F) -> Result<Vec<T>>
where
    F: Fn(&str) -> Result<Vec<T>>,
{
    let mut out = Vec::new();
    for part in value.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        out.extend(parse(part)?);
    }
    if out.is_empty() {
        return Err(SimError::config(key, "empty list"));
    }
    Ok(out)
}

/// Parses `1,2,5-8` style seed lists.
pub fn parse_seeds(key: &str, value: &str) -> Result<Vec<u64>> {
    list(key, value, |part| match part.split_once('-') {
        Some((a, b)) => {
            let (a, b): (u64, u64) = (num(key, a)?, num(key, b)?);
            if a > b {
                return Err(SimError::config(key, format!("empty range `{part}`")));
            }
            Ok((a..=b).collect())
        }
        None => Ok(vec![num(key, part)?]),
    })
}

fn rekey(key: &str, e: SimError) -> SimError {
    match e {
        SimError::Config { message, .. } => SimError::config(key, message),
        other => other,
    }
}

pub fn parse_protocols(key: &str, value: &str) -> Result<Vec<ProtocolKind>> {
    list(key, value, |part| {
        if part.eq_ignore_ascii_case("all") {
            return Ok(ProtocolKind::ALL.to_vec());
        }
        part.parse::<ProtocolKind>().map(|p| vec![p]).map_err(|e| rekey(key, e))
    })
}

pub fn parse_sink_modes(key: &str, value: &str) -> Result<Vec<SinkMode>> {
    list(key, value, |part| {
        if part.eq_ignore_ascii_case("all") {
            return Ok(SinkMode::ALL.to_vec());
        }
        part.parse::<SinkMode>().map(|m| vec![m]).map_err(|e| rekey(key, e))
    })
}

impl ScenarioConfig {
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let het = &mut self.protocol.heterogeneity;
        match key {
            "nodes" => self.node_count = num(key, value)?,
            "field" => self.field_m = num(key, value)?,
            "initial_energy" => self.initial_energy_j = num(key, value)?,
            "rounds" => self.rounds = num(key, value)?,
            "packet_bits" => self.energy.packet_bits = num(key, value)?,
            "e_elec" => self.energy.e_elec = num(key, value)?,
            "e_fs" => self.energy.e_fs = num(key, value)?,
            "e_mp" => self.energy.e_mp = num(key, value)?,
            "e_da" => self.energy.e_da = num(key, value)?,
            "p_opt" => self.protocol.p_opt = num(key, value)?,
            "protocol" => self.protocols = parse_protocols(key, value)?,
            "sink" => self.sink_modes = parse_sink_modes(key, value)?,
            "sink_step" => self.sink_step_m = num(key, value)?,
            "sink_pause" => self.sink_pause_rounds = num(key, value)?,
            "hard_threshold" => self.protocol.hard_threshold = num(key, value)?,
            "soft_threshold" => self.protocol.soft_threshold = num(key, value)?,
            "layers" => self.protocol.hierarchy_layers = num(key, value)?,
            "layer_p" => self.protocol.layer_p = num(key, value)?,
            "timer_k" => self.protocol.timer_k = num(key, value)?,
            "comm_range" => self.protocol.comm_range = num(key, value)?,
            "het_m" => het.m = num(key, value)?,
            "het_a" => het.a = num(key, value)?,
            "het_m0" => het.m0 = num(key, value)?,
            "het_b" => het.b = num(key, value)?,
            "seed" => self.seeds = vec![num(key, value)?],
            "seeds" => self.seeds = parse_seeds(key, value)?,
            _ => return Err(SimError::config(key, "unknown key")),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if self.node_count == 0 {
            return Err(SimError::config("nodes", "must be >= 1"));
        }
        if !(self.field_m.is_finite() && self.field_m > 0.0) {
            return Err(SimError::config("field", "must be > 0"));
        }
        if !(self.initial_energy_j.is_finite() && self.initial_energy_j > 0.0) {
            return Err(SimError::config("initial_energy", "must be > 0"));
        }
        if self.rounds == 0 {
            return Err(SimError::config("rounds", "must be >= 1"));
        }
        if self.energy.packet_bits == 0 {
            return Err(SimError::config("packet_bits", "must be >= 1"));
        }
        for (key, v) in [
            ("e_elec", self.energy.e_elec),
            ("e_fs", self.energy.e_fs),
            ("e_mp", self.energy.e_mp),
            ("e_da", self.energy.e_da),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(SimError::config(key, "must be > 0"));
            }
        }
        if !(self.sink_step_m.is_finite() && self.sink_step_m > 0.0) {
            return Err(SimError::config("sink_step", "must be > 0"));
        }
        if self.sink_pause_rounds == 0 {
            return Err(SimError::config("sink_pause", "must be >= 1"));
        }
        if self.protocols.is_empty() {
            return Err(SimError::config("protocol", "no protocol selected"));
        }
        if self.sink_modes.is_empty() {
            return Err(SimError::config("sink", "no sink mode selected"));
        }
        if self.seeds.is_empty() {
            return Err(SimError::config("seeds", "no seed selected"));
        }
        self.protocol.validate()
    }

    /// Canonical `key = value` dump of every setting that shapes a single
    /// run (protocol, sink mode and seed are recorded per run instead).
    pub fn canonical_text(&self) -> String {
        let p = &self.protocol;
        let h = &p.heterogeneity;
        let e = &self.energy;
        let mut out = String::new();
        let pairs: [(&str, String); 22] = [
            ("nodes", self.node_count.to_string()),
            ("field", format!("{:e}", self.field_m)),
            ("initial_energy", format!("{:e}", self.initial_energy_j)),
            ("rounds", self.rounds.to_string()),
            ("packet_bits", e.packet_bits.to_string()),
            ("e_elec", format!("{:e}", e.e_elec)),
            ("e_fs", format!("{:e}", e.e_fs)),
            ("e_mp", format!("{:e}", e.e_mp)),
            ("e_da", format!("{:e}", e.e_da)),
            ("p_opt", format!("{:e}", p.p_opt)),
            ("sink_step", format!("{:e}", self.sink_step_m)),
            ("sink_pause", self.sink_pause_rounds.to_string()),
            ("hard_threshold", format!("{:e}", p.hard_threshold)),
            ("soft_threshold", format!("{:e}", p.soft_threshold)),
            ("layers", p.hierarchy_layers.to_string()),
            ("layer_p", format!("{:e}", p.layer_p)),
            ("timer_k", format!("{:e}", p.timer_k)),
            ("comm_range", format!("{:e}", p.comm_range)),
            ("het_m", format!("{:e}", h.m)),
            ("het_a", format!("{:e}", h.a)),
            ("het_m0", format!("{:e}", h.m0)),
            ("het_b", format!("{:e}", h.b)),
        ];
        for (k, v) in pairs {
            let _ = writeln!(out, "{k} = {v}");
        }
        out
    }

    /// Short SHA-256 fingerprint of [`ScenarioConfig::canonical_text`].
    pub fn fingerprint(&self) -> String {
        let digest = Sha256::digest(self.canonical_text().as_bytes());
        digest.iter().take(8).fold(String::new(), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
    }
}

/// Splits config-file text into `(key, value)` pairs.
pub fn parse_pairs(text: &str) -> Result<Vec<(String, String)>> {
    let mut pairs = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(SimError::config(
                format!("line {}", i + 1),
                format!("expected `key = value`, got `{line}`"),
            ));
        };
        pairs.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(pairs)
}

/// Defaults, then the config file, then explicit overrides.
pub fn parse_config(file_text: Option<&str>, overrides: &[(String, String)]) -> Result<ScenarioConfig> {
    let mut config = ScenarioConfig::default();
    if let Some(text) = file_text {
        for (k, v) in parse_pairs(text)? {
            config.set(&k, &v)?;
        }
    }
    for (k, v) in overrides {
        config.set(k, v)?;
    }
    config.validate()?;
    Ok(config)
}
