//! Per-round metrics, run summaries and their file formats.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};
use crate::protocol::ProtocolKind;
use crate::sink::SinkMode;

pub const CSV_HEADER: &str =
    "round,alive,dead,ch_count,packets_to_ch,packets_to_bs,cum_packets_to_bs,energy_consumed_j";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RoundMetrics {
    pub round: u32,
    pub alive: u32,
    pub dead: u32,
    pub ch_count: u32,
    pub packets_to_ch: u64,
    pub packets_to_bs: u64,
    pub cumulative_packets_to_bs: u64,
    /// Joules drawn during this round.
    pub energy_consumed: f64,
}

/// Ordered per-round record of one run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct History {
    rounds: Vec<RoundMetrics>,
}

impl History {
    pub fn new() -> Self {
        History::default()
    }

    pub fn with_capacity(n: usize) -> Self {
        History {
            rounds: Vec::with_capacity(n),
        }
    }

    /// Appends the next round and fills in its cumulative throughput.
    pub fn record(&mut self, mut metrics: RoundMetrics) -> Result<()> {
        let expected = self.rounds.len() as u32;
        if metrics.round != expected {
            return Err(SimError::Sequencing {
                expected,
                got: metrics.round,
            });
        }
        let before = self.rounds.last().map_or(0, |m| m.cumulative_packets_to_bs);
        metrics.cumulative_packets_to_bs = before + metrics.packets_to_bs;
        self.rounds.push(metrics);
        Ok(())
    }

    pub fn rounds(&self) -> &[RoundMetrics] {
        &self.rounds
    }

    pub fn len(&self) -> usize {
        self.rounds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rounds.is_empty()
    }

    pub fn total_energy(&self) -> f64 {
        self.rounds.iter().map(|m| m.energy_consumed).sum()
    }
}

pub fn record_round(history: &mut History, metrics: RoundMetrics) -> Result<()> {
    history.record(metrics)
}

fn non_empty(history: &History) -> Result<&[RoundMetrics]> {
    if history.is_empty() {
        return Err(SimError::invalid("history is empty"));
    }
    Ok(history.rounds())
}

/// First round that ends with at least one dead node.
pub fn stability_period(history: &History) -> Result<Option<u32>> {
    Ok(non_empty(history)?.iter().find(|m| m.dead > 0).map(|m| m.round))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Lifetime {
    /// Round in which the last node died.
    LastDeath(u32),
    /// Nodes were still alive after this many rounds.
    Survived(u32),
}

impl Lifetime {
    pub fn rounds(self) -> u32 {
        match self {
            Lifetime::LastDeath(r) | Lifetime::Survived(r) => r,
        }
    }
}

pub fn lifetime(history: &History) -> Result<Lifetime> {
    let rounds = non_empty(history)?;
    Ok(rounds
        .iter()
        .find(|m| m.alive == 0)
        .map_or(Lifetime::Survived(rounds.len() as u32), |m| {
            Lifetime::LastDeath(m.round)
        }))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub protocol: ProtocolKind,
    pub sink_mode: SinkMode,
    pub seed: u64,
    pub rounds: u32,
    pub stability_period: Option<u32>,
    pub lifetime: Lifetime,
    /// Mean alive count over every simulated round.
    pub avg_alive: f64,
    /// Packets received at the sink over the run.
    pub total_throughput: u64,
    /// Mean of the cumulative sink throughput over every simulated round.
    pub avg_throughput: f64,
    pub energy_consumed_j: f64,
    #[serde(default)]
    pub config_fingerprint: String,
}

pub fn summarize(history: &History, protocol: ProtocolKind, sink_mode: SinkMode, seed: u64) -> Result<RunSummary> {
    let rounds = non_empty(history)?;
    let n = rounds.len() as f64;
    Ok(RunSummary {
        protocol,
        sink_mode,
        seed,
        rounds: rounds.len() as u32,
        stability_period: stability_period(history)?,
        lifetime: lifetime(history)?,
        avg_alive: rounds.iter().map(|m| m.alive as f64).sum::<f64>() / n,
        total_throughput: rounds.last().map_or(0, |m| m.cumulative_packets_to_bs),
        avg_throughput: rounds.iter().map(|m| m.cumulative_packets_to_bs as f64).sum::<f64>() / n,
        energy_consumed_j: history.total_energy(),
        config_fingerprint: String::new(),
    })
}

pub fn csv_string(history: &History) -> String {
    let mut out = String::with_capacity(64 * (history.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for m in history.rounds() {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{:.16e}",
            m.round,
            m.alive,
            m.dead,
            m.ch_count,
            m.packets_to_ch,
            m.packets_to_bs,
            m.cumulative_packets_to_bs,
            m.energy_consumed
        );
    }
    out
}

pub fn write_csv(history: &History, path: &Path) -> Result<()> {
    fs::write(path, csv_string(history)).map_err(|e| SimError::io(path, e))
}

fn parse_err(message: String) -> SimError {
    SimError::Parse {
        what: "metrics CSV",
        message,
    }
}

pub fn parse_csv(text: &str) -> Result<History> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == CSV_HEADER => {}
        other => return Err(parse_err(format!("unexpected header {other:?}"))),
    }
    let mut history = History::new();
    for (i, line) in lines.enumerate() {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 8 {
            return Err(parse_err(format!(
                "line {}: expected 8 fields, got {}",
                i + 2,
                fields.len()
            )));
        }
        let int = |k: usize| -> Result<u64> {
            fields[k]
                .parse::<u64>()
                .map_err(|e| parse_err(format!("line {}: field {k}: {e}", i + 2)))
        };
        let metrics = RoundMetrics {
            round: int(0)? as u32,
            alive: int(1)? as u32,
            dead: int(2)? as u32,
            ch_count: int(3)? as u32,
            packets_to_ch: int(4)?,
            packets_to_bs: int(5)?,
            cumulative_packets_to_bs: int(6)?,
            energy_consumed: fields[7]
                .parse::<f64>()
                .map_err(|e| parse_err(format!("line {}: energy: {e}", i + 2)))?,
        };
        let cumulative = metrics.cumulative_packets_to_bs;
        history.record(metrics)?;
        if history.rounds().last().map(|m| m.cumulative_packets_to_bs) != Some(cumulative) {
            return Err(parse_err(format!(
                "line {}: cumulative throughput does not add up",
                i + 2
            )));
        }
    }
    Ok(history)
}

pub fn read_csv(path: &Path) -> Result<History> {
    let text = fs::read_to_string(path).map_err(|e| SimError::io(path, e))?;
    parse_csv(&text)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryDocument {
    pub records: Vec<RunSummary>,
}

pub fn summary_string(summaries: &[RunSummary]) -> Result<String> {
    if summaries.is_empty() {
        return Err(SimError::invalid("no summaries to write"));
    }
    let doc = SummaryDocument {
        records: summaries.to_vec(),
    };
    let mut text = serde_json::to_string_pretty(&doc).map_err(|e| SimError::Parse {
        what: "summary",
        message: e.to_string(),
    })?;
    text.push('\n');
    Ok(text)
}

pub fn write_summary(summaries: &[RunSummary], path: &Path) -> Result<()> {
    let text = summary_string(summaries)?;
    fs::write(path, text).map_err(|e| SimError::io(path, e))
}

pub fn read_summary(path: &Path) -> Result<Vec<RunSummary>> {
    let text = fs::read_to_string(path).map_err(|e| SimError::io(path, e))?;
    let doc: SummaryDocument = serde_json::from_str(&text).map_err(|e| SimError::Parse {
        what: "summary",
        message: e.to_string(),
    })?;
    Ok(doc.records)
}
