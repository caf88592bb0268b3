//! Round-based simulator for energy-aware clustering protocols in wireless
//! sensor networks.
//!
//! Five protocols (LEACH, TEEN, DEEC, H-TEEN, CAMP-TEEN) run on a common
//! first-order radio model against a static or mobile sink. Every run is a
//! pure function of its configuration and seed.

pub mod config;
pub mod energy;
pub mod error;
pub mod harness;
pub mod metrics;
pub mod network;
pub mod protocol;
pub mod sink;

pub use config::{parse_config, ScenarioConfig};
pub use energy::EnergyParams;
pub use error::{Result, SimError};
pub use harness::{run_matrix, run_scenario, RunOutcome, Simulation};
pub use metrics::{History, Lifetime, RoundMetrics, RunSummary};
pub use network::{Heterogeneity, NetworkState, NodeId, NodeState, Point};
pub use protocol::{ProtocolConfig, ProtocolKind};
pub use sink::{SinkMode, SinkState};
