//! Sink placement and the mobile top-edge sweep.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};
use crate::network::Point;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SinkMode {
    StaticCenter,
    StaticTop,
    MobileTop,
}

impl SinkMode {
    pub const ALL: [SinkMode; 3] = [SinkMode::StaticCenter, SinkMode::StaticTop, SinkMode::MobileTop];

    pub fn name(self) -> &'static str {
        match self {
            SinkMode::StaticCenter => "static_center",
            SinkMode::StaticTop => "static_top",
            SinkMode::MobileTop => "mobile_top",
        }
    }
}

impl fmt::Display for SinkMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SinkMode {
    type Err = SimError;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace('-', "_");
        SinkMode::ALL
            .into_iter()
            .find(|m| m.name() == key)
            .ok_or_else(|| SimError::config("sink", format!("unknown sink mode `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SinkState {
    pub mode: SinkMode,
    pub field_m: f64,
    /// Metres advanced per move in mobile mode.
    pub step_m: f64,
    /// Rounds spent at each stop in mobile mode.
    pub pause_rounds: u32,
}

impl SinkState {
    pub fn new(mode: SinkMode, field_m: f64, step_m: f64, pause_rounds: u32) -> Result<Self> {
        if !(field_m.is_finite() && field_m > 0.0) {
            return Err(SimError::invalid("field side must be > 0"));
        }
        if !(step_m.is_finite() && step_m > 0.0) {
            return Err(SimError::invalid("sink step must be > 0"));
        }
        if pause_rounds == 0 {
            return Err(SimError::invalid("sink pause must be >= 1 round"));
        }
        Ok(SinkState {
            mode,
            field_m,
            step_m,
            pause_rounds,
        })
    }

    /// Number of stops from one end of the top edge to the other.
    fn stops_per_pass(&self) -> u64 {
        (self.field_m / self.step_m - 1e-9).ceil().max(1.0) as u64
    }

    /// Rounds after which the mobile sweep repeats.
    pub fn sweep_period(&self) -> u64 {
        2 * self.stops_per_pass() * self.pause_rounds as u64
    }

    pub fn position(&self, round: u32) -> Point {
        let m = self.field_m;
        match self.mode {
            SinkMode::StaticCenter => Point::new(m / 2.0, m / 2.0),
            SinkMode::StaticTop => Point::new(m / 2.0, m),
            SinkMode::MobileTop => {
                let n = self.stops_per_pass();
                let stop = round as u64 / self.pause_rounds as u64;
                let phase = stop % (2 * n);
                let k = if phase <= n { phase } else { 2 * n - phase };
                Point::new((k as f64 * self.step_m).min(m), m)
            }
        }
    }
}

pub fn sink_position(sink: &SinkState, round: u32) -> Point {
    sink.position(round)
}

/// Distance from a head to wherever the sink is during `round`.
pub fn collection_distance(sink: &SinkState, ch_position: Point, round: u32) -> f64 {
    ch_position.distance(&sink.position(round))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sink(mode: SinkMode) -> SinkState {
        SinkState::new(mode, 100.0, 10.0, 1).unwrap()
    }

    #[test]
    fn static_positions() {
        for r in [0, 1, 999, 4999] {
            assert_eq!(sink(SinkMode::StaticCenter).position(r), Point::new(50.0, 50.0));
            assert_eq!(sink(SinkMode::StaticTop).position(r), Point::new(50.0, 100.0));
        }
    }

    #[test]
    fn mobile_ping_pong() {
        let s = sink(SinkMode::MobileTop);
        let xs: Vec<f64> = (0..=22).map(|r| s.position(r).x).collect();
        let mut want: Vec<f64> = (0..=10).map(|k| 10.0 * k as f64).collect();
        want.extend((0..10).rev().map(|k| 10.0 * k as f64));
        want.extend([10.0, 20.0]);
        assert_eq!(xs, want);
        assert!((0..100).all(|r| s.position(r).y == 100.0));
        assert_eq!(s.sweep_period(), 20);
    }

    #[test]
    fn pause_holds_position() {
        let s = SinkState::new(SinkMode::MobileTop, 100.0, 10.0, 3).unwrap();
        assert_eq!(s.position(0), s.position(2));
        assert_eq!(s.position(3).x, 10.0);
        assert_eq!(s.sweep_period(), 60);
    }

    #[test]
    fn uneven_step_clamps_to_edge() {
        let s = SinkState::new(SinkMode::MobileTop, 100.0, 30.0, 1).unwrap();
        let xs: Vec<f64> = (0..8).map(|r| s.position(r).x).collect();
        assert_eq!(xs, vec![0.0, 30.0, 60.0, 90.0, 100.0, 90.0, 60.0, 30.0]);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(SinkState::new(SinkMode::MobileTop, 100.0, 0.0, 1).is_err());
        assert!(SinkState::new(SinkMode::MobileTop, 100.0, 10.0, 0).is_err());
        assert!(SinkState::new(SinkMode::MobileTop, -1.0, 10.0, 1).is_err());
    }

    #[test]
    fn collection_distance_examples() {
        let c = sink(SinkMode::StaticCenter);
        assert_eq!(collection_distance(&c, Point::new(50.0, 50.0), 3), 0.0);
        assert!((collection_distance(&c, Point::new(0.0, 0.0), 0) - 5000f64.sqrt()).abs() < 1e-12);
        let m = sink(SinkMode::MobileTop);
        assert_eq!(collection_distance(&m, Point::new(0.0, 100.0), 0), 0.0);
    }

    #[test]
    fn parse_modes() {
        assert_eq!("mobile_top".parse::<SinkMode>().unwrap(), SinkMode::MobileTop);
        assert_eq!("Static-Center".parse::<SinkMode>().unwrap(), SinkMode::StaticCenter);
        assert!("orbit".parse::<SinkMode>().is_err());
    }

    proptest! {
        #[test]
        fn mobile_is_periodic(r in 0u32..100_000, step in 1.0f64..60.0, pause in 1u32..6) {
            let s = SinkState::new(SinkMode::MobileTop, 100.0, step, pause).unwrap();
            let period = s.sweep_period() as u32;
            prop_assert_eq!(s.position(r), s.position(r + period));
            prop_assert_eq!(s.position(r), sink_position(&s, r));
        }

        #[test]
        fn static_distance_is_round_invariant(x in 0.0f64..100.0, y in 0.0f64..100.0, r in 0u32..10_000) {
            for mode in [SinkMode::StaticCenter, SinkMode::StaticTop] {
                let s = sink(mode);
                let p = Point::new(x, y);
                prop_assert_eq!(collection_distance(&s, p, r), collection_distance(&s, p, 0));
            }
        }

        #[test]
        fn sweep_beats_center_for_top_edge_points(x in 0.0f64..=100.0) {
            let s = sink(SinkMode::MobileTop);
            let p = Point::new(x, 100.0);
            let period = s.sweep_period() as u32;
            let mean = (0..period).map(|r| collection_distance(&s, p, r)).sum::<f64>() / period as f64;
            let center = collection_distance(&sink(SinkMode::StaticCenter), p, 0);
            prop_assert!(mean < center);
        }
    }
}
