//! Core library for a deterministic discrete-event simulator of geocast
//! message dissemination in vehicular networks: a distance-backoff protocol
//! with implicit acknowledgement, angle-based redundancy suppression and time
//! persistence, plus a restricted-flooding baseline, over highway and
//! city-grid mobility.

use serde::{Deserialize, Serialize};

pub mod config;
pub mod engine;
pub mod geom;
pub mod metrics;
pub mod mobility;
pub mod output;
pub mod protocol;
pub mod radio;
pub mod rng;
pub mod sim;

pub use config::{ScenarioConfig, ScenarioKind, Violation};
pub use geom::{Point, RectRegion};
pub use metrics::{RunMeta, RunMetrics};
pub use mobility::{Mobility, VehicleState};
pub use protocol::{DrgParams, FloodParams, GeocastMessage, ProtocolKind};
pub use radio::{Frame, FrameKind, RadioParams};
pub use sim::{SimSpec, Simulation};

/// Index of a vehicle in the world; doubles as the network address.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize,
)]
pub struct NodeId(pub u32);

/// Message identity: originating node plus a per-origin sequence number.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize,
)]
pub struct MessageId {
    pub origin: NodeId,
    pub seq: u32,
}
