//! Vehicle position generators and tick-driven updaters: a straight
//! multi-lane highway with a crash queue, a Manhattan street grid with
//! random turning, and a free-placement world for constructed scenes.

pub mod free;
pub mod grid;
pub mod highway;

use serde::{Deserialize, Serialize};

use crate::geom::Point;
use crate::rng::RandomStreams;
use crate::NodeId;

pub use free::FreeWorld;
pub use grid::{GridConfig, GridWorld};
pub use highway::{HighwayConfig, HighwayWorld};

/// Minimum bumper-to-bumper gap a queued highway vehicle keeps behind the
/// vehicle ahead.
pub const STANDOFF_GAP_M: f64 = 5.0;

/// Street axis in the grid world.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Axis {
    Horizontal,
    Vertical,
}

/// Which road a vehicle is bound to.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RoadRef {
    /// Index into the highway's lane table.
    HighwayLane { lane: u32 },
    /// Grid street: `line` is the fixed-coordinate line index; `heading` is
    /// the sign of motion along the axis.
    GridStreet { axis: Axis, line: u32, heading: i8 },
    /// Unconstrained (constructed scenes).
    Free,
}

/// Kinematic state of one vehicle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VehicleState {
    pub id: NodeId,
    pub pos: Point,
    /// Velocity vector in meters/second.
    pub vel: (f64, f64),
    pub stopped: bool,
    pub road: RoadRef,
}

impl VehicleState {
    pub fn speed(&self) -> f64 {
        self.vel.0.hypot(self.vel.1)
    }
}

/// A mobility world: owns all vehicle states and advances them in ticks.
pub enum Mobility {
    Highway(HighwayWorld),
    Grid(GridWorld),
    Free(FreeWorld),
}

impl Mobility {
    pub fn vehicles(&self) -> &[VehicleState] {
        match self {
            Mobility::Highway(w) => w.vehicles(),
            Mobility::Grid(w) => w.vehicles(),
            Mobility::Free(w) => w.vehicles(),
        }
    }

    pub fn node_count(&self) -> usize {
        self.vehicles().len()
    }

    /// Advances every vehicle by `dt` seconds.
    pub fn tick(&mut self, dt: f64, streams: &mut RandomStreams) {
        assert!(dt > 0.0);
        match self {
            Mobility::Highway(w) => w.tick(dt),
            Mobility::Grid(w) => w.tick(dt, streams),
            Mobility::Free(w) => w.tick(dt),
        }
    }

    /// Permanently halts a vehicle (crash or pinned source).
    pub fn stop(&mut self, node: NodeId) {
        match self {
            Mobility::Highway(w) => w.stop(node),
            Mobility::Grid(w) => w.stop(node),
            Mobility::Free(w) => w.stop(node),
        }
    }

    /// Highest speed any vehicle may reach.
    pub fn v_max(&self) -> f64 {
        match self {
            Mobility::Highway(w) => w.config().v_max,
            Mobility::Grid(w) => w.config().v_max,
            Mobility::Free(w) => w.v_max(),
        }
    }
}
