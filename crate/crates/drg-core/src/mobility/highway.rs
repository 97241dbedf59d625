//! Straight multi-lane highway: vehicles cruise at a per-lane speed and
//! queue behind a stopped vehicle at a fixed standoff gap.

use serde::{Deserialize, Serialize};

use super::{RoadRef, VehicleState, STANDOFF_GAP_M};
use crate::geom::Point;
use crate::rng::{Purpose, RandomStreams};
use crate::NodeId;

/// Fractional part of the golden ratio; spreads per-lane placement phases
/// so cross-lane distances are all distinct.
const LANE_PHASE: f64 = 0.618_033_988_749_895;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HighwayConfig {
    pub length_m: f64,
    pub lanes_per_direction: u32,
    pub lane_width_m: f64,
    /// Vehicles per kilometer per lane.
    pub density: f64,
    pub v_max: f64,
}

impl Default for HighwayConfig {
    fn default() -> Self {
        HighwayConfig {
            length_m: 10_000.0,
            lanes_per_direction: 3,
            lane_width_m: 4.0,
            density: 10.0,
            v_max: 33.33,
        }
    }
}

#[derive(Debug, Clone)]
struct Lane {
    /// +1 when the lane travels toward +x, -1 toward -x.
    dir: f64,
    speed: f64,
    /// Member ids ordered front of queue first (furthest along travel).
    members: Vec<NodeId>,
}

pub struct HighwayWorld {
    cfg: HighwayConfig,
    lanes: Vec<Lane>,
    vehicles: Vec<VehicleState>,
    lead: NodeId,
}

impl HighwayWorld {
    /// Places vehicles evenly per lane in both directions, with a per-lane
    /// phase offset, and draws one cruise speed per lane in
    /// [0.8 v_max, v_max].
    pub fn new(cfg: HighwayConfig, streams: &mut RandomStreams) -> Self {
        assert!(cfg.density > 0.0 && cfg.v_max > 0.0);
        assert!(cfg.length_m > 0.0 && cfg.lane_width_m > 0.0 && cfg.lanes_per_direction > 0);
        let per_lane = ((cfg.density * cfg.length_m / 1000.0).floor() as usize).max(1);
        let spacing = cfg.length_m / per_lane as f64;

        let mut lanes = Vec::new();
        let mut vehicles = Vec::new();
        for (li, dir) in [1.0, -1.0]
            .iter()
            .flat_map(|d| std::iter::repeat_n(*d, cfg.lanes_per_direction as usize))
            .enumerate()
        {
            let lane_idx = (li as u32) % cfg.lanes_per_direction;
            let y = dir * (lane_idx as f64 + 0.5) * cfg.lane_width_m;
            let speed =
                streams.uniform(li as u64, Purpose::LaneSpeed, 0.8 * cfg.v_max, cfg.v_max);
            let offset = (li as f64 * LANE_PHASE).fract() * spacing;
            let mut members = Vec::with_capacity(per_lane);
            for k in 0..per_lane {
                let id = NodeId(vehicles.len() as u32);
                vehicles.push(VehicleState {
                    id,
                    pos: Point::new(k as f64 * spacing + offset, y),
                    vel: (dir * speed, 0.0),
                    stopped: false,
                    road: RoadRef::HighwayLane { lane: li as u32 },
                });
                members.push(id);
            }
            // front of queue = furthest along the direction of travel
            if dir > 0.0 {
                members.reverse();
            }
            lanes.push(Lane { dir, speed, members });
        }

        // designated lead: forward-direction vehicle furthest along +x
        let lead = vehicles
            .iter()
            .filter(|v| v.vel.0 > 0.0)
            .max_by(|a, b| a.pos.x.total_cmp(&b.pos.x))
            .map(|v| v.id)
            .expect("forward lanes are never empty");

        HighwayWorld { cfg, lanes, vehicles, lead }
    }

    pub fn config(&self) -> &HighwayConfig {
        &self.cfg
    }

    pub fn vehicles(&self) -> &[VehicleState] {
        &self.vehicles
    }

    /// The designated forward-direction lead vehicle (crash candidate).
    pub fn lead(&self) -> NodeId {
        self.lead
    }

    pub fn stop(&mut self, node: NodeId) {
        let v = &mut self.vehicles[node.0 as usize];
        v.stopped = true;
        v.vel = (0.0, 0.0);
    }

    /// Advances each lane front-to-back; followers clamp to a standoff gap
    /// behind the vehicle ahead and never move backward.
    pub fn tick(&mut self, dt: f64) {
        for lane in &self.lanes {
            let mut cap = f64::INFINITY;
            for &id in &lane.members {
                let v = &mut self.vehicles[id.0 as usize];
                // distance along travel direction
                let u = lane.dir * v.pos.x;
                if v.stopped {
                    cap = u - STANDOFF_GAP_M;
                    continue;
                }
                let free = u + lane.speed * dt;
                let u_new = free.min(cap).max(u);
                v.pos.x = lane.dir * u_new;
                v.vel.0 = if u_new == free {
                    lane.dir * lane.speed
                } else {
                    lane.dir * (u_new - u) / dt
                };
                cap = u_new - STANDOFF_GAP_M;
            }
        }
    }
}
