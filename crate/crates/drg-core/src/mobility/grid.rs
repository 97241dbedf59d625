//! Manhattan street grid: vehicles walk street segments at a fixed speed,
//! turning uniformly at random (no U-turns) at intersections. The message
//! source is pinned stopped at the grid center.

use serde::{Deserialize, Serialize};

use super::{Axis, RoadRef, VehicleState};
use crate::geom::Point;
use crate::rng::{Purpose, RandomStreams};
use crate::NodeId;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfig {
    pub side_m: f64,
    pub block_m: f64,
    /// Total vehicles including the pinned source.
    pub vehicle_count: u32,
    pub v_max: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        // 50 km/h urban speed limit
        GridConfig { side_m: 2000.0, block_m: 100.0, vehicle_count: 100, v_max: 13.89 }
    }
}

/// Exact on-street position: the vehicle sits `offset` meters past
/// intersection `from_node` along `heading`, on line `line` of `axis`.
#[derive(Debug, Clone, Copy)]
struct Walk {
    axis: Axis,
    line: u32,
    from_node: u32,
    heading: i8,
    offset: f64,
    speed: f64,
}

pub struct GridWorld {
    cfg: GridConfig,
    /// Intersections per axis line.
    n_nodes: u32,
    vehicles: Vec<VehicleState>,
    walks: Vec<Option<Walk>>,
}

impl GridWorld {
    /// Vehicle 0 is the source, stopped at the grid center; the rest are
    /// placed uniformly over total street length with random heading and a
    /// per-vehicle speed in [0.8 v_max, v_max].
    pub fn new(cfg: GridConfig, streams: &mut RandomStreams) -> Self {
        assert!(cfg.side_m > 0.0 && cfg.block_m > 0.0 && cfg.v_max > 0.0);
        let lines = cfg.side_m / cfg.block_m;
        assert!(
            (lines - lines.round()).abs() < 1e-9 && lines >= 1.0,
            "grid side must be a multiple of the block size"
        );
        assert!(cfg.vehicle_count >= 1);
        let n_nodes = lines.round() as u32 + 1;

        let mut vehicles = Vec::with_capacity(cfg.vehicle_count as usize);
        let mut walks = Vec::with_capacity(cfg.vehicle_count as usize);
        let center = Point::new(cfg.side_m / 2.0, cfg.side_m / 2.0);
        vehicles.push(VehicleState {
            id: NodeId(0),
            pos: center,
            vel: (0.0, 0.0),
            stopped: true,
            road: RoadRef::GridStreet { axis: Axis::Horizontal, line: n_nodes / 2, heading: 1 },
        });
        walks.push(None);

        let street_total = 2.0 * n_nodes as f64 * cfg.side_m;
        for i in 1..cfg.vehicle_count {
            let id = NodeId(i);
            let s = streams.uniform(i as u64, Purpose::Placement, 0.0, street_total);
            let half = n_nodes as f64 * cfg.side_m;
            let (axis, rest) = if s < half {
                (Axis::Horizontal, s)
            } else {
                (Axis::Vertical, s - half)
            };
            let line = ((rest / cfg.side_m).floor() as u32).min(n_nodes - 1);
            let t = rest - line as f64 * cfg.side_m;
            let heading: i8 = if streams.uniform_int(i as u64, Purpose::Turn, 2) == 0 {
                1
            } else {
                -1
            };
            let (from_node, offset) = if heading > 0 {
                let f = (t / cfg.block_m).floor().min((n_nodes - 2) as f64);
                (f as u32, t - f * cfg.block_m)
            } else {
                let c = (t / cfg.block_m).ceil().max(1.0);
                (c as u32, c * cfg.block_m - t)
            };
            let speed = streams.uniform(i as u64, Purpose::VehicleSpeed, 0.8 * cfg.v_max, cfg.v_max);
            let walk = Walk { axis, line, from_node, heading, offset, speed };
            vehicles.push(VehicleState {
                id,
                pos: walk_pos(&walk, cfg.block_m),
                vel: walk_vel(&walk),
                stopped: false,
                road: RoadRef::GridStreet { axis, line, heading },
            });
            walks.push(Some(walk));
        }
        GridWorld { cfg, n_nodes, vehicles, walks }
    }

    pub fn config(&self) -> &GridConfig {
        &self.cfg
    }

    pub fn vehicles(&self) -> &[VehicleState] {
        &self.vehicles
    }

    /// The pinned source vehicle at the grid center.
    pub fn source(&self) -> NodeId {
        NodeId(0)
    }

    pub fn stop(&mut self, node: NodeId) {
        let v = &mut self.vehicles[node.0 as usize];
        v.stopped = true;
        v.vel = (0.0, 0.0);
        self.walks[node.0 as usize] = None;
    }

    /// Advances every walking vehicle by speed * dt of street distance,
    /// turning at intersections; positions snap exactly onto street lines.
    pub fn tick(&mut self, dt: f64, streams: &mut RandomStreams) {
        let block = self.cfg.block_m;
        for i in 0..self.walks.len() {
            let Some(mut w) = self.walks[i] else { continue };
            let mut rem = w.speed * dt;
            loop {
                let to_next = block - w.offset;
                if rem < to_next {
                    w.offset += rem;
                    break;
                }
                rem -= to_next;
                let node = (w.from_node as i64 + w.heading as i64) as u32;
                let (gx, gy) = match w.axis {
                    Axis::Horizontal => (node, w.line),
                    Axis::Vertical => (w.line, node),
                };
                let (axis, heading) =
                    choose_direction(self.n_nodes, i as u64, gx, gy, w.axis, w.heading, streams);
                let (line, from_node) = match axis {
                    Axis::Horizontal => (gy, gx),
                    Axis::Vertical => (gx, gy),
                };
                w = Walk { axis, line, from_node, heading, offset: 0.0, speed: w.speed };
            }
            self.walks[i] = Some(w);
            let v = &mut self.vehicles[i];
            v.pos = walk_pos(&w, block);
            v.vel = walk_vel(&w);
            v.road = RoadRef::GridStreet { axis: w.axis, line: w.line, heading: w.heading };
        }
    }
}

/// Uniform choice among the streets leaving intersection (gx, gy), excluding
/// the reverse of the arrival direction; reverses only at a dead end
/// (impossible on a full grid, kept for safety).
fn choose_direction(
    n_nodes: u32,
    node: u64,
    gx: u32,
    gy: u32,
    arrived_axis: Axis,
    arrived_heading: i8,
    streams: &mut RandomStreams,
) -> (Axis, i8) {
    let last = n_nodes - 1;
    let mut options: Vec<(Axis, i8)> = Vec::with_capacity(4);
    if gx < last {
        options.push((Axis::Horizontal, 1));
    }
    if gx > 0 {
        options.push((Axis::Horizontal, -1));
    }
    if gy < last {
        options.push((Axis::Vertical, 1));
    }
    if gy > 0 {
        options.push((Axis::Vertical, -1));
    }
    options.retain(|&(a, h)| !(a == arrived_axis && h == -arrived_heading));
    if options.is_empty() {
        return (arrived_axis, -arrived_heading);
    }
    options[streams.uniform_int(node, Purpose::Turn, options.len() as u32) as usize]
}

fn walk_pos(w: &Walk, block: f64) -> Point {
    let along = w.from_node as f64 * block + w.heading as f64 * w.offset;
    let fixed = w.line as f64 * block;
    match w.axis {
        Axis::Horizontal => Point::new(along, fixed),
        Axis::Vertical => Point::new(fixed, along),
    }
}

fn walk_vel(w: &Walk) -> (f64, f64) {
    let v = w.heading as f64 * w.speed;
    match w.axis {
        Axis::Horizontal => (v, 0.0),
        Axis::Vertical => (0.0, v),
    }
}
