//! Free-placement world: nodes at explicit positions with constant
//! velocities. Used for constructed scenes (chains, clusters, traversers).

use super::{RoadRef, VehicleState};
use crate::geom::Point;
use crate::NodeId;

pub struct FreeWorld {
    vehicles: Vec<VehicleState>,
    v_max: f64,
}

impl FreeWorld {
    /// Builds a world from (position, velocity) pairs; `v_max` bounds the
    /// protocol's persistence cadence, not the given velocities.
    pub fn new(nodes: &[(Point, (f64, f64))], v_max: f64) -> Self {
        assert!(v_max > 0.0);
        let vehicles = nodes
            .iter()
            .enumerate()
            .map(|(i, (pos, vel))| VehicleState {
                id: NodeId(i as u32),
                pos: *pos,
                vel: *vel,
                stopped: *vel == (0.0, 0.0),
                road: RoadRef::Free,
            })
            .collect();
        FreeWorld { vehicles, v_max }
    }

    /// All nodes static at the given positions.
    pub fn fixed(points: &[Point]) -> Self {
        let nodes: Vec<_> = points.iter().map(|p| (*p, (0.0, 0.0))).collect();
        FreeWorld::new(&nodes, 1.0)
    }

    pub fn vehicles(&self) -> &[VehicleState] {
        &self.vehicles
    }

    pub fn v_max(&self) -> f64 {
        self.v_max
    }

    pub fn stop(&mut self, node: NodeId) {
        let v = &mut self.vehicles[node.0 as usize];
        v.stopped = true;
        v.vel = (0.0, 0.0);
    }

    pub fn tick(&mut self, dt: f64) {
        for v in &mut self.vehicles {
            if v.stopped {
                continue;
            }
            v.pos.x += v.vel.0 * dt;
            v.pos.y += v.vel.1 * dt;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_velocity_advance() {
        let mut w = FreeWorld::new(
            &[(Point::new(0.0, 0.0), (10.0, -5.0)), (Point::new(3.0, 4.0), (0.0, 0.0))],
            30.0,
        );
        assert!(w.vehicles()[1].stopped);
        for _ in 0..10 {
            w.tick(0.5);
        }
        assert_eq!(w.vehicles()[0].pos, Point::new(50.0, -25.0));
        assert_eq!(w.vehicles()[1].pos, Point::new(3.0, 4.0));
    }

    #[test]
    fn stop_freezes_a_mover() {
        let mut w = FreeWorld::new(&[(Point::new(0.0, 0.0), (10.0, 0.0))], 30.0);
        w.tick(1.0);
        w.stop(NodeId(0));
        w.tick(1.0);
        assert_eq!(w.vehicles()[0].pos, Point::new(10.0, 0.0));
    }
}
