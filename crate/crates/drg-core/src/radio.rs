//! Broadcast channel with disk-model reception: a frame is heard at
//! transmission end by every node within range of the sender unless another
//! in-range transmission overlapped the interval at that receiver, the
//! receiver itself was transmitting, or an independent loss draw fails.

use serde::{Deserialize, Serialize};

use crate::geom::{dist, Point};
use crate::{MessageId, NodeId};

/// On-air frame classes; persistence rebroadcasts are tallied separately
/// from data forwards in the metrics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum FrameKind {
    Data,
    Persistence,
}

/// The simulated on-air unit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Frame {
    pub message: MessageId,
    pub origin: NodeId,
    pub sender: NodeId,
    /// Sender position at transmission start; receivers measure their
    /// backoff distance against this.
    pub sender_pos: Point,
    /// Hops from the origin to the sender; 0 on frames the origin sends.
    pub hop_count: u32,
    /// Payload plus header bytes.
    pub network_bytes: u64,
    pub kind: FrameKind,
}

/// Channel parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadioParams {
    pub r_tx: f64,
    pub bitrate: f64,
    pub header_bytes: u64,
    pub p_loss: f64,
}

impl RadioParams {
    /// Seconds a frame of `network_bytes` occupies the channel.
    pub fn airtime(&self, network_bytes: u64) -> f64 {
        network_bytes as f64 * 8.0 / self.bitrate
    }
}

/// Identifier of one transmission, used to match its end event.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TxId(u64);

#[derive(Debug, Clone)]
struct Transmission {
    id: u64,
    frame: Frame,
    start: f64,
    end: f64,
}

/// Outcome of one completed transmission.
#[derive(Debug, Clone)]
pub struct TxOutcome {
    pub frame: Frame,
    pub delivered: Vec<NodeId>,
    /// Receptions destroyed by overlapping in-range transmissions
    /// (including the receiver transmitting itself).
    pub collision_losses: u64,
    /// Receptions dropped by the random loss draw.
    pub random_losses: u64,
}

/// Channel state: recent and in-flight transmissions plus per-node busy
/// times.
pub struct Radio {
    params: RadioParams,
    log: Vec<Transmission>,
    busy_until: Vec<f64>,
    next_id: u64,
}

impl Radio {
    pub fn new(params: RadioParams, node_count: usize) -> Self {
        assert!(params.r_tx > 0.0 && params.bitrate > 0.0);
        assert!((0.0..1.0).contains(&params.p_loss));
        Radio {
            params,
            log: Vec::new(),
            busy_until: vec![f64::NEG_INFINITY; node_count],
            next_id: 0,
        }
    }

    pub fn params(&self) -> &RadioParams {
        &self.params
    }

    /// True while `node` has a frame on the air at `now`.
    pub fn is_transmitting(&self, node: NodeId, now: f64) -> bool {
        self.busy_until[node.0 as usize] > now
    }

    /// End of the node's current transmission (or a past instant if idle).
    pub fn busy_until(&self, node: NodeId) -> f64 {
        self.busy_until[node.0 as usize]
    }

    /// Starts a broadcast at `now`; returns the transmission id and its end
    /// time. The caller schedules the end event and later calls `finish`.
    pub fn begin(&mut self, frame: Frame, now: f64) -> (TxId, f64) {
        assert!(
            !self.is_transmitting(frame.sender, now),
            "node {} began a broadcast while already transmitting",
            frame.sender.0
        );
        let end = now + self.params.airtime(frame.network_bytes);
        let id = self.next_id;
        self.next_id += 1;
        self.log.push(Transmission { id, frame, start: now, end });
        self.busy_until[frame.sender.0 as usize] = end;
        (TxId(id), end)
    }

    /// Evaluates reception of a transmission at its end time. `positions`
    /// are the receiver positions now; `loss_draw` supplies one uniform
    /// [0,1) number per candidate receiver, in ascending node order.
    pub fn finish(
        &mut self,
        tx: TxId,
        now: f64,
        positions: &[Point],
        mut loss_draw: impl FnMut(NodeId) -> f64,
    ) -> TxOutcome {
        let t = self
            .log
            .iter()
            .rev()
            .find(|t| t.id == tx.0)
            .expect("transmission end without a matching start")
            .clone();
        debug_assert_eq!(t.end, now);

        let mut out = TxOutcome {
            frame: t.frame,
            delivered: Vec::new(),
            collision_losses: 0,
            random_losses: 0,
        };
        for (i, pos) in positions.iter().enumerate() {
            let node = NodeId(i as u32);
            if node == t.frame.sender {
                continue;
            }
            if dist(*pos, t.frame.sender_pos) > self.params.r_tx {
                continue;
            }
            // destroyed if any other transmission audible here (or the
            // receiver's own) overlapped the interval; touching endpoints
            // do not interfere
            let jammed = self.log.iter().any(|o| {
                o.id != t.id
                    && o.start < t.end
                    && o.end > t.start
                    && (o.frame.sender == node
                        || dist(*pos, o.frame.sender_pos) <= self.params.r_tx)
            });
            if jammed {
                out.collision_losses += 1;
                continue;
            }
            if self.params.p_loss > 0.0 && loss_draw(node) < self.params.p_loss {
                out.random_losses += 1;
                continue;
            }
            out.delivered.push(node);
        }
        self.prune(now);
        out
    }

    /// Drops log entries that can no longer overlap any in-flight or future
    /// transmission. Entries ending exactly at `now` still have their end
    /// event queued and must survive.
    fn prune(&mut self, now: f64) {
        let threshold = self
            .log
            .iter()
            .filter(|t| t.end >= now)
            .map(|t| t.start)
            .fold(now, f64::min);
        self.log.retain(|t| t.end >= now || t.end > threshold);
    }

    /// Nodes at distance <= r from `p` (boundary inclusive).
    pub fn neighbors_in_range(p: Point, r: f64, positions: &[Point]) -> Vec<NodeId> {
        positions
            .iter()
            .enumerate()
            .filter(|(_, q)| dist(p, **q) <= r)
            .map(|(i, _)| NodeId(i as u32))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn frame(sender: u32, pos: Point) -> Frame {
        Frame {
            message: MessageId { origin: NodeId(0), seq: 0 },
            origin: NodeId(0),
            sender: NodeId(sender),
            sender_pos: pos,
            hop_count: 0,
            network_bytes: 240,
            kind: FrameKind::Data,
        }
    }

    fn params() -> RadioParams {
        RadioParams { r_tx: 300.0, bitrate: 6e6, header_bytes: 40, p_loss: 0.0 }
    }

    #[test]
    fn airtime_is_bits_over_bitrate() {
        let p = params();
        assert_eq!(p.airtime(240), 240.0 * 8.0 / 6e6);
    }

    #[test]
    fn single_transmission_delivers_within_disk() {
        let positions = [
            Point::new(0.0, 0.0),
            Point::new(150.0, 0.0),
            Point::new(300.0, 0.0), // boundary: included
            Point::new(300.1, 0.0), // outside
        ];
        let mut r = Radio::new(params(), positions.len());
        let (tx, end) = r.begin(frame(0, positions[0]), 1.0);
        let out = r.finish(tx, end, &positions, |_| 0.9);
        assert_eq!(out.delivered, [NodeId(1), NodeId(2)]);
        assert_eq!(out.collision_losses, 0);
    }

    #[test]
    fn overlapping_in_range_transmissions_destroy_both() {
        // senders 0 and 1 are in range of receiver 2 and of each other
        let positions = [
            Point::new(0.0, 0.0),
            Point::new(100.0, 0.0),
            Point::new(50.0, 10.0),
        ];
        let mut r = Radio::new(params(), positions.len());
        let (t0, e0) = r.begin(frame(0, positions[0]), 0.0);
        let (t1, e1) = r.begin(frame(1, positions[1]), 0.0001);
        let out0 = r.finish(t0, e0, &positions, |_| 0.9);
        // sender 1 was transmitting during t0, so it cannot receive either
        assert!(out0.delivered.is_empty());
        assert_eq!(out0.collision_losses, 2);
        let out1 = r.finish(t1, e1, &positions, |_| 0.9);
        assert!(out1.delivered.is_empty());
        assert_eq!(out1.collision_losses, 2);
    }

    #[test]
    fn collision_requires_interferer_in_receiver_range() {
        // receiver 2 hears sender 0; sender 1 is out of range of 2 but its
        // transmission overlaps. Only 3, in range of both, loses the frame.
        let positions = [
            Point::new(0.0, 0.0),
            Point::new(500.0, 0.0),
            Point::new(-100.0, 0.0),
            Point::new(250.0, 0.0),
        ];
        let mut r = Radio::new(params(), positions.len());
        let (t0, e0) = r.begin(frame(0, positions[0]), 0.0);
        let (_t1, _e1) = r.begin(frame(1, positions[1]), 0.0001);
        let out0 = r.finish(t0, e0, &positions, |_| 0.9);
        assert_eq!(out0.delivered, [NodeId(2)]);
        assert_eq!(out0.collision_losses, 1);
    }

    #[test]
    fn touching_intervals_do_not_interfere() {
        let positions = [Point::new(0.0, 0.0), Point::new(10.0, 0.0), Point::new(20.0, 0.0)];
        let mut r = Radio::new(params(), positions.len());
        let (t0, e0) = r.begin(frame(0, positions[0]), 0.0);
        let out0 = r.finish(t0, e0, &positions, |_| 0.9);
        assert_eq!(out0.delivered, [NodeId(1), NodeId(2)]);
        // second transmission starts exactly at the first's end
        let (t1, e1) = r.begin(frame(1, positions[1]), e0);
        let out1 = r.finish(t1, e1, &positions, |_| 0.9);
        assert_eq!(out1.delivered, [NodeId(0), NodeId(2)]);
    }

    #[test]
    fn random_loss_uses_draws_in_node_order() {
        let positions = [Point::new(0.0, 0.0), Point::new(10.0, 0.0), Point::new(20.0, 0.0)];
        let mut r = Radio::new(RadioParams { p_loss: 0.5, ..params() }, positions.len());
        let (t0, e0) = r.begin(frame(0, positions[0]), 0.0);
        let mut drawn = Vec::new();
        let out = r.finish(t0, e0, &positions, |n| {
            drawn.push(n);
            if n == NodeId(1) {
                0.2 // below p_loss: dropped
            } else {
                0.7
            }
        });
        assert_eq!(drawn, [NodeId(1), NodeId(2)]);
        assert_eq!(out.delivered, [NodeId(2)]);
        assert_eq!(out.random_losses, 1);
    }

    #[test]
    fn reception_is_symmetric_for_static_pairs() {
        let positions = [Point::new(0.0, 0.0), Point::new(299.0, 17.0)];
        let mut r = Radio::new(params(), positions.len());
        let (t0, e0) = r.begin(frame(0, positions[0]), 0.0);
        let a = r.finish(t0, e0, &positions, |_| 0.9);
        let (t1, e1) = r.begin(frame(1, positions[1]), 1.0);
        let b = r.finish(t1, e1, &positions, |_| 0.9);
        assert_eq!(a.delivered, [NodeId(1)]);
        assert_eq!(b.delivered, [NodeId(0)]);
    }

    #[test]
    fn neighbors_in_range_chain() {
        let positions = [
            Point::new(0.0, 0.0),
            Point::new(270.0, 0.0),
            Point::new(540.0, 0.0),
        ];
        let n = |p: Point| Radio::neighbors_in_range(p, 300.0, &positions);
        assert_eq!(n(positions[0]), [NodeId(0), NodeId(1)]);
        assert_eq!(n(positions[1]), [NodeId(0), NodeId(1), NodeId(2)]);
        assert_eq!(n(positions[2]), [NodeId(1), NodeId(2)]);
        assert!(Radio::neighbors_in_range(Point::new(0.0, 0.0), 10.0, &[]).is_empty());
    }

    #[test]
    #[should_panic(expected = "already transmitting")]
    fn concurrent_self_transmission_rejected() {
        let positions = [Point::new(0.0, 0.0)];
        let mut r = Radio::new(params(), positions.len());
        r.begin(frame(0, positions[0]), 0.0);
        r.begin(frame(0, positions[0]), 0.0001);
    }

    #[test]
    fn log_pruning_keeps_overlap_candidates() {
        let positions = [Point::new(0.0, 0.0), Point::new(10.0, 0.0), Point::new(20.0, 0.0)];
        let mut r = Radio::new(params(), positions.len());
        // long transmission from 0 spanning [0, 3.2ms], short from 1 inside
        let big = Frame { network_bytes: 2400, ..frame(0, positions[0]) };
        let (t0, e0) = r.begin(big, 0.0);
        let (t1, e1) = r.begin(frame(1, positions[1]), 0.0002);
        let out1 = r.finish(t1, e1, &positions, |_| 0.9);
        assert!(out1.delivered.is_empty(), "short frame jammed by the long one");
        // the short transmission must still be in the log when the long one
        // completes, destroying it at receiver 2
        let out0 = r.finish(t0, e0, &positions, |_| 0.9);
        assert!(out0.delivered.is_empty());
    }

    #[test]
    fn simultaneous_ends_both_resolve() {
        // equal start and length: first finish must not prune the second
        // before its own end event runs
        let positions = [Point::new(0.0, 0.0), Point::new(10.0, 0.0), Point::new(20.0, 0.0)];
        let mut r = Radio::new(params(), positions.len());
        let (t0, e0) = r.begin(frame(0, positions[0]), 1.0);
        let (t1, e1) = r.begin(frame(1, positions[1]), 1.0);
        assert_eq!(e0, e1);
        let a = r.finish(t0, e0, &positions, |_| 0.9);
        let b = r.finish(t1, e1, &positions, |_| 0.9);
        assert!(a.delivered.is_empty() && b.delivered.is_empty());
        assert_eq!(a.collision_losses, 2);
        assert_eq!(b.collision_losses, 2);
    }
}
