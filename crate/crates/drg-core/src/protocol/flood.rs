//! Restricted-flooding baseline: every first reception inside the ZOF is
//! relayed exactly once after a random slotted delay, bounded by a hop TTL.
//! Duplicates neither cancel nor reschedule anything.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::{Ctx, GeocastMessage};
use crate::engine::TimerHandle;
use crate::geom::in_region;
use crate::radio::{Frame, FrameKind};
use crate::rng::Purpose;
use crate::sim::EventKind;
use crate::{MessageId, NodeId};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FloodParams {
    /// Backoff slot length in seconds.
    pub slot: f64,
    /// Contention window in slots.
    pub cw_slots: u32,
    /// Maximum hops a frame may travel from the origin.
    pub ttl_hops: u32,
}

impl Default for FloodParams {
    fn default() -> Self {
        FloodParams { slot: 20e-6, cw_slots: 32, ttl_hops: 64 }
    }
}

#[derive(Debug, Clone, Default)]
struct FloodNodeState {
    received: bool,
    relay: Option<TimerHandle>,
    relay_hop: u32,
}

pub struct FloodProtocol {
    params: FloodParams,
    node_count: usize,
    states: HashMap<MessageId, Vec<FloodNodeState>>,
}

impl FloodProtocol {
    pub fn new(params: FloodParams, node_count: usize) -> Self {
        assert!(params.slot > 0.0 && params.cw_slots >= 1 && params.ttl_hops >= 1);
        FloodProtocol { params, node_count, states: HashMap::new() }
    }

    pub fn params(&self) -> &FloodParams {
        &self.params
    }

    /// Snapshots the ZOR, delivers to the origin if it is a member, and
    /// broadcasts exactly once.
    pub fn originate(&mut self, ctx: &mut Ctx, msg: &GeocastMessage) {
        let mut states = vec![FloodNodeState::default(); self.node_count];
        let members = ctx.members_in(&msg.zor);
        ctx.metrics.snapshot_zor(msg.id, &members, msg.payload_bytes, ctx.now);

        let origin = msg.origin;
        states[origin.0 as usize].received = true;
        if in_region(ctx.pos(origin), &msg.zor) {
            ctx.metrics.record_delivery(origin, msg.id, ctx.now, msg.created_at, 0);
        }
        ctx.broadcast(Frame {
            message: msg.id,
            origin,
            sender: origin,
            sender_pos: ctx.pos(origin),
            hop_count: 0,
            network_bytes: ctx.radio.params().header_bytes + msg.payload_bytes,
            kind: FrameKind::Data,
        });
        self.states.insert(msg.id, states);
    }

    /// First reception delivers (inside the ZOR) and schedules one slotted
    /// relay (inside the ZOF, below the hop TTL); duplicates are dropped.
    pub fn on_receive(&mut self, ctx: &mut Ctx, node: NodeId, frame: &Frame, msg: &GeocastMessage) {
        let p = self.params;
        let states = self.states.get_mut(&frame.message).expect("reception for unknown message");
        let st = &mut states[node.0 as usize];
        if st.received {
            return;
        }
        st.received = true;
        let pos = ctx.positions[node.0 as usize];
        if in_region(pos, &msg.zor) {
            ctx.metrics.record_delivery(node, msg.id, ctx.now, msg.created_at, frame.hop_count + 1);
        }
        if in_region(pos, &msg.zof) && frame.hop_count < p.ttl_hops {
            st.relay_hop = frame.hop_count + 1;
            let delay = p.slot * ctx.streams.uniform_int(node.0 as u64, Purpose::FloodSlot, p.cw_slots) as f64;
            st.relay =
                Some(ctx.engine.schedule_in(delay, EventKind::BackoffExpiry { node, message: msg.id }));
        }
    }

    pub fn on_relay_timer(&mut self, ctx: &mut Ctx, node: NodeId, msg: &GeocastMessage) {
        let states = self.states.get_mut(&msg.id).expect("timer for unknown message");
        let st = &mut states[node.0 as usize];
        st.relay = None;
        if ctx.radio.is_transmitting(node, ctx.now) {
            st.relay = Some(ctx.engine.schedule_at(
                ctx.radio.busy_until(node),
                EventKind::BackoffExpiry { node, message: msg.id },
            ));
            return;
        }
        ctx.broadcast(Frame {
            message: msg.id,
            origin: msg.origin,
            sender: node,
            sender_pos: ctx.positions[node.0 as usize],
            hop_count: st.relay_hop,
            network_bytes: ctx.radio.params().header_bytes + msg.payload_bytes,
            kind: FrameKind::Data,
        });
    }
}
