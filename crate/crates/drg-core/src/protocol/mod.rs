//! Per-node protocol state machines: the distance-backoff geocast protocol
//! and the restricted-flooding baseline, sharing the geocast message type
//! and a dispatch context over the engine, radio and metrics.

pub mod drg;
pub mod flood;

use serde::{Deserialize, Serialize};

use crate::engine::Engine;
use crate::geom::{expand_region, in_region, Point, RectRegion, ZOF_MARGIN_M};
use crate::metrics::Collector;
use crate::radio::{Frame, Radio};
use crate::rng::RandomStreams;
use crate::sim::EventKind;
use crate::{MessageId, NodeId};

pub use drg::{ack_condition, compute_backoff, DrgParams, DrgProtocol, PerMessageState};
pub use flood::{FloodParams, FloodProtocol};

/// Which protocol a run exercises.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProtocolKind {
    Drg,
    Flood,
}

impl ProtocolKind {
    pub fn name(&self) -> &'static str {
        match self {
            ProtocolKind::Drg => "drg",
            ProtocolKind::Flood => "flood",
        }
    }
}

/// One geocast message: id, geography and lifetime.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeocastMessage {
    pub id: MessageId,
    pub origin: NodeId,
    pub origin_position: Point,
    /// Zone of relevance: members must receive the message.
    pub zor: RectRegion,
    /// Zone of forwarding: the ZOR plus a fixed margin; members relay.
    pub zof: RectRegion,
    pub payload_bytes: u64,
    pub created_at: f64,
    pub ttl: f64,
}

impl GeocastMessage {
    pub fn new(
        id: MessageId,
        origin: NodeId,
        origin_position: Point,
        zor: RectRegion,
        payload_bytes: u64,
        created_at: f64,
        ttl: f64,
    ) -> Self {
        assert!(ttl > 0.0);
        GeocastMessage {
            id,
            origin,
            origin_position,
            zor,
            zof: expand_region(&zor, ZOF_MARGIN_M),
            payload_bytes,
            created_at,
            ttl,
        }
    }

    pub fn expired(&self, now: f64) -> bool {
        now - self.created_at > self.ttl
    }
}

/// Mutable slice of the simulation a protocol handler may touch.
pub struct Ctx<'a> {
    pub now: f64,
    pub engine: &'a mut Engine<EventKind>,
    pub streams: &'a mut RandomStreams,
    pub radio: &'a mut Radio,
    pub positions: &'a [Point],
    pub metrics: &'a mut Collector,
}

impl Ctx<'_> {
    pub fn pos(&self, node: NodeId) -> Point {
        self.positions[node.0 as usize]
    }

    /// Puts a frame on the air, schedules its end event and logs it.
    pub fn broadcast(&mut self, frame: Frame) {
        let (tx, end) = self.radio.begin(frame, self.now);
        self.engine.schedule_at(end, EventKind::TxEnd { tx });
        self.metrics.record_tx(&frame, self.now);
    }

    /// Ids of nodes currently inside `region`, ascending.
    pub fn members_in(&self, region: &RectRegion) -> Vec<NodeId> {
        self.positions
            .iter()
            .enumerate()
            .filter(|(_, p)| in_region(**p, region))
            .map(|(i, _)| NodeId(i as u32))
            .collect()
    }
}

/// The protocol instance driving a run.
pub enum Protocol {
    Drg(DrgProtocol),
    Flood(FloodProtocol),
}

impl Protocol {
    pub fn kind(&self) -> ProtocolKind {
        match self {
            Protocol::Drg(_) => ProtocolKind::Drg,
            Protocol::Flood(_) => ProtocolKind::Flood,
        }
    }

    pub fn originate(&mut self, ctx: &mut Ctx, msg: &GeocastMessage) {
        match self {
            Protocol::Drg(p) => p.originate(ctx, msg),
            Protocol::Flood(p) => p.originate(ctx, msg),
        }
    }

    pub fn on_receive(&mut self, ctx: &mut Ctx, node: NodeId, frame: &Frame, msg: &GeocastMessage) {
        match self {
            Protocol::Drg(p) => p.on_receive(ctx, node, frame, msg),
            Protocol::Flood(p) => p.on_receive(ctx, node, frame, msg),
        }
    }

    /// Backoff-expiry events: the forwarding timer for the backoff protocol,
    /// the slotted relay timer for flooding.
    pub fn on_backoff_expiry(&mut self, ctx: &mut Ctx, node: NodeId, msg: &GeocastMessage) {
        match self {
            Protocol::Drg(p) => p.on_tx_timer(ctx, node, msg, false),
            Protocol::Flood(p) => p.on_relay_timer(ctx, node, msg),
        }
    }

    pub fn on_retx_expiry(&mut self, ctx: &mut Ctx, node: NodeId, msg: &GeocastMessage) {
        match self {
            Protocol::Drg(p) => p.on_tx_timer(ctx, node, msg, true),
            Protocol::Flood(_) => unreachable!("flooding never schedules retransmissions"),
        }
    }

    pub fn on_persistence_expiry(
        &mut self,
        ctx: &mut Ctx,
        node: NodeId,
        msg: &GeocastMessage,
        period: f64,
    ) {
        match self {
            Protocol::Drg(p) => p.on_persistence_expiry(ctx, node, msg, period),
            Protocol::Flood(_) => unreachable!("flooding has no persistence"),
        }
    }
}
