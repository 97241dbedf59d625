//! Distance-backoff geocast: receivers contend to forward with a backoff
//! inversely related to sender distance, retransmit in a short burst then at
//! a long interval until implicitly acknowledged, suppress redundant relays
//! by an angle test over prior senders, and keep the message alive in the
//! ZOR with recency-gated rebroadcasts.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::{Ctx, GeocastMessage};
use crate::engine::TimerHandle;
use crate::geom::{angle_at, dist, in_region, Point};
use crate::radio::{Frame, FrameKind};
use crate::rng::Purpose;
use crate::sim::EventKind;
use crate::{MessageId, NodeId};

/// Slack for the persistence recency comparison: scheduling at t + T and
/// comparing (t + T) - t against T must not fail to float rounding.
const RECENCY_SLACK: f64 = 1e-9;

/// Protocol parameters, fully resolved (no optional defaults left).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DrgParams {
    /// Backoff at distance zero; ceiling of the contention window.
    pub max_bo_d: f64,
    /// Dimensionless backoff sensitivity.
    pub s_d: f64,
    /// Burst length: retransmissions at short spacing before the long
    /// interval takes over.
    pub max_retx: u32,
    /// Retransmission interval once the burst is exhausted.
    pub long_bo_d: f64,
    /// Time to traverse one transmission range at top speed; upper bound for
    /// `long_bo_d` and the base persistence period.
    pub max_long_bo_d: f64,
    /// Coverage-ratio threshold the angle threshold is derived from.
    pub cr_threshold: f64,
    /// Minimum angle two prior senders must subtend for a node to deem its
    /// own relay redundant.
    pub theta_min: f64,
    /// Persistence sensitivity: period base is epsilon * max_long_bo_d.
    pub epsilon: f64,
    /// Uniform jitter window added to each persistence period.
    pub cw_min: f64,
    pub cw_max: f64,
    /// Uniform jitter window added to each forwarding backoff.
    pub jitter_cw: f64,
    /// Message lifetime in seconds.
    pub ttl: f64,
}

/// Forwarding backoff: linear in distance from the last sender, so the
/// farthest receiver fires first. `d` is clamped to [0, r_tx]; the caller
/// adds jitter.
pub fn compute_backoff(d: f64, r_tx: f64, params: &DrgParams) -> f64 {
    assert!(d >= 0.0 && r_tx > 0.0);
    let d = d.min(r_tx);
    params.max_bo_d * params.s_d * ((r_tx - d) / r_tx)
}

/// One prior sender of a message, as seen by one node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SenderEntry {
    pub sender: NodeId,
    pub position: Point,
    pub rx_time: f64,
}

/// Per-(node, message) protocol state.
#[derive(Debug, Clone)]
pub struct PerMessageState {
    /// Prior senders, most recent position kept per sender.
    pub received_from: Vec<SenderEntry>,
    pub delivered: bool,
    pub acked: bool,
    pub tx_count: u32,
    /// Hops from the origin when this node first got the message (0 at the
    /// origin itself); carried on frames this node sends.
    pub hop: Option<u32>,
    pub pending_tx: Option<TimerHandle>,
    pub pending_retx: Option<TimerHandle>,
    pub persistence_timer: Option<TimerHandle>,
    pub last_heard_at: f64,
}

impl Default for PerMessageState {
    fn default() -> Self {
        PerMessageState {
            received_from: Vec::new(),
            delivered: false,
            acked: false,
            tx_count: 0,
            hop: None,
            pending_tx: None,
            pending_retx: None,
            persistence_timer: None,
            last_heard_at: f64::NEG_INFINITY,
        }
    }
}

/// True when two prior senders subtend at least `theta_min` at this node:
/// the directions they cover make its own relay redundant. Monotone in
/// `received_from`.
pub fn ack_condition(state: &PerMessageState, self_pos: Point, theta_min: f64) -> bool {
    let rf = &state.received_from;
    for i in 0..rf.len() {
        for j in (i + 1)..rf.len() {
            if let Ok(theta) = angle_at(self_pos, rf[i].position, rf[j].position) {
                if theta >= theta_min {
                    return true;
                }
            }
        }
    }
    false
}

pub struct DrgProtocol {
    params: DrgParams,
    node_count: usize,
    states: HashMap<MessageId, Vec<PerMessageState>>,
}

impl DrgProtocol {
    pub fn new(params: DrgParams, node_count: usize) -> Self {
        assert!(params.max_retx >= 1);
        assert!(params.cw_min <= params.cw_max);
        assert!(params.jitter_cw >= 0.0);
        DrgProtocol { params, node_count, states: HashMap::new() }
    }

    pub fn params(&self) -> &DrgParams {
        &self.params
    }

    pub fn state(&self, message: MessageId, node: NodeId) -> Option<&PerMessageState> {
        self.states.get(&message).map(|v| &v[node.0 as usize])
    }

    /// Creates per-node state, snapshots the ZOR, delivers to the origin if
    /// it is a member, broadcasts once immediately and starts the
    /// retransmission chain.
    pub fn originate(&mut self, ctx: &mut Ctx, msg: &GeocastMessage) {
        let p = self.params;
        let mut states = vec![PerMessageState::default(); self.node_count];
        let members = ctx.members_in(&msg.zor);
        ctx.metrics.snapshot_zor(msg.id, &members, msg.payload_bytes, ctx.now);

        let origin = msg.origin;
        let st = &mut states[origin.0 as usize];
        st.hop = Some(0);
        st.last_heard_at = ctx.now;
        if in_region(ctx.pos(origin), &msg.zor) {
            st.delivered = true;
            ctx.metrics.record_delivery(origin, msg.id, ctx.now, msg.created_at, 0);
            schedule_persistence(&p, ctx, st, origin, msg.id);
        }
        transmit_and_chain(&p, ctx, st, origin, msg);
        self.states.insert(msg.id, states);
    }

    /// Reception rules, in order: record the sender, deliver inside the ZOR,
    /// test the implicit-acknowledgement angle pair, otherwise contend to
    /// forward when inside the ZOF.
    pub fn on_receive(&mut self, ctx: &mut Ctx, node: NodeId, frame: &Frame, msg: &GeocastMessage) {
        let p = self.params;
        let states = self.states.get_mut(&frame.message).expect("reception for unknown message");
        let st = &mut states[node.0 as usize];
        let now = ctx.now;
        let self_pos = ctx.positions[node.0 as usize];

        match st.received_from.iter_mut().find(|e| e.sender == frame.sender) {
            Some(e) => {
                e.position = frame.sender_pos;
                e.rx_time = now;
            }
            None => st.received_from.push(SenderEntry {
                sender: frame.sender,
                position: frame.sender_pos,
                rx_time: now,
            }),
        }
        st.last_heard_at = now;
        if st.hop.is_none() {
            st.hop = Some(frame.hop_count + 1);
        }

        let expired = msg.expired(now);
        if !st.delivered && in_region(self_pos, &msg.zor) {
            st.delivered = true;
            ctx.metrics.record_delivery(node, msg.id, now, msg.created_at, frame.hop_count + 1);
            if !expired {
                schedule_persistence(&p, ctx, st, node, msg.id);
            }
        }

        if ack_condition(st, self_pos, p.theta_min) {
            if let Some(h) = st.pending_tx.take() {
                ctx.engine.cancel(h);
            }
            if let Some(h) = st.pending_retx.take() {
                ctx.engine.cancel(h);
            }
            st.acked = true;
        } else if !expired
            && !st.acked
            && st.pending_tx.is_none()
            && st.pending_retx.is_none()
            && in_region(self_pos, &msg.zof)
        {
            let bo = compute_backoff(dist(self_pos, frame.sender_pos), ctx.radio.params().r_tx, &p)
                + jitter(&p, ctx, node);
            st.pending_tx =
                Some(ctx.engine.schedule_in(bo, EventKind::BackoffExpiry { node, message: msg.id }));
        }
    }

    /// Forwarding or retransmission timer fired: broadcast unless the
    /// message expired, and keep the chain alive.
    pub fn on_tx_timer(&mut self, ctx: &mut Ctx, node: NodeId, msg: &GeocastMessage, retx: bool) {
        let p = self.params;
        let states = self.states.get_mut(&msg.id).expect("timer for unknown message");
        let st = &mut states[node.0 as usize];
        if retx {
            st.pending_retx = None;
        } else {
            st.pending_tx = None;
        }
        debug_assert!(!st.acked, "acknowledged state retains no transmit timers");
        if msg.expired(ctx.now) {
            return;
        }
        if ctx.radio.is_transmitting(node, ctx.now) {
            // own persistence frame on the air: defer to its end
            let kind = if retx {
                EventKind::RetxExpiry { node, message: msg.id }
            } else {
                EventKind::BackoffExpiry { node, message: msg.id }
            };
            let h = ctx.engine.schedule_at(ctx.radio.busy_until(node), kind);
            if retx {
                st.pending_retx = Some(h);
            } else {
                st.pending_tx = Some(h);
            }
            return;
        }
        transmit_and_chain(&p, ctx, st, node, msg);
    }

    /// Persistence timer fired: rebroadcast only when nothing was heard for
    /// a full period, then redraw and reschedule while the message lives.
    pub fn on_persistence_expiry(
        &mut self,
        ctx: &mut Ctx,
        node: NodeId,
        msg: &GeocastMessage,
        period: f64,
    ) {
        let p = self.params;
        let states = self.states.get_mut(&msg.id).expect("timer for unknown message");
        let st = &mut states[node.0 as usize];
        st.persistence_timer = None;
        if msg.expired(ctx.now) {
            return;
        }
        if ctx.now - st.last_heard_at >= period - RECENCY_SLACK {
            if ctx.radio.is_transmitting(node, ctx.now) {
                st.persistence_timer = Some(ctx.engine.schedule_at(
                    ctx.radio.busy_until(node),
                    EventKind::PersistenceExpiry { node, message: msg.id, period },
                ));
                return;
            }
            ctx.broadcast(Frame {
                message: msg.id,
                origin: msg.origin,
                sender: node,
                sender_pos: ctx.positions[node.0 as usize],
                hop_count: st.hop.unwrap_or(0),
                network_bytes: ctx.radio.params().header_bytes + msg.payload_bytes,
                kind: FrameKind::Persistence,
            });
        }
        schedule_persistence(&p, ctx, st, node, msg.id);
    }
}

fn jitter(p: &DrgParams, ctx: &mut Ctx, node: NodeId) -> f64 {
    ctx.streams.uniform(node.0 as u64, Purpose::Jitter, 0.0, p.jitter_cw)
}

/// Broadcasts a data frame and schedules the next retransmission: burst
/// spacing while tx_count < max_retx, the long interval afterwards.
fn transmit_and_chain(
    p: &DrgParams,
    ctx: &mut Ctx,
    st: &mut PerMessageState,
    node: NodeId,
    msg: &GeocastMessage,
) {
    ctx.broadcast(Frame {
        message: msg.id,
        origin: msg.origin,
        sender: node,
        sender_pos: ctx.positions[node.0 as usize],
        hop_count: st.hop.unwrap_or(0),
        network_bytes: ctx.radio.params().header_bytes + msg.payload_bytes,
        kind: FrameKind::Data,
    });
    st.tx_count += 1;
    let delay = if st.tx_count < p.max_retx {
        compute_backoff(0.0, ctx.radio.params().r_tx, p) + jitter(p, ctx, node)
    } else {
        p.long_bo_d
    };
    st.pending_retx =
        Some(ctx.engine.schedule_in(delay, EventKind::RetxExpiry { node, message: msg.id }));
}

/// Draws the persistence period and schedules its expiry.
fn schedule_persistence(
    p: &DrgParams,
    ctx: &mut Ctx,
    st: &mut PerMessageState,
    node: NodeId,
    message: MessageId,
) {
    debug_assert!(st.persistence_timer.is_none());
    let period = p.epsilon * p.max_long_bo_d
        + ctx.streams.uniform(node.0 as u64, Purpose::Persistence, p.cw_min, p.cw_max);
    st.persistence_timer = Some(
        ctx.engine
            .schedule_in(period, EventKind::PersistenceExpiry { node, message, period }),
    );
}
