//! Per-run measurement log and derived aggregates: delivery ratio against
//! the origination-time ZOR snapshot, end-to-end delay, and byte overhead.

use std::collections::{HashMap, HashSet};

use serde::Serialize;

use crate::radio::{Frame, FrameKind};
use crate::{MessageId, NodeId};

/// One recorded measurement; aggregates are a pure function of this log.
#[derive(Debug, Clone, PartialEq)]
pub enum MetricEvent {
    Snapshot { message: MessageId, members: Vec<NodeId>, payload_bytes: u64, at: f64 },
    Delivery {
        node: NodeId,
        message: MessageId,
        at: f64,
        delay: f64,
        hop: u32,
        in_snapshot: bool,
    },
    Tx { sender: NodeId, message: MessageId, kind: FrameKind, network_bytes: u64, at: f64 },
    CollisionLoss { at: f64, count: u64 },
    RandomLoss { at: f64, count: u64 },
}

/// Run identity attached to every metrics row.
#[derive(Debug, Clone, Serialize)]
pub struct RunMeta {
    pub scenario: String,
    pub protocol: String,
    pub density: f64,
    pub seed: u64,
}

/// Aggregates for one run. Delay columns are absent (not zero) when nothing
/// was delivered.
#[derive(Debug, Clone, Serialize)]
pub struct RunMetrics {
    pub scenario: String,
    pub protocol: String,
    pub density: f64,
    pub seed: u64,
    pub zor_snapshot_count: u64,
    /// Unique delivered nodes, late entrants included.
    pub delivered_count: u64,
    /// May exceed 100 when late entrants deliver.
    pub pdr_pct: f64,
    /// Capped to origination-time members.
    pub pdr_snapshot_pct: f64,
    pub mean_delay_s: Option<f64>,
    pub p50_delay_s: Option<f64>,
    pub p95_delay_s: Option<f64>,
    pub tx_count: u64,
    pub network_bytes_tx: u64,
    pub overhead_ratio: f64,
    pub collisions: u64,
    // supplementary columns (JSON only, not in the pinned CSV schema)
    pub delivered_snapshot_count: u64,
    pub mean_delay_snapshot_s: Option<f64>,
    pub data_tx_count: u64,
    pub persistence_tx_count: u64,
    pub app_bytes: u64,
    pub random_losses: u64,
    pub max_delivery_hop: Option<u32>,
}

/// Records events during a run and asserts metric contracts.
pub struct Collector {
    events: Vec<MetricEvent>,
    snapshot_members: HashMap<MessageId, HashSet<NodeId>>,
    delivered: HashSet<(NodeId, MessageId)>,
}

impl Default for Collector {
    fn default() -> Self {
        Self::new()
    }
}

impl Collector {
    pub fn new() -> Self {
        Collector {
            events: Vec::new(),
            snapshot_members: HashMap::new(),
            delivered: HashSet::new(),
        }
    }

    /// Freezes the PDR denominator for one message. Calling twice for the
    /// same message is a contract violation.
    pub fn snapshot_zor(
        &mut self,
        message: MessageId,
        members: &[NodeId],
        payload_bytes: u64,
        at: f64,
    ) {
        let prev = self
            .snapshot_members
            .insert(message, members.iter().copied().collect());
        assert!(prev.is_none(), "second ZOR snapshot for one message");
        self.events.push(MetricEvent::Snapshot {
            message,
            members: members.to_vec(),
            payload_bytes,
            at,
        });
    }

    /// Records a unique application delivery; duplicates are a contract
    /// violation.
    pub fn record_delivery(
        &mut self,
        node: NodeId,
        message: MessageId,
        at: f64,
        created_at: f64,
        hop: u32,
    ) {
        assert!(
            self.delivered.insert((node, message)),
            "duplicate delivery of {message:?} at node {}",
            node.0
        );
        let delay = at - created_at;
        assert!(delay >= 0.0, "delivery before origination");
        let in_snapshot = self
            .snapshot_members
            .get(&message)
            .is_some_and(|m| m.contains(&node));
        self.events.push(MetricEvent::Delivery { node, message, at, delay, hop, in_snapshot });
    }

    pub fn record_tx(&mut self, frame: &Frame, at: f64) {
        self.events.push(MetricEvent::Tx {
            sender: frame.sender,
            message: frame.message,
            kind: frame.kind,
            network_bytes: frame.network_bytes,
            at,
        });
    }

    pub fn record_losses(&mut self, collisions: u64, random: u64, at: f64) {
        if collisions > 0 {
            self.events.push(MetricEvent::CollisionLoss { at, count: collisions });
        }
        if random > 0 {
            self.events.push(MetricEvent::RandomLoss { at, count: random });
        }
    }

    pub fn events(&self) -> &[MetricEvent] {
        &self.events
    }

    pub fn finalize(&self, meta: &RunMeta) -> RunMetrics {
        compute_metrics(&self.events, meta)
    }
}

/// Nearest-rank percentile of an ascending-sorted slice.
fn percentile(sorted: &[f64], pct: f64) -> f64 {
    debug_assert!(!sorted.is_empty());
    let rank = (pct / 100.0 * sorted.len() as f64).ceil() as usize;
    sorted[rank.clamp(1, sorted.len()) - 1]
}

fn mean(xs: &[f64]) -> Option<f64> {
    if xs.is_empty() {
        None
    } else {
        Some(xs.iter().sum::<f64>() / xs.len() as f64)
    }
}

/// Computes all aggregates from the raw event log alone.
pub fn compute_metrics(events: &[MetricEvent], meta: &RunMeta) -> RunMetrics {
    let mut zor_snapshot_count = 0u64;
    let mut app_bytes = 0u64;
    let mut delays = Vec::new();
    let mut snapshot_delays = Vec::new();
    let mut delivered_count = 0u64;
    let mut delivered_snapshot_count = 0u64;
    let mut tx_count = 0u64;
    let mut data_tx_count = 0u64;
    let mut persistence_tx_count = 0u64;
    let mut network_bytes_tx = 0u64;
    let mut collisions = 0u64;
    let mut random_losses = 0u64;
    let mut max_hop: Option<u32> = None;

    for ev in events {
        match ev {
            MetricEvent::Snapshot { members, payload_bytes, .. } => {
                zor_snapshot_count += members.len() as u64;
                app_bytes += payload_bytes;
            }
            MetricEvent::Delivery { delay, hop, in_snapshot, .. } => {
                delivered_count += 1;
                delays.push(*delay);
                if *in_snapshot {
                    delivered_snapshot_count += 1;
                    snapshot_delays.push(*delay);
                }
                max_hop = Some(max_hop.map_or(*hop, |m| m.max(*hop)));
            }
            MetricEvent::Tx { kind, network_bytes, .. } => {
                tx_count += 1;
                network_bytes_tx += network_bytes;
                match kind {
                    FrameKind::Data => data_tx_count += 1,
                    FrameKind::Persistence => persistence_tx_count += 1,
                }
            }
            MetricEvent::CollisionLoss { count, .. } => collisions += count,
            MetricEvent::RandomLoss { count, .. } => random_losses += count,
        }
    }

    delays.sort_by(f64::total_cmp);
    snapshot_delays.sort_by(f64::total_cmp);
    let pct = |num: u64| {
        if zor_snapshot_count == 0 {
            0.0
        } else {
            100.0 * num as f64 / zor_snapshot_count as f64
        }
    };
    RunMetrics {
        scenario: meta.scenario.clone(),
        protocol: meta.protocol.clone(),
        density: meta.density,
        seed: meta.seed,
        zor_snapshot_count,
        delivered_count,
        pdr_pct: pct(delivered_count),
        pdr_snapshot_pct: pct(delivered_snapshot_count),
        mean_delay_s: mean(&delays),
        p50_delay_s: (!delays.is_empty()).then(|| percentile(&delays, 50.0)),
        p95_delay_s: (!delays.is_empty()).then(|| percentile(&delays, 95.0)),
        tx_count,
        network_bytes_tx,
        overhead_ratio: if app_bytes == 0 {
            0.0
        } else {
            network_bytes_tx as f64 / app_bytes as f64
        },
        collisions,
        delivered_snapshot_count,
        mean_delay_snapshot_s: mean(&snapshot_delays),
        data_tx_count,
        persistence_tx_count,
        app_bytes,
        random_losses,
        max_delivery_hop: max_hop,
    }
}
