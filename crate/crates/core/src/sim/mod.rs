//! Seeded discrete-event replay of a layout under synthetic traffic.
//!
//! Every packet crosses one link per hop. At each transmitting port it waits
//! in its egress queue, the port serves eligible queue heads in strict
//! priority order (real-time queues by flow priority, the default queue
//! last, no preemption), and the packet then spends its serialization time on
//! the wire, the propagation delay, and the processing time of the receiving
//! node. Rate-limited queues may start a new packet only every `bits / rate`
//! seconds, which is how per-flow reservations and ingress policing act.

mod engine;
mod traffic;

pub use engine::{simulate, simulate_with_samples};
pub use traffic::{
    BestEffortFlow, Pattern, Traffic, TrafficFile, TrafficProfile, TrafficShape,
    DEFAULT_PACKET_BYTES,
};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::io::FORMAT_VERSION;
use crate::model::{DelayModel, FlowId, FlowSet, NodeId};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SimError {
    #[error("flow {0} has a traffic profile but no placed path")]
    UnplacedFlow(FlowId),
    #[error("flow {flow} sends {send_rate_bps} bps over a {reserved_bps} bps reservation")]
    OverCapacityProfile {
        flow: FlowId,
        send_rate_bps: u64,
        reserved_bps: u64,
    },
    #[error("invalid traffic profile: {0}")]
    InvalidProfile(String),
    #[error("no route from {0} to {1}")]
    NoRoute(NodeId, NodeId),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QueueMode {
    /// One queue per flow at each port, served at the flow's reserved rate.
    SeparatePerFlow,
    /// One real-time queue per port shared by all profiled flows crossing it,
    /// served at the sum of their reserved rates.
    SharedSingle,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub mode: QueueMode,
    pub seed: u64,
    pub delay: DelayModel,
    /// Rate-limit each real-time source to its reservation before it enters
    /// the network. Excess packets wait at the host; none are dropped.
    pub police_ingress: bool,
    /// Reject profiles whose send rate exceeds the reservation.
    pub strict: bool,
    /// Per-queue buffer in packets; `None` is unbounded.
    pub queue_capacity: Option<usize>,
    /// Upper bound of the uniform per-packet send jitter.
    pub jitter_ns: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            mode: QueueMode::SeparatePerFlow,
            seed: 0,
            delay: DelayModel::default(),
            police_ingress: false,
            strict: false,
            queue_capacity: None,
            jitter_ns: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrafficClass {
    RealTime,
    BestEffort,
}

/// Delay statistics of one flow. Delays are one-way, measured from the moment
/// the packet is allowed onto the first link until it is processed at the
/// destination host.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowStats {
    pub class: TrafficClass,
    /// Flow id for real-time traffic, position in the best-effort list otherwise.
    pub id: u32,
    pub source: NodeId,
    pub dest: NodeId,
    pub packets_sent: u64,
    pub packets_delivered: u64,
    pub packets_dropped: u64,
    pub mean_delay_ns: f64,
    pub p99_delay_ns: u64,
    pub max_delay_ns: u64,
    pub deadline_ns: Option<u64>,
    pub deadline_misses: u64,
}

impl FlowStats {
    fn from_samples(
        class: TrafficClass,
        id: u32,
        ends: (NodeId, NodeId),
        sent: u64,
        dropped: u64,
        deadline_ns: Option<u64>,
        samples: &[u64],
    ) -> Self {
        let mut sorted = samples.to_vec();
        sorted.sort_unstable();
        let n = sorted.len();
        let mean = if n == 0 {
            0.0
        } else {
            sorted.iter().map(|&x| x as f64).sum::<f64>() / n as f64
        };
        Self {
            class,
            id,
            source: ends.0,
            dest: ends.1,
            packets_sent: sent,
            packets_delivered: n as u64,
            packets_dropped: dropped,
            mean_delay_ns: mean,
            p99_delay_ns: percentile(&sorted, 0.99),
            max_delay_ns: sorted.last().copied().unwrap_or(0),
            deadline_ns,
            deadline_misses: deadline_ns
                .map_or(0, |d| sorted.iter().filter(|&&x| x > d).count() as u64),
        }
    }
}

/// Nearest-rank percentile of an ascending slice; 0 when empty.
pub fn percentile(sorted: &[u64], q: f64) -> u64 {
    if sorted.is_empty() {
        return 0;
    }
    let rank = (q * sorted.len() as f64).ceil() as usize;
    sorted[rank.clamp(1, sorted.len()) - 1]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimReport {
    pub format_version: u32,
    pub mode: QueueMode,
    pub seed: u64,
    pub flows: Vec<FlowStats>,
}

impl SimReport {
    pub fn real_time(&self) -> impl Iterator<Item = &FlowStats> {
        self.flows
            .iter()
            .filter(|f| f.class == TrafficClass::RealTime)
    }

    pub fn total_deadline_misses(&self) -> u64 {
        self.flows.iter().map(|f| f.deadline_misses).sum()
    }

    pub fn to_csv(&self) -> anyhow::Result<String> {
        crate::io::to_csv_string(&self.flows)
    }

    fn new(config: &SimConfig, flows: Vec<FlowStats>) -> Self {
        Self {
            format_version: FORMAT_VERSION,
            mode: config.mode,
            seed: config.seed,
            flows,
        }
    }
}

/// Per real-time flow: whether its worst observed delay stayed within its
/// deadline. Flows without statistics in the report are omitted.
pub fn deadline_check(report: &SimReport, flows: &FlowSet) -> Vec<(FlowId, bool)> {
    report
        .real_time()
        .filter_map(|s| {
            let f = flows.get(FlowId(s.id))?;
            Some((f.id, s.max_delay_ns <= f.deadline_ns))
        })
        .collect()
}
