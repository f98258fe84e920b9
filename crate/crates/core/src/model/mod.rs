//! Network graph, flows, the per-link delay model and additive path costs.

mod cost;
mod delay;
mod flow;
mod generate;
mod topology;

pub use cost::{
    bw_util_bound, path_bw_utilization, path_cost, path_delay, path_edges, path_nodes, PathCost,
    UtilScale,
};
pub use delay::{serialization_ns, DelayModel, SPEED_OF_LIGHT_M_PER_S};
pub use flow::{FlowId, FlowSet, FlowSetFile, FlowSpec};
pub use generate::{random_topology, RandomTopologyParams};
pub use topology::{
    Edge, EdgeId, EdgeRecord, Node, NodeId, NodeKind, Topology, TopologyFile,
    DEFAULT_QUEUES_PER_PORT,
};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("unknown node {0}")]
    UnknownNode(NodeId),
    #[error("node {0} declared twice")]
    DuplicateNode(NodeId),
    #[error("self loop on {0}")]
    SelfLoop(NodeId),
    #[error("more than one edge between {0} and {1}")]
    ParallelEdge(NodeId, NodeId),
    #[error("edge {0}-{1} has zero bandwidth")]
    ZeroBandwidth(NodeId, NodeId),
    #[error("edge {0}-{1} has zero delay")]
    ZeroDelay(NodeId, NodeId),
    #[error("queues_per_port must be at least 1")]
    ZeroQueues,
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("unsupported format version {0}")]
    UnsupportedFormatVersion(u32),
    #[error("flow {0} has the same source and destination")]
    SameEndpoints(FlowId),
    #[error("flow {0} has a zero deadline")]
    ZeroDeadline(FlowId),
    #[error("flow {0} has zero demand")]
    ZeroDemand(FlowId),
    #[error("flow id {0} used twice")]
    DuplicateFlowId(FlowId),
    #[error(
        "flows {first} and {second} share deadline {deadline_ns} ns; priorities must be distinct"
    )]
    DuplicateDeadline {
        first: FlowId,
        second: FlowId,
        deadline_ns: u64,
    },
    #[error("path is not contiguous at edge index {index}")]
    NonContiguousPath { index: usize },
    #[error("topology has no edges")]
    EmptyTopology,
}
