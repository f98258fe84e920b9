//! Greedy per-flow path placement in delay-monotonic priority order.
//!
//! Each flow first tries a search that keeps delay exact and coarsens
//! bandwidth utilization onto the integer grid; if that fails, a second search
//! coarsens delay instead and keeps utilization exact. Placed flows reserve
//! their demand on every link of the path and one egress queue on every
//! switch port they leave through.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::io::FORMAT_VERSION;
use crate::model::{
    path_edges, path_nodes, EdgeId, FlowId, FlowSet, FlowSpec, ModelError, NodeId, PathCost,
    Topology, UtilScale,
};
use crate::solver::{
    mcp_heuristic_traced, relax_ratio, DpState, RelaxParams, SolverError, WeightedInstance,
};

#[derive(Debug, Error)]
pub enum LayoutError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error("layout report does not match the topology: {0}")]
    Mismatch(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    /// Exact delay, relaxed utilization.
    BandwidthRelaxed,
    /// Relaxed delay, exact utilization.
    DelayRelaxed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RejectReason {
    /// Neither search found a path.
    NoFeasiblePath,
    /// A path exists, but every one of them leaves through a port with no
    /// dedicated queue left.
    QueueExhausted,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Outcome {
    Placed {
        path: Vec<EdgeId>,
        nodes: Vec<NodeId>,
        branch: Branch,
        cost: PathCost,
    },
    Rejected {
        reason: RejectReason,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayoutResult {
    pub flow: FlowId,
    pub deadline_ns: u64,
    pub demand_bps: u64,
    pub outcome: Outcome,
}

impl LayoutResult {
    pub fn is_placed(&self) -> bool {
        matches!(self.outcome, Outcome::Placed { .. })
    }

    pub fn path(&self) -> Option<&[EdgeId]> {
        match &self.outcome {
            Outcome::Placed { path, .. } => Some(path),
            Outcome::Rejected { .. } => None,
        }
    }

    pub fn nodes(&self) -> Option<&[NodeId]> {
        match &self.outcome {
            Outcome::Placed { nodes, .. } => Some(nodes),
            Outcome::Rejected { .. } => None,
        }
    }
}

/// Per-flow outcomes in priority order.
#[derive(Debug, Clone, PartialEq)]
pub struct LayoutReport {
    pub results: Vec<LayoutResult>,
    pub schedulable: bool,
}

impl LayoutReport {
    pub fn placed(&self) -> impl Iterator<Item = &LayoutResult> {
        self.results.iter().filter(|r| r.is_placed())
    }

    pub fn get(&self, flow: FlowId) -> Option<&LayoutResult> {
        self.results.iter().find(|r| r.flow == flow)
    }
}

/// Flows sorted by ascending deadline: the tightest deadline is served first.
pub fn prioritize(flows: &[FlowSpec]) -> Result<Vec<&FlowSpec>, ModelError> {
    let mut out: Vec<&FlowSpec> = flows.iter().collect();
    out.sort_by_key(|f| f.deadline_ns);
    for w in out.windows(2) {
        if w[0].deadline_ns == w[1].deadline_ns {
            return Err(ModelError::DuplicateDeadline {
                first: w[0].id,
                second: w[1].id,
                deadline_ns: w[0].deadline_ns,
            });
        }
    }
    Ok(out)
}

/// Final DP table of one search attempt, kept for debugging.
#[derive(Debug, Clone)]
pub struct AttemptTrace {
    pub flow: FlowId,
    pub branch: Branch,
    /// Maps DP row indices back to node ids.
    pub nodes: Vec<NodeId>,
    pub state: DpState,
}

impl AttemptTrace {
    /// The DP table as CSV with node ids in place of row indices.
    pub fn to_csv(&self) -> String {
        let raw = self.state.to_csv();
        let mut out = String::with_capacity(raw.len());
        for (i, line) in raw.lines().enumerate() {
            if i == 0 {
                out.push_str(line);
            } else {
                let f: Vec<&str> = line.split(',').collect();
                let node = self.nodes[f[0].parse::<usize>().unwrap()];
                let pred = match f[3] {
                    "" => String::new(),
                    p => self.nodes[p.parse::<usize>().unwrap()].0.to_string(),
                };
                out.push_str(&format!("{},{},{},{},{}", node.0, f[1], f[2], pred, f[4]));
            }
            out.push('\n');
        }
        out
    }
}

/// Egress port key: the transmitting switch and the link it transmits on.
type PortKey = (NodeId, EdgeId);

struct Engine<'a> {
    topology: &'a mut Topology,
    relax: RelaxParams,
    scale: UtilScale,
    min_bw: u64,
    queue_use: HashMap<PortKey, u32>,
    trace: Option<&'a mut Vec<AttemptTrace>>,
}

impl Engine<'_> {
    fn port_free(&self, from: NodeId, edge: EdgeId) -> bool {
        if !self.topology.is_switch(from) {
            return true;
        }
        let used = self.queue_use.get(&(from, edge)).copied().unwrap_or(0);
        used + 1 < self.topology.queues_per_port()
    }

    /// Directed arcs usable by `flow`: enough residual bandwidth, no transit
    /// through hosts, and optionally a free queue at the transmitting port.
    fn arcs(&self, flow: &FlowSpec, check_queues: bool) -> Vec<(usize, usize, EdgeId)> {
        let t = &*self.topology;
        let mut out = Vec::new();
        for (i, e) in t.edges().iter().enumerate() {
            if e.residual_bps() < flow.demand_bps {
                continue;
            }
            let (a, b) = e.endpoints();
            for (u, v) in [(a, b), (b, a)] {
                if t.is_host(u) && u != flow.source {
                    continue;
                }
                if t.is_host(v) && v != flow.dest {
                    continue;
                }
                if check_queues && !self.port_free(u, EdgeId(i)) {
                    continue;
                }
                out.push((t.position(u).unwrap(), t.position(v).unwrap(), EdgeId(i)));
            }
        }
        out
    }

    fn instance(
        &self,
        flow: &FlowSpec,
        branch: Branch,
        arcs: &[(usize, usize, EdgeId)],
    ) -> Result<WeightedInstance, LayoutError> {
        let t = &*self.topology;
        let n = t.node_count();
        let x = self.relax.x;
        let s = t
            .position(flow.source)
            .ok_or(ModelError::UnknownNode(flow.source))?;
        let d = t
            .position(flow.dest)
            .ok_or(ModelError::UnknownNode(flow.dest))?;
        let budget = self.scale.budget_units(flow.demand_bps, n, self.min_bw);
        let mut inst = match branch {
            Branch::BandwidthRelaxed => WeightedInstance::new(n, s, d, flow.deadline_ns as u128, x),
            Branch::DelayRelaxed => WeightedInstance::new(n, s, d, budget, x),
        };
        for &(u, v, e) in arcs {
            let edge = t.edge(e);
            let (w1, w2) = match branch {
                Branch::BandwidthRelaxed => {
                    // x * (demand / bw) / (demand * n / min_bw)
                    let w2 = relax_ratio(
                        self.min_bw as u128,
                        edge.bandwidth_bps() as u128 * n as u128,
                        x,
                    )?;
                    (edge.delay_ns() as u128, w2)
                }
                Branch::DelayRelaxed => {
                    let w2 = relax_ratio(edge.delay_ns() as u128, flow.deadline_ns as u128, x)?;
                    (self.scale.units(flow.demand_bps, edge.bandwidth_bps()), w2)
                }
            };
            inst.arcs.push(crate::solver::Arc {
                from: u,
                to: v,
                w1,
                w2: u32::try_from(w2).unwrap_or(u32::MAX),
                tag: e.0,
            });
        }
        Ok(inst)
    }

    fn search(
        &mut self,
        flow: &FlowSpec,
        check_queues: bool,
        record: bool,
    ) -> Result<Option<(Vec<EdgeId>, Branch)>, LayoutError> {
        let arcs = self.arcs(flow, check_queues);
        for branch in [Branch::BandwidthRelaxed, Branch::DelayRelaxed] {
            let inst = self.instance(flow, branch, &arcs)?;
            let (found, state) = mcp_heuristic_traced(&inst)?;
            if record {
                if let Some(trace) = self.trace.as_deref_mut() {
                    trace.push(AttemptTrace {
                        flow: flow.id,
                        branch,
                        nodes: self.topology.nodes().iter().map(|n| n.id).collect(),
                        state,
                    });
                }
            }
            if let Some(p) = found {
                let path = p.arcs.iter().map(|&a| EdgeId(inst.arcs[a].tag)).collect();
                return Ok(Some((path, branch)));
            }
        }
        Ok(None)
    }

    fn place(&mut self, flow: &FlowSpec) -> Result<LayoutResult, LayoutError> {
        let outcome = match self.search(flow, true, true)? {
            Some((path, branch)) => {
                let nodes = path_nodes(self.topology, flow.source, &path)?;
                let cost = crate::model::path_cost(self.topology, &path, flow)?;
                for (i, &e) in path.iter().enumerate() {
                    self.topology.reserve(e, flow.demand_bps);
                    if self.topology.is_switch(nodes[i]) {
                        *self.queue_use.entry((nodes[i], e)).or_default() += 1;
                    }
                }
                Outcome::Placed {
                    path,
                    nodes,
                    branch,
                    cost,
                }
            }
            None => {
                let reason = if self.search(flow, false, false)?.is_some() {
                    RejectReason::QueueExhausted
                } else {
                    RejectReason::NoFeasiblePath
                };
                Outcome::Rejected { reason }
            }
        };
        Ok(LayoutResult {
            flow: flow.id,
            deadline_ns: flow.deadline_ns,
            demand_bps: flow.demand_bps,
            outcome,
        })
    }
}

/// Lays out `flows` against the current residuals of `topology`, reserving
/// bandwidth in place. DP tables of every search attempt are appended to
/// `trace` when given.
pub fn layout_paths_traced(
    topology: &mut Topology,
    flows: &FlowSet,
    relax: RelaxParams,
    trace: Option<&mut Vec<AttemptTrace>>,
) -> Result<LayoutReport, LayoutError> {
    if relax.x == 0 {
        return Err(
            ModelError::InvalidParams("relaxation resolution must be at least 1".into()).into(),
        );
    }
    flows.check_endpoints(topology)?;
    let order = prioritize(flows.flows())?;
    let min_bw = topology
        .min_bandwidth_bps()
        .ok_or(ModelError::EmptyTopology)?;
    let mut engine = Engine {
        scale: UtilScale::for_topology(topology),
        topology,
        relax,
        min_bw,
        queue_use: HashMap::new(),
        trace,
    };
    let mut results = Vec::with_capacity(order.len());
    for f in order {
        results.push(engine.place(f)?);
    }
    let schedulable = results.iter().all(|r| r.is_placed());
    Ok(LayoutReport {
        results,
        schedulable,
    })
}

/// Layout on a fresh copy of `topology` with full residual bandwidth.
pub fn layout_paths(
    topology: &Topology,
    flows: &FlowSet,
    relax: RelaxParams,
) -> Result<LayoutReport, LayoutError> {
    let mut t = topology.clone();
    t.reset_residuals();
    layout_paths_traced(&mut t, flows, relax, None)
}

/// Layout that also returns the topology with residuals after all placements.
pub fn layout_paths_with_residuals(
    topology: &Topology,
    flows: &FlowSet,
    relax: RelaxParams,
) -> Result<(LayoutReport, Topology), LayoutError> {
    let mut t = topology.clone();
    t.reset_residuals();
    let report = layout_paths_traced(&mut t, flows, relax, None)?;
    Ok((report, t))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    /// The recorded path is not a walk from the flow's source to its destination.
    BadPath {
        flow: FlowId,
    },
    UnknownFlow {
        flow: FlowId,
    },
    DelayViolation {
        flow: FlowId,
        delay_ns: u64,
        deadline_ns: u64,
    },
    UtilizationViolation {
        flow: FlowId,
        bw_util: f64,
        bound: f64,
    },
    CapacityViolation {
        a: NodeId,
        b: NodeId,
        load_bps: u64,
        bandwidth_bps: u64,
    },
    QueueViolation {
        switch: NodeId,
        toward: NodeId,
        flows: u32,
        limit: u32,
    },
}

/// Recomputes every constraint from scratch for the placed flows of `report`.
pub fn verify_layout(
    topology: &Topology,
    flows: &FlowSet,
    report: &LayoutReport,
) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut load: HashMap<EdgeId, u64> = HashMap::new();
    let mut queues: HashMap<PortKey, u32> = HashMap::new();
    let scale = UtilScale::for_topology(topology);
    let min_bw = topology.min_bandwidth_bps().unwrap_or(1);
    for r in &report.results {
        let Some(path) = r.path() else { continue };
        let Some(flow) = flows.get(r.flow) else {
            out.push(Violation::UnknownFlow { flow: r.flow });
            continue;
        };
        let nodes = match path_nodes(topology, flow.source, path) {
            Ok(n) if n.last() == Some(&flow.dest) => n,
            _ => {
                out.push(Violation::BadPath { flow: flow.id });
                continue;
            }
        };
        let delay: u64 = path.iter().map(|&e| topology.edge(e).delay_ns()).sum();
        if delay > flow.deadline_ns {
            out.push(Violation::DelayViolation {
                flow: flow.id,
                delay_ns: delay,
                deadline_ns: flow.deadline_ns,
            });
        }
        let util: u128 = path
            .iter()
            .map(|&e| scale.units(flow.demand_bps, topology.edge(e).bandwidth_bps()))
            .sum();
        let bound = scale.budget_units(flow.demand_bps, topology.node_count(), min_bw);
        if util > bound {
            out.push(Violation::UtilizationViolation {
                flow: flow.id,
                bw_util: scale.to_f64(util),
                bound: scale.to_f64(bound),
            });
        }
        for (i, &e) in path.iter().enumerate() {
            *load.entry(e).or_default() += flow.demand_bps;
            if topology.is_switch(nodes[i]) {
                *queues.entry((nodes[i], e)).or_default() += 1;
            }
        }
    }
    let mut edges: Vec<_> = load.into_iter().collect();
    edges.sort();
    for (e, l) in edges {
        let edge = topology.edge(e);
        if l > edge.bandwidth_bps() {
            let (a, b) = edge.endpoints();
            out.push(Violation::CapacityViolation {
                a,
                b,
                load_bps: l,
                bandwidth_bps: edge.bandwidth_bps(),
            });
        }
    }
    let limit = topology.queues_per_port().saturating_sub(1);
    let mut ports: Vec<_> = queues.into_iter().collect();
    ports.sort();
    for ((sw, e), n) in ports {
        if n > limit {
            out.push(Violation::QueueViolation {
                switch: sw,
                toward: topology.edge(e).other(sw).unwrap_or(sw),
                flows: n,
                limit,
            });
        }
    }
    out
}

/// Edges whose consumed bandwidth differs from the summed demand of the placed
/// flows crossing them. Empty when bookkeeping is consistent.
pub fn check_residuals(after: &Topology, report: &LayoutReport) -> Vec<EdgeId> {
    let mut load: HashMap<EdgeId, u64> = HashMap::new();
    for r in report.placed() {
        for &e in r.path().unwrap() {
            *load.entry(e).or_default() += r.demand_bps;
        }
    }
    (0..after.edges().len())
        .map(EdgeId)
        .filter(|e| {
            let edge = after.edge(*e);
            edge.bandwidth_bps() - edge.residual_bps() != load.get(e).copied().unwrap_or(0)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Placed,
    Rejected,
}

/// On-disk form of one flow's outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowRecord {
    pub id: FlowId,
    pub status: Status,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub branch: Option<Branch>,
    #[serde(default)]
    pub path: Vec<NodeId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delay_ns: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bw_util: Option<f64>,
    pub deadline_ns: u64,
    pub demand_bps: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reason: Option<RejectReason>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayoutReportFile {
    pub format_version: u32,
    pub schedulable: bool,
    pub flows: Vec<FlowRecord>,
}

impl LayoutReport {
    pub fn to_file(&self) -> LayoutReportFile {
        let flows = self
            .results
            .iter()
            .map(|r| match &r.outcome {
                Outcome::Placed {
                    nodes,
                    branch,
                    cost,
                    ..
                } => FlowRecord {
                    id: r.flow,
                    status: Status::Placed,
                    branch: Some(*branch),
                    path: nodes.clone(),
                    delay_ns: Some(cost.delay_ns),
                    bw_util: Some(cost.bw_util),
                    deadline_ns: r.deadline_ns,
                    demand_bps: r.demand_bps,
                    reason: None,
                },
                Outcome::Rejected { reason } => FlowRecord {
                    id: r.flow,
                    status: Status::Rejected,
                    branch: None,
                    path: Vec::new(),
                    delay_ns: None,
                    bw_util: None,
                    deadline_ns: r.deadline_ns,
                    demand_bps: r.demand_bps,
                    reason: Some(*reason),
                },
            })
            .collect();
        LayoutReportFile {
            format_version: FORMAT_VERSION,
            schedulable: self.schedulable,
            flows,
        }
    }
}

impl LayoutReportFile {
    /// Rebuilds edge paths and costs against `topology`.
    pub fn resolve(&self, topology: &Topology) -> Result<LayoutReport, LayoutError> {
        if self.format_version != FORMAT_VERSION {
            return Err(ModelError::UnsupportedFormatVersion(self.format_version).into());
        }
        let mut results = Vec::with_capacity(self.flows.len());
        for r in &self.flows {
            let outcome = match r.status {
                Status::Placed => {
                    let path = path_edges(topology, &r.path).map_err(|_| {
                        LayoutError::Mismatch(format!("flow {}: path is not in the topology", r.id))
                    })?;
                    if path.is_empty() {
                        return Err(LayoutError::Mismatch(format!(
                            "flow {}: placed with an empty path",
                            r.id
                        )));
                    }
                    let spec = FlowSpec::new(
                        r.id.0,
                        r.path[0],
                        *r.path.last().unwrap(),
                        r.deadline_ns,
                        r.demand_bps,
                    );
                    let cost = crate::model::path_cost(topology, &path, &spec)?;
                    Outcome::Placed {
                        path,
                        nodes: r.path.clone(),
                        branch: r.branch.ok_or_else(|| {
                            LayoutError::Mismatch(format!("flow {}: placed without a branch", r.id))
                        })?,
                        cost,
                    }
                }
                Status::Rejected => Outcome::Rejected {
                    reason: r.reason.unwrap_or(RejectReason::NoFeasiblePath),
                },
            };
            results.push(LayoutResult {
                flow: r.id,
                deadline_ns: r.deadline_ns,
                demand_bps: r.demand_bps,
                outcome,
            });
        }
        let schedulable = results.iter().all(|r| r.is_placed());
        Ok(LayoutReport {
            results,
            schedulable,
        })
    }
}
