//! Additive path costs: end-to-end delay and bandwidth utilization.

use serde::{Deserialize, Serialize};

use super::{EdgeId, FlowSpec, ModelError, NodeId, Topology};

/// Delay and utilization of one path for one flow.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathCost {
    pub delay_ns: u64,
    pub bw_util: f64,
}

fn check_contiguous(topology: &Topology, path: &[EdgeId]) -> Result<(), ModelError> {
    for (i, pair) in path.windows(2).enumerate() {
        let (a, b) = topology.edge(pair[0]).endpoints();
        let next = topology.edge(pair[1]);
        if !next.touches(a) && !next.touches(b) {
            return Err(ModelError::NonContiguousPath { index: i + 1 });
        }
    }
    Ok(())
}

/// Sum of link delay bounds along `path`.
pub fn path_delay(topology: &Topology, path: &[EdgeId]) -> Result<u64, ModelError> {
    check_contiguous(topology, path)?;
    Ok(path.iter().map(|&e| topology.edge(e).delay_ns()).sum())
}

/// Sum over `path` of `demand / link bandwidth`.
pub fn path_bw_utilization(
    topology: &Topology,
    path: &[EdgeId],
    flow: &FlowSpec,
) -> Result<f64, ModelError> {
    check_contiguous(topology, path)?;
    Ok(path
        .iter()
        .map(|&e| flow.demand_bps as f64 / topology.edge(e).bandwidth_bps() as f64)
        .sum())
}

/// Utilization budget: the largest single-link utilization times the node count.
pub fn bw_util_bound(topology: &Topology, flow: &FlowSpec) -> Result<f64, ModelError> {
    let min_bw = topology
        .min_bandwidth_bps()
        .ok_or(ModelError::EmptyTopology)?;
    Ok(flow.demand_bps as f64 / min_bw as f64 * topology.node_count() as f64)
}

pub fn path_cost(
    topology: &Topology,
    path: &[EdgeId],
    flow: &FlowSpec,
) -> Result<PathCost, ModelError> {
    Ok(PathCost {
        delay_ns: path_delay(topology, path)?,
        bw_util: path_bw_utilization(topology, path, flow)?,
    })
}

/// Node sequence of an edge path starting at `source`.
pub fn path_nodes(
    topology: &Topology,
    source: NodeId,
    path: &[EdgeId],
) -> Result<Vec<NodeId>, ModelError> {
    let mut nodes = vec![source];
    let mut at = source;
    for (i, &e) in path.iter().enumerate() {
        at = topology
            .edge(e)
            .other(at)
            .ok_or(ModelError::NonContiguousPath { index: i })?;
        nodes.push(at);
    }
    Ok(nodes)
}

/// Edge sequence joining consecutive nodes.
pub fn path_edges(topology: &Topology, nodes: &[NodeId]) -> Result<Vec<EdgeId>, ModelError> {
    nodes
        .windows(2)
        .enumerate()
        .map(|(i, w)| {
            topology
                .edge_between(w[0], w[1])
                .ok_or(ModelError::NonContiguousPath { index: i })
        })
        .collect()
}

/// Fixed-point scale for exact utilization arithmetic.
///
/// Utilizations are represented as integers over a common denominator: the
/// least common multiple of all link bandwidths. When that overflows the scale
/// falls back to 2^64 and per-link values are rounded up, budgets down, so
/// comparisons stay conservative.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct UtilScale {
    denom: u128,
    exact: bool,
}

const FALLBACK_SCALE: u128 = 1 << 64;

fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

impl UtilScale {
    pub fn for_topology(topology: &Topology) -> Self {
        let mut denom: u128 = 1;
        for e in topology.edges() {
            let bw = e.bandwidth_bps() as u128;
            let g = gcd(denom, bw);
            match (denom / g).checked_mul(bw) {
                Some(l) if l <= FALLBACK_SCALE => denom = l,
                _ => {
                    return Self {
                        denom: FALLBACK_SCALE,
                        exact: false,
                    }
                }
            }
        }
        Self { denom, exact: true }
    }

    pub fn denom(&self) -> u128 {
        self.denom
    }

    pub fn is_exact(&self) -> bool {
        self.exact
    }

    /// `demand / bandwidth` in scale units, rounded up.
    pub fn units(&self, demand_bps: u64, bandwidth_bps: u64) -> u128 {
        (demand_bps as u128 * self.denom).div_ceil(bandwidth_bps as u128)
    }

    /// `demand * nodes / min_bandwidth` in scale units, rounded down.
    pub fn budget_units(&self, demand_bps: u64, nodes: usize, min_bandwidth_bps: u64) -> u128 {
        demand_bps as u128 * nodes as u128 * self.denom / min_bandwidth_bps as u128
    }

    pub fn to_f64(&self, units: u128) -> f64 {
        units as f64 / self.denom as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Edge, Node, NodeKind};

    fn chain(bandwidths: &[u64], delays: &[u64]) -> Topology {
        let n = bandwidths.len() as u32 + 1;
        let nodes = (0..n)
            .map(|i| Node {
                id: NodeId(i),
                kind: NodeKind::Switch,
            })
            .collect();
        let edges = bandwidths
            .iter()
            .zip(delays)
            .enumerate()
            .map(|(i, (&bw, &d))| Edge::new(NodeId(i as u32), NodeId(i as u32 + 1), bw, d))
            .collect();
        Topology::new(nodes, edges, 8).unwrap()
    }

    fn all(t: &Topology) -> Vec<EdgeId> {
        (0..t.edges().len()).map(EdgeId).collect()
    }

    #[test]
    fn delay_sums() {
        let t = chain(&[1, 1], &[105_000, 105_000]);
        assert_eq!(path_delay(&t, &[]).unwrap(), 0);
        assert_eq!(path_delay(&t, &all(&t)).unwrap(), 210_000);

        let delays = [25_000, 50_000, 75_000, 125_000];
        let t = chain(&[1; 4], &delays);
        let folded: u64 = delays.iter().sum();
        assert_eq!(folded, 275_000);
        assert_eq!(path_delay(&t, &all(&t)).unwrap(), folded);
    }

    #[test]
    fn utilization_sums() {
        let mbps = 1_000_000;
        let flow = FlowSpec::new(1, NodeId(0), NodeId(3), 1, 5 * mbps);
        let t = chain(&[10 * mbps; 3], &[1; 3]);
        assert_eq!(path_bw_utilization(&t, &[], &flow).unwrap(), 0.0);
        assert!((path_bw_utilization(&t, &all(&t), &flow).unwrap() - 1.5).abs() < 1e-12);

        let flow = FlowSpec::new(1, NodeId(0), NodeId(3), 1, mbps);
        let t = chain(&[10 * mbps, 5 * mbps, 2 * mbps], &[1; 3]);
        let hand = 0.1 + 0.2 + 0.5;
        assert!((path_bw_utilization(&t, &all(&t), &flow).unwrap() - hand).abs() < 1e-12);
    }

    #[test]
    fn non_contiguous_path_is_an_error() {
        let t = chain(&[1; 3], &[1; 3]);
        let err = path_delay(&t, &[EdgeId(0), EdgeId(2)]).unwrap_err();
        assert!(matches!(err, ModelError::NonContiguousPath { index: 1 }));
    }

    #[test]
    fn utilization_budget() {
        let mbps = 1_000_000;
        // 4 nodes, uniform 10 Mbps, 5 Mbps demand.
        let t = chain(&[10 * mbps; 3], &[1; 3]);
        let flow = FlowSpec::new(1, NodeId(0), NodeId(1), 1, 5 * mbps);
        assert!((bw_util_bound(&t, &flow).unwrap() - 2.0).abs() < 1e-12);

        // 5 nodes, links of 10 and 2 Mbps, 1 Mbps demand: 0.5 * 5.
        let t = chain(&[10 * mbps, 2 * mbps, 10 * mbps, 10 * mbps], &[1; 4]);
        let flow = FlowSpec::new(1, NodeId(0), NodeId(1), 1, mbps);
        assert!((bw_util_bound(&t, &flow).unwrap() - 2.5).abs() < 1e-12);

        // demand equal to the narrowest link gives the node count.
        let flow = FlowSpec::new(1, NodeId(0), NodeId(1), 1, 2 * mbps);
        assert!((bw_util_bound(&t, &flow).unwrap() - 5.0).abs() < 1e-12);

        let empty = Topology::new(
            vec![Node {
                id: NodeId(0),
                kind: NodeKind::Switch,
            }],
            vec![],
            8,
        )
        .unwrap();
        assert!(matches!(
            bw_util_bound(&empty, &flow),
            Err(ModelError::EmptyTopology)
        ));
    }

    #[test]
    fn exact_scale_matches_float_sums() {
        let mbps = 1_000_000;
        let t = chain(&[10 * mbps, 5 * mbps, 2 * mbps], &[1; 3]);
        let scale = UtilScale::for_topology(&t);
        assert!(scale.is_exact());
        assert_eq!(scale.denom(), 10 * mbps as u128);
        let units: u128 = t
            .edges()
            .iter()
            .map(|e| scale.units(mbps, e.bandwidth_bps()))
            .sum();
        assert_eq!(units, scale.denom() * 8 / 10);
        assert_eq!(scale.budget_units(mbps, 4, 2 * mbps), scale.denom() * 2);
    }

    #[test]
    fn node_and_edge_sequences_agree() {
        let t = chain(&[1; 3], &[1; 3]);
        let nodes = path_nodes(&t, NodeId(0), &all(&t)).unwrap();
        assert_eq!(nodes, vec![NodeId(0), NodeId(1), NodeId(2), NodeId(3)]);
        assert_eq!(path_edges(&t, &nodes).unwrap(), all(&t));
    }
}
