//! Seeded random topologies: a uniform spanning tree over the switches, extra
//! switch links added independently, and leaf hosts on every switch.

use std::ops::RangeInclusive;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{Edge, ModelError, Node, NodeId, NodeKind, Topology, DEFAULT_QUEUES_PER_PORT};

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct RandomTopologyParams {
    pub n_switches: u32,
    pub hosts_per_switch: u32,
    pub bandwidth_bps: u64,
    pub delay_range_ns: RangeInclusive<u64>,
    /// Probability of each non-tree switch pair being linked.
    pub extra_edge_prob: f64,
    pub queues_per_port: u32,
}

impl Default for RandomTopologyParams {
    fn default() -> Self {
        Self {
            n_switches: 5,
            hosts_per_switch: 2,
            bandwidth_bps: 10_000_000,
            delay_range_ns: 25_000..=125_000,
            extra_edge_prob: 0.3,
            queues_per_port: DEFAULT_QUEUES_PER_PORT,
        }
    }
}

/// Uniform random labelled tree on `n >= 2` vertices, decoded from a random Prüfer sequence.
fn random_tree<R: Rng>(rng: &mut R, n: usize) -> Vec<(usize, usize)> {
    if n == 2 {
        return vec![(0, 1)];
    }
    let seq: Vec<usize> = (0..n - 2).map(|_| rng.random_range(0..n)).collect();
    let mut degree = vec![1usize; n];
    for &s in &seq {
        degree[s] += 1;
    }
    let mut edges = Vec::with_capacity(n - 1);
    for &s in &seq {
        let leaf = (0..n)
            .find(|&v| degree[v] == 1)
            .expect("a leaf always exists");
        edges.push((leaf.min(s), leaf.max(s)));
        degree[leaf] -= 1;
        degree[s] -= 1;
    }
    let rest: Vec<usize> = (0..n).filter(|&v| degree[v] == 1).collect();
    edges.push((rest[0], rest[1]));
    edges
}

/// Switch `i` gets id `i`; host `h` of switch `s` gets id `n_switches + s * hosts_per_switch + h`.
#[allow(clippy::needless_range_loop)]
pub fn random_topology(seed: u64, params: &RandomTopologyParams) -> Result<Topology, ModelError> {
    if params.n_switches < 2 {
        return Err(ModelError::InvalidParams(
            "need at least two switches".into(),
        ));
    }
    if params.delay_range_ns.is_empty() || *params.delay_range_ns.start() == 0 {
        return Err(ModelError::InvalidParams(
            "delay range must be nonempty and positive".into(),
        ));
    }
    if params.bandwidth_bps == 0 {
        return Err(ModelError::InvalidParams(
            "bandwidth must be positive".into(),
        ));
    }
    if !(0.0..=1.0).contains(&params.extra_edge_prob) {
        return Err(ModelError::InvalidParams(
            "extra edge probability must lie in [0, 1]".into(),
        ));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = params.n_switches as usize;
    let delay = |rng: &mut ChaCha8Rng| rng.random_range(params.delay_range_ns.clone());

    let mut nodes: Vec<Node> = (0..params.n_switches)
        .map(|i| Node {
            id: NodeId(i),
            kind: NodeKind::Switch,
        })
        .collect();
    let mut linked = vec![vec![false; n]; n];
    let mut edges = Vec::new();
    for (a, b) in random_tree(&mut rng, n) {
        linked[a][b] = true;
        edges.push(Edge::new(
            NodeId(a as u32),
            NodeId(b as u32),
            params.bandwidth_bps,
            delay(&mut rng),
        ));
    }
    for a in 0..n {
        for b in a + 1..n {
            if !linked[a][b] && rng.random_bool(params.extra_edge_prob) {
                edges.push(Edge::new(
                    NodeId(a as u32),
                    NodeId(b as u32),
                    params.bandwidth_bps,
                    delay(&mut rng),
                ));
            }
        }
    }
    for s in 0..params.n_switches {
        for h in 0..params.hosts_per_switch {
            let id = NodeId(params.n_switches + s * params.hosts_per_switch + h);
            nodes.push(Node {
                id,
                kind: NodeKind::Host,
            });
            edges.push(Edge::new(
                id,
                NodeId(s),
                params.bandwidth_bps,
                delay(&mut rng),
            ));
        }
    }
    Topology::new(nodes, edges, params.queues_per_port)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_bytes() {
        let p = RandomTopologyParams::default();
        let a = serde_json::to_string(&random_topology(1, &p).unwrap()).unwrap();
        let b = serde_json::to_string(&random_topology(1, &p).unwrap()).unwrap();
        assert_eq!(a, b);
        let c = serde_json::to_string(&random_topology(2, &p).unwrap()).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn node_count_and_delay_range() {
        let p = RandomTopologyParams::default();
        for seed in 0..50 {
            let t = random_topology(seed, &p).unwrap();
            assert_eq!(t.node_count(), 15);
            assert_eq!(t.hosts().count(), 10);
            assert!(t.switches_connected());
            assert!(t
                .edges()
                .iter()
                .all(|e| (25_000..=125_000).contains(&e.delay_ns())));
            assert!(t.hosts().all(|h| t.attachment(h).is_some()));
        }
    }

    #[test]
    fn tree_only_when_no_extra_edges() {
        let p = RandomTopologyParams {
            n_switches: 9,
            hosts_per_switch: 0,
            extra_edge_prob: 0.0,
            ..Default::default()
        };
        for seed in 0..20 {
            let t = random_topology(seed, &p).unwrap();
            assert_eq!(t.edges().len(), 8);
            assert!(t.switches_connected());
        }
    }

    #[test]
    fn invalid_parameters() {
        let p = RandomTopologyParams {
            n_switches: 1,
            ..Default::default()
        };
        assert!(matches!(
            random_topology(0, &p),
            Err(ModelError::InvalidParams(_))
        ));
        #[allow(clippy::reversed_empty_ranges)]
        let p = RandomTopologyParams {
            delay_range_ns: 10..=5,
            ..Default::default()
        };
        assert!(matches!(
            random_topology(0, &p),
            Err(ModelError::InvalidParams(_))
        ));
    }
}
