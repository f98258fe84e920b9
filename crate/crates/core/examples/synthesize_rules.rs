//! From a placed layout to per-switch intents, queue configurations and the
//! exported rule document, on a three-switch chain.
//!
//! `cargo run --example synthesize_rules`

use rtsdn::intents::{allocate_queues, decompose_report, export_rules, Ports};
use rtsdn::io::to_json_string;
use rtsdn::layout::layout_paths;
use rtsdn::model::{Edge, FlowSet, FlowSpec, Node, NodeId, NodeKind, Topology};
use rtsdn::solver::RelaxParams;

fn main() -> anyhow::Result<()> {
    let mut nodes = Vec::new();
    let mut edges = Vec::new();
    for i in 0..3 {
        nodes.push(Node {
            id: NodeId(i),
            kind: NodeKind::Switch,
        });
        nodes.push(Node {
            id: NodeId(10 + i),
            kind: NodeKind::Host,
        });
        edges.push(Edge::new(NodeId(10 + i), NodeId(i), 10_000_000, 40_000));
        if i > 0 {
            edges.push(Edge::new(NodeId(i - 1), NodeId(i), 10_000_000, 60_000));
        }
    }
    let topology = Topology::new(nodes, edges, 8)?;
    let flows = FlowSet::new(vec![
        FlowSpec::new(1, NodeId(10), NodeId(12), 400_000, 2_000_000),
        FlowSpec::new(2, NodeId(11), NodeId(12), 500_000, 3_000_000),
    ])?;
    let report = layout_paths(&topology, &flows, RelaxParams::default())?;

    let ports = Ports::new(&topology);
    let intents = decompose_report(&topology, &ports, &flows, &report)?;
    for it in &intents {
        println!(
            "flow {} at switch {}: in port {} -> out port {} at {} bps",
            it.flow, it.switch, it.in_port, it.out_port, it.rate_bps
        );
    }
    let queues = allocate_queues(&intents, &topology, &ports)?;
    for q in &queues {
        println!(
            "switch {} port {} queue {}: {:?} at {} bps",
            q.switch, q.port, q.queue_id, q.owner, q.rate_bps
        );
    }
    let doc = export_rules(&intents, &queues);
    println!("\n{} rules:\n{}", doc.rule_count(), to_json_string(&doc)?);
    Ok(())
}
