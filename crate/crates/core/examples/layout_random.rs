//! Lays out a random flow set on a random five-switch topology and re-checks
//! the result from scratch.
//!
//! `cargo run --example layout_random -- [seed] [flows] [d_min_us]`

use rtsdn::experiments::{deadline_schedule, random_flows, DeadlineBase};
use rtsdn::layout::{layout_paths_with_residuals, verify_layout, Outcome};
use rtsdn::model::{random_topology, FlowSet, FlowSpec, RandomTopologyParams};
use rtsdn::seeds::rng_for;
use rtsdn::solver::RelaxParams;

fn arg(i: usize, default: u64) -> anyhow::Result<u64> {
    Ok(std::env::args()
        .nth(i)
        .map(|s| s.parse())
        .transpose()?
        .unwrap_or(default))
}

fn main() -> anyhow::Result<()> {
    let seed = arg(1, 1)?;
    let count = arg(2, 6)? as usize;
    let d_min = arg(3, 500)? * 1_000;
    let topology = random_topology(seed, &RandomTopologyParams::default())?;
    let diameter = topology.diameter().unwrap();
    println!(
        "{} nodes, {} links, diameter {diameter}",
        topology.node_count(),
        topology.edges().len()
    );

    let draws = random_flows(
        &mut rng_for(seed, 0, 0),
        &topology,
        count,
        &(1_000_000..=5_000_000),
    )?;
    let deadlines = deadline_schedule(DeadlineBase::Absolute(d_min), count, diameter);
    let flows = FlowSet::new(
        draws
            .iter()
            .zip(&deadlines)
            .enumerate()
            .map(|(i, (f, &d))| FlowSpec::new(i as u32, f.source, f.dest, d, f.demand_bps))
            .collect(),
    )?;
    let (report, after) = layout_paths_with_residuals(&topology, &flows, RelaxParams::default())?;
    for r in &report.results {
        match &r.outcome {
            Outcome::Placed {
                nodes,
                branch,
                cost,
                ..
            } => println!(
                "flow {:>2} ({:.1} Mbps, deadline {} us): {:?} via {:?}, delay {} us",
                r.flow,
                r.demand_bps as f64 / 1e6,
                r.deadline_ns / 1_000,
                nodes.iter().map(|n| n.0).collect::<Vec<_>>(),
                branch,
                cost.delay_ns / 1_000
            ),
            Outcome::Rejected { reason } => println!("flow {:>2}: rejected, {reason:?}", r.flow),
        }
    }
    println!("schedulable: {}", report.schedulable);
    println!(
        "violations on re-check: {}",
        verify_layout(&topology, &flows, &report).len()
    );
    let tightest = after
        .edges()
        .iter()
        .map(|e| e.residual_bps())
        .min()
        .unwrap_or(0);
    println!("smallest residual: {:.2} Mbps", tightest as f64 / 1e6);
    Ok(())
}
