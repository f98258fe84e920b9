use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{stream, with_jobs, ExperimentError};
use crate::layout::{layout_paths, LayoutReport};
use crate::model::{
    serialization_ns, Edge, FlowId, FlowSet, FlowSpec, Node, NodeId, NodeKind, Topology,
};
use crate::seeds::derive_seed;
use crate::sim::{
    simulate, QueueMode, SimConfig, SimReport, Traffic, TrafficProfile, TrafficShape,
};
use crate::solver::RelaxParams;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueueCompareConfig {
    /// Send rate of each flow as a fraction of its reservation.
    pub rate_fractions: Vec<f64>,
    pub seeds: usize,
    /// Packets sent per flow at every rate.
    pub packets: u64,
    pub reserved_bps: u64,
    pub host_link_bps: u64,
    pub core_link_bps: u64,
    pub packet_bytes: u64,
    pub jitter_ns: u64,
    pub seed: u64,
}

impl Default for QueueCompareConfig {
    fn default() -> Self {
        Self {
            rate_fractions: vec![0.5, 0.7, 0.9, 0.96],
            seeds: 20,
            packets: 2_000,
            reserved_bps: 50_000_000,
            host_link_bps: 100_000_000,
            core_link_bps: 1_000_000_000,
            packet_bytes: 125,
            jitter_ns: 2_000,
            seed: 0,
        }
    }
}

/// Mean and p99 one-way delay averaged over both flows, for one seed and rate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueueSeedRow {
    pub rate_fraction: f64,
    pub send_rate_bps: u64,
    pub seed_index: usize,
    pub separate_mean_ns: f64,
    pub separate_p99_ns: f64,
    pub shared_mean_ns: f64,
    pub shared_p99_ns: f64,
}

/// Seed-averaged figures at one rate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueuePoint {
    pub rate_fraction: f64,
    pub send_rate_bps: u64,
    pub separate_mean_ns: f64,
    pub separate_p99_ns: f64,
    pub shared_mean_ns: f64,
    pub shared_p99_ns: f64,
    /// Share of seeds in which the separate queues had the lower mean delay.
    pub separate_better_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueueCompareResult {
    pub points: Vec<QueuePoint>,
    pub rows: Vec<QueueSeedRow>,
}

impl QueueCompareResult {
    pub fn to_csv(&self) -> anyhow::Result<String> {
        crate::io::to_csv_string(&self.points)
    }

    pub fn rows_csv(&self) -> anyhow::Result<String> {
        crate::io::to_csv_string(&self.rows)
    }
}

/// Two switches joined by a core link with two hosts on each side, and two
/// flows that cross the core in the same direction: 10 to 12 and 11 to 13.
pub fn queue_fixture(
    config: &QueueCompareConfig,
) -> Result<(Topology, FlowSet, LayoutReport), ExperimentError> {
    let node = |id, kind| Node {
        id: NodeId(id),
        kind,
    };
    let (h, c) = (config.host_link_bps, config.core_link_bps);
    let topology = Topology::new(
        vec![
            node(0, NodeKind::Switch),
            node(1, NodeKind::Switch),
            node(10, NodeKind::Host),
            node(11, NodeKind::Host),
            node(12, NodeKind::Host),
            node(13, NodeKind::Host),
        ],
        vec![
            Edge::new(NodeId(10), NodeId(0), h, 50_000),
            Edge::new(NodeId(11), NodeId(0), h, 50_000),
            Edge::new(NodeId(0), NodeId(1), c, 50_000),
            Edge::new(NodeId(1), NodeId(12), h, 50_000),
            Edge::new(NodeId(1), NodeId(13), h, 50_000),
        ],
        8,
    )?;
    let flows = FlowSet::new(vec![
        FlowSpec::new(1, NodeId(10), NodeId(12), 1_000_000, config.reserved_bps),
        FlowSpec::new(2, NodeId(11), NodeId(13), 1_100_000, config.reserved_bps),
    ])?;
    let report = layout_paths(&topology, &flows, RelaxParams::default())?;
    if !report.schedulable {
        return Err(ExperimentError::InvalidParams(
            "reservation does not fit the fixture links".into(),
        ));
    }
    Ok((topology, flows, report))
}

fn mean_over_flows(r: &SimReport) -> (f64, f64) {
    let n = r.flows.len() as f64;
    let mean = r.flows.iter().map(|f| f.mean_delay_ns).sum::<f64>() / n;
    let p99 = r.flows.iter().map(|f| f.p99_delay_ns as f64).sum::<f64>() / n;
    (mean, p99)
}

/// Simulates both flows under separate per-flow queues and under one shared
/// queue, at each send rate and seed. A seed is reused across rates and modes
/// so that every comparison is paired.
pub fn queue_strategy_compare(
    config: &QueueCompareConfig,
    jobs: Option<usize>,
) -> Result<QueueCompareResult, ExperimentError> {
    if config.rate_fractions.is_empty() || config.seeds == 0 || config.packets == 0 {
        return Err(ExperimentError::InvalidParams(
            "need rates, seeds and packets".into(),
        ));
    }
    if config
        .rate_fractions
        .iter()
        .any(|&f| !(f > 0.0 && f <= 1.0))
    {
        return Err(ExperimentError::InvalidParams(
            "rate fractions must lie in (0, 1]".into(),
        ));
    }
    let (topology, _, report) = queue_fixture(config)?;
    let bits = config.packet_bytes * 8;
    let tasks: Vec<(usize, usize)> = (0..config.rate_fractions.len())
        .flat_map(|r| (0..config.seeds).map(move |s| (r, s)))
        .collect();
    let rows = with_jobs(jobs, || {
        tasks
            .par_iter()
            .map(|&(ri, si)| {
                let fraction = config.rate_fractions[ri];
                let rate = (config.reserved_bps as f64 * fraction).round() as u64;
                let shape = TrafficShape {
                    duration_ns: config.packets * serialization_ns(bits, rate),
                    ..TrafficShape::constant(rate, config.packet_bytes, 0)
                };
                let traffic = Traffic {
                    profiles: vec![
                        TrafficProfile {
                            flow: FlowId(1),
                            shape,
                        },
                        TrafficProfile {
                            flow: FlowId(2),
                            shape,
                        },
                    ],
                    best_effort: vec![],
                };
                let mut cfg = SimConfig {
                    seed: derive_seed(config.seed, stream::QUEUES, si as u64),
                    jitter_ns: config.jitter_ns,
                    ..Default::default()
                };
                let (sep_mean, sep_p99) =
                    mean_over_flows(&simulate(&topology, &report, &traffic, &cfg)?);
                cfg.mode = QueueMode::SharedSingle;
                let (sh_mean, sh_p99) =
                    mean_over_flows(&simulate(&topology, &report, &traffic, &cfg)?);
                Ok(QueueSeedRow {
                    rate_fraction: fraction,
                    send_rate_bps: rate,
                    seed_index: si,
                    separate_mean_ns: sep_mean,
                    separate_p99_ns: sep_p99,
                    shared_mean_ns: sh_mean,
                    shared_p99_ns: sh_p99,
                })
            })
            .collect::<Result<Vec<_>, ExperimentError>>()
    })?;

    let points = config
        .rate_fractions
        .iter()
        .enumerate()
        .map(|(ri, &fraction)| {
            let rs = &rows[ri * config.seeds..(ri + 1) * config.seeds];
            let n = rs.len() as f64;
            let avg = |f: fn(&QueueSeedRow) -> f64| rs.iter().map(f).sum::<f64>() / n;
            QueuePoint {
                rate_fraction: fraction,
                send_rate_bps: rs[0].send_rate_bps,
                separate_mean_ns: avg(|r| r.separate_mean_ns),
                separate_p99_ns: avg(|r| r.separate_p99_ns),
                shared_mean_ns: avg(|r| r.shared_mean_ns),
                shared_p99_ns: avg(|r| r.shared_p99_ns),
                separate_better_fraction: rs
                    .iter()
                    .filter(|r| r.separate_mean_ns < r.shared_mean_ns)
                    .count() as f64
                    / n,
            }
        })
        .collect();
    Ok(QueueCompareResult { points, rows })
}
