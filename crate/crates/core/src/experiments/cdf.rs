use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::workload::{deadline_schedule, random_flows, DeadlineBase};
use super::{stream, with_jobs, ExperimentError};
use crate::layout::{layout_paths, LayoutReport};
use crate::model::{random_topology, FlowSet, FlowSpec, RandomTopologyParams, Topology};
use crate::seeds::{derive_seed, rng_for};
use crate::sim::{
    simulate, BestEffortFlow, Pattern, QueueMode, SimConfig, Traffic, TrafficProfile, TrafficShape,
};
use crate::solver::RelaxParams;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DelayCdfConfig {
    pub topology: RandomTopologyParams,
    /// Number of schedulable instances to simulate.
    pub instances: usize,
    pub rt_flows: usize,
    /// Each instance gets between one and this many best-effort flows.
    pub max_best_effort: usize,
    pub deadline_base: DeadlineBase,
    pub demand_range_bps: std::ops::RangeInclusive<u64>,
    /// Packet size of all traffic.
    pub packet_bytes: u64,
    pub burst_size: u32,
    pub inter_burst_ns: u64,
    pub duration_ns: u64,
    pub jitter_ns: u64,
    /// Give up after this many unschedulable draws.
    pub max_attempts: usize,
    pub relax: RelaxParams,
    pub seed: u64,
}

impl Default for DelayCdfConfig {
    fn default() -> Self {
        Self {
            topology: RandomTopologyParams::default(),
            instances: 25,
            rt_flows: 7,
            max_best_effort: 3,
            deadline_base: DeadlineBase::PerDiameter(100_000),
            demand_range_bps: 1_000_000..=5_000_000,
            // 25 B keeps the serialization time on a 10 Mbps link (20 us)
            // plus processing and propagation under the smallest link delay
            // bound of 25 us.
            packet_bytes: 25,
            burst_size: 5,
            inter_burst_ns: 1_000_000,
            duration_ns: 1_000_000_000,
            jitter_ns: 1_000,
            max_attempts: 10_000,
            relax: RelaxParams::default(),
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Mean,
    P99,
    Max,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CdfPoint {
    pub metric: Metric,
    pub delay_ns: f64,
    pub fraction: f64,
}

/// Outcome of one simulated instance. Round-trip figures are twice the
/// measured one-way delays.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceSummary {
    pub instance: usize,
    pub attempt: usize,
    pub diameter: u32,
    pub max_edge_delay_ns: u64,
    pub best_effort_flows: usize,
    pub packets_delivered: u64,
    pub deadline_misses: u64,
    pub max_rt_p99_round_trip_ns: u64,
    pub max_rt_round_trip_ns: u64,
    /// Twice the largest link delay bound times the diameter.
    pub round_trip_bound_ns: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DelayCdfResult {
    pub instances: Vec<InstanceSummary>,
    /// Empirical CDFs over per-flow round-trip mean, p99 and max.
    pub cdf: Vec<CdfPoint>,
}

impl DelayCdfResult {
    pub fn total_deadline_misses(&self) -> u64 {
        self.instances.iter().map(|i| i.deadline_misses).sum()
    }
}

/// `G(x) = (1/n) * #{ i : v_i <= x }` evaluated at every distinct sample.
pub fn empirical_cdf(values: &[f64]) -> Vec<(f64, f64)> {
    let mut v: Vec<f64> = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    let mut out: Vec<(f64, f64)> = Vec::new();
    for (i, x) in v.iter().enumerate() {
        let frac = (i + 1) as f64 / n;
        match out.last_mut() {
            Some(last) if last.0 == *x => last.1 = frac,
            _ => out.push((*x, frac)),
        }
    }
    out
}

struct Instance {
    attempt: usize,
    topology: Topology,
    flows: FlowSet,
    report: LayoutReport,
    traffic: Traffic,
}

fn draw(config: &DelayCdfConfig, attempt: usize) -> Result<Option<Instance>, ExperimentError> {
    let topology = random_topology(
        derive_seed(config.seed, stream::CDF_TOPOLOGY, attempt as u64),
        &config.topology,
    )?;
    let diameter = topology.diameter().ok_or_else(|| {
        ExperimentError::InvalidParams("generated topology is disconnected".into())
    })?;
    let mut rng = rng_for(config.seed, stream::CDF_FLOWS, attempt as u64);
    let n_be = if config.max_best_effort == 0 {
        0
    } else {
        rng.random_range(1..=config.max_best_effort)
    };
    let draws = random_flows(
        &mut rng,
        &topology,
        config.rt_flows + n_be,
        &config.demand_range_bps,
    )?;
    let deadlines = deadline_schedule(config.deadline_base, config.rt_flows, diameter);
    let specs = draws[..config.rt_flows]
        .iter()
        .zip(&deadlines)
        .enumerate()
        .map(|(i, (f, &d))| FlowSpec::new(i as u32, f.source, f.dest, d, f.demand_bps))
        .collect();
    let flows = FlowSet::new(specs)?;
    let report = layout_paths(&topology, &flows, config.relax)?;
    if !report.schedulable {
        return Ok(None);
    }
    let line_rate = config.topology.bandwidth_bps;
    let burst = TrafficShape {
        send_rate_bps: line_rate,
        packet_bytes: config.packet_bytes,
        pattern: Pattern::Burst {
            burst_size: config.burst_size,
            inter_burst_ns: config.inter_burst_ns,
        },
        duration_ns: config.duration_ns,
    };
    let profiles = flows
        .flows()
        .iter()
        .map(|f| TrafficProfile {
            flow: f.id,
            shape: burst,
        })
        .collect();
    let best_effort = draws[config.rt_flows..]
        .iter()
        .map(|f| BestEffortFlow {
            source: f.source,
            dest: f.dest,
            profile: TrafficShape::constant(f.demand_bps, config.packet_bytes, config.duration_ns),
        })
        .collect();
    Ok(Some(Instance {
        attempt,
        topology,
        flows,
        report,
        traffic: Traffic {
            profiles,
            best_effort,
        },
    }))
}

/// Simulates `instances` schedulable random layouts with bursty real-time
/// traffic policed to each flow's reservation, alongside best-effort flows in
/// the default queues.
pub fn delay_cdf_run(
    config: &DelayCdfConfig,
    jobs: Option<usize>,
) -> Result<DelayCdfResult, ExperimentError> {
    if config.instances == 0 || config.rt_flows == 0 {
        return Err(ExperimentError::InvalidParams(
            "need at least one instance and one flow".into(),
        ));
    }
    let mut picked = Vec::with_capacity(config.instances);
    for attempt in 0..config.max_attempts {
        if picked.len() == config.instances {
            break;
        }
        if let Some(inst) = draw(config, attempt)? {
            picked.push(inst);
        }
    }
    if picked.len() < config.instances {
        return Err(ExperimentError::InvalidParams(format!(
            "only {} schedulable instances in {} attempts",
            picked.len(),
            config.max_attempts
        )));
    }

    let runs = with_jobs(jobs, || {
        picked
            .par_iter()
            .enumerate()
            .map(|(i, inst)| {
                let cfg = SimConfig {
                    mode: QueueMode::SeparatePerFlow,
                    seed: derive_seed(config.seed, stream::CDF_SIM, i as u64),
                    police_ingress: true,
                    jitter_ns: config.jitter_ns,
                    ..Default::default()
                };
                simulate(&inst.topology, &inst.report, &inst.traffic, &cfg)
            })
            .collect::<Result<Vec<_>, _>>()
    })?;

    let mut instances = Vec::new();
    let (mut means, mut p99s, mut maxes) = (Vec::new(), Vec::new(), Vec::new());
    for (i, (inst, rep)) in picked.iter().zip(&runs).enumerate() {
        let diameter = inst.topology.diameter().unwrap();
        let max_edge = inst.topology.max_delay_ns().unwrap_or(0);
        for f in rep.real_time() {
            means.push(2.0 * f.mean_delay_ns);
            p99s.push(2.0 * f.p99_delay_ns as f64);
            maxes.push(2.0 * f.max_delay_ns as f64);
        }
        debug_assert_eq!(inst.flows.len(), rep.real_time().count());
        instances.push(InstanceSummary {
            instance: i,
            attempt: inst.attempt,
            diameter,
            max_edge_delay_ns: max_edge,
            best_effort_flows: inst.traffic.best_effort.len(),
            packets_delivered: rep.flows.iter().map(|f| f.packets_delivered).sum(),
            deadline_misses: rep.total_deadline_misses(),
            max_rt_p99_round_trip_ns: rep
                .real_time()
                .map(|f| 2 * f.p99_delay_ns)
                .max()
                .unwrap_or(0),
            max_rt_round_trip_ns: rep
                .real_time()
                .map(|f| 2 * f.max_delay_ns)
                .max()
                .unwrap_or(0),
            round_trip_bound_ns: 2 * max_edge * diameter as u64,
        });
    }
    let mut cdf = Vec::new();
    for (metric, values) in [
        (Metric::Mean, &means),
        (Metric::P99, &p99s),
        (Metric::Max, &maxes),
    ] {
        cdf.extend(empirical_cdf(values).into_iter().map(|(x, p)| CdfPoint {
            metric,
            delay_ns: x,
            fraction: p,
        }));
    }
    Ok(DelayCdfResult { instances, cdf })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cdf_axioms() {
        let c = empirical_cdf(&[3.0, 1.0, 2.0, 2.0]);
        assert_eq!(c, vec![(1.0, 0.25), (2.0, 0.75), (3.0, 1.0)]);
        assert!(empirical_cdf(&[]).is_empty());
        let step = empirical_cdf(&[7.0; 10]);
        assert_eq!(step, vec![(7.0, 1.0)]);
    }

    #[test]
    fn small_run_meets_deadlines() {
        let cfg = DelayCdfConfig {
            instances: 3,
            duration_ns: 50_000_000,
            ..Default::default()
        };
        let r = delay_cdf_run(&cfg, Some(2)).unwrap();
        assert_eq!(r.instances.len(), 3);
        assert_eq!(r.total_deadline_misses(), 0);
        for m in [Metric::Mean, Metric::P99, Metric::Max] {
            let pts: Vec<&CdfPoint> = r.cdf.iter().filter(|p| p.metric == m).collect();
            assert!(pts
                .windows(2)
                .all(|w| w[0].delay_ns < w[1].delay_ns && w[0].fraction <= w[1].fraction));
            assert_eq!(pts.last().unwrap().fraction, 1.0);
        }
    }
}
