use std::ops::RangeInclusive;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::workload::{deadline_schedule, random_flows, DeadlineBase};
use super::{stream, with_jobs, ExperimentError};
use crate::layout::{check_residuals, layout_paths_with_residuals, verify_layout};
use crate::model::{random_topology, FlowSet, FlowSpec, RandomTopologyParams};
use crate::seeds::{derive_seed, rng_for};
use crate::solver::RelaxParams;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub n_switches: u32,
    pub hosts_per_switch: u32,
    pub bandwidth_bps: u64,
    pub delay_range_ns: RangeInclusive<u64>,
    pub extra_edge_prob: f64,
    pub flow_counts: Vec<usize>,
    /// Tightest deadline of each column, read through `deadline_basis`.
    pub d_min_grid: Vec<u64>,
    pub deadline_basis: DeadlineBasis,
    pub trials_per_cell: usize,
    pub demand_range_bps: RangeInclusive<u64>,
    pub relax: RelaxParams,
    pub seed: u64,
}

/// Whether grid values are absolute deadlines or per-hop-of-diameter budgets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeadlineBasis {
    Absolute,
    PerDiameter,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            n_switches: 5,
            hosts_per_switch: 2,
            bandwidth_bps: 10_000_000,
            delay_range_ns: 25_000..=125_000,
            extra_edge_prob: 0.3,
            flow_counts: vec![2, 5, 8, 11, 14, 17, 20],
            d_min_grid: (3..=10).map(|k| k * 100_000).collect(),
            deadline_basis: DeadlineBasis::Absolute,
            trials_per_cell: 50,
            demand_range_bps: 1_000_000..=5_000_000,
            relax: RelaxParams::default(),
            seed: 0,
        }
    }
}

impl SweepConfig {
    fn validate(&self) -> Result<(), ExperimentError> {
        if self.trials_per_cell == 0 || self.flow_counts.is_empty() || self.d_min_grid.is_empty() {
            return Err(ExperimentError::InvalidParams(
                "sweep grids and trial count must be nonempty".into(),
            ));
        }
        if self.flow_counts.contains(&0) || self.d_min_grid.contains(&0) {
            return Err(ExperimentError::InvalidParams(
                "flow counts and deadlines must be positive".into(),
            ));
        }
        Ok(())
    }

    fn topology_params(&self) -> RandomTopologyParams {
        RandomTopologyParams {
            n_switches: self.n_switches,
            hosts_per_switch: self.hosts_per_switch,
            bandwidth_bps: self.bandwidth_bps,
            delay_range_ns: self.delay_range_ns.clone(),
            extra_edge_prob: self.extra_edge_prob,
            ..Default::default()
        }
    }

    fn base(&self, d_min: u64) -> DeadlineBase {
        match self.deadline_basis {
            DeadlineBasis::Absolute => DeadlineBase::Absolute(d_min),
            DeadlineBasis::PerDiameter => DeadlineBase::PerDiameter(d_min),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub d_min_ns: u64,
    pub flow_count: usize,
    pub accepted: usize,
    pub trials: usize,
    pub ratio: f64,
    /// Constraint violations found when re-checking accepted layouts; zero
    /// unless the layout engine is broken.
    pub violations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AcceptanceSurface {
    pub deadline_basis: DeadlineBasis,
    /// Sorted by deadline, then flow count.
    pub cells: Vec<Cell>,
}

impl AcceptanceSurface {
    pub fn get(&self, d_min_ns: u64, flow_count: usize) -> Option<&Cell> {
        self.cells
            .iter()
            .find(|c| c.d_min_ns == d_min_ns && c.flow_count == flow_count)
    }

    pub fn to_csv(&self) -> anyhow::Result<String> {
        crate::io::to_csv_string(&self.cells)
    }

    /// Largest amount by which a ratio drops when the deadline loosens or
    /// rises when the flow count grows. Zero for a perfectly monotone surface.
    pub fn worst_monotonicity_violation(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for a in &self.cells {
            for b in &self.cells {
                if a.flow_count == b.flow_count && a.d_min_ns < b.d_min_ns {
                    worst = worst.max(a.ratio - b.ratio);
                }
                if a.d_min_ns == b.d_min_ns && a.flow_count < b.flow_count {
                    worst = worst.max(b.ratio - a.ratio);
                }
            }
        }
        worst
    }
}

/// Per trial, outcome of every cell in grid order: (accepted, violations).
fn run_trial(config: &SweepConfig, trial: usize) -> Result<Vec<(bool, usize)>, ExperimentError> {
    let topo = random_topology(
        derive_seed(config.seed, stream::TOPOLOGY, trial as u64),
        &config.topology_params(),
    )?;
    let diameter = topo.diameter().ok_or_else(|| {
        ExperimentError::InvalidParams("generated topology is disconnected".into())
    })?;
    let max_count = *config.flow_counts.iter().max().unwrap();
    let mut rng = rng_for(config.seed, stream::FLOWS, trial as u64);
    let draws = random_flows(&mut rng, &topo, max_count, &config.demand_range_bps)?;
    let mut out = Vec::with_capacity(config.d_min_grid.len() * config.flow_counts.len());
    for &d_min in &config.d_min_grid {
        for &count in &config.flow_counts {
            let deadlines = deadline_schedule(config.base(d_min), count, diameter);
            let specs = draws[..count]
                .iter()
                .zip(&deadlines)
                .enumerate()
                .map(|(i, (f, &d))| FlowSpec::new(i as u32, f.source, f.dest, d, f.demand_bps))
                .collect();
            let flows = FlowSet::new(specs)?;
            let (report, after) = layout_paths_with_residuals(&topo, &flows, config.relax)?;
            let violations = verify_layout(&topo, &flows, &report).len()
                + check_residuals(&after, &report).len();
            out.push((report.schedulable, violations));
        }
    }
    Ok(out)
}

/// Acceptance ratio per (deadline, flow count) cell.
///
/// Trial `t` draws one topology and one list of flows and every cell reuses
/// them: a cell with `n` flows takes the first `n` draws. Differences between
/// cells are then due to the deadlines and flow counts alone, not to sampling.
pub fn acceptance_sweep(
    config: &SweepConfig,
    jobs: Option<usize>,
) -> Result<AcceptanceSurface, ExperimentError> {
    config.validate()?;
    let trials: Vec<Vec<(bool, usize)>> = with_jobs(jobs, || {
        (0..config.trials_per_cell)
            .into_par_iter()
            .map(|t| run_trial(config, t))
            .collect::<Result<_, _>>()
    })?;
    let mut cells = Vec::new();
    let mut idx = 0;
    for &d_min in &config.d_min_grid {
        for &count in &config.flow_counts {
            let accepted = trials.iter().filter(|t| t[idx].0).count();
            let violations = trials.iter().map(|t| t[idx].1).sum();
            cells.push(Cell {
                d_min_ns: d_min,
                flow_count: count,
                accepted,
                trials: config.trials_per_cell,
                ratio: accepted as f64 / config.trials_per_cell as f64,
                violations,
            });
            idx += 1;
        }
    }
    cells.sort_by_key(|c| (c.d_min_ns, c.flow_count));
    Ok(AcceptanceSurface {
        deadline_basis: config.deadline_basis,
        cells,
    })
}
