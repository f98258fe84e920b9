use std::collections::HashSet;
use std::ops::RangeInclusive;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::ExperimentError;
use crate::model::{NodeId, Topology};

/// How the tightest deadline of a flow set is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeadlineBase {
    /// The same base deadline on every topology.
    Absolute(u64),
    /// Base deadline per hop of topology diameter.
    PerDiameter(u64),
}

impl DeadlineBase {
    pub fn resolve(self, diameter: u32) -> u64 {
        match self {
            DeadlineBase::Absolute(ns) => ns,
            DeadlineBase::PerDiameter(ns) => ns * diameter as u64,
        }
    }
}

/// Deadlines for `count` flows: the base, then one tenth of the base more per
/// flow, kept strictly increasing.
pub fn deadline_schedule(base: DeadlineBase, count: usize, diameter: u32) -> Vec<u64> {
    let d_min = base.resolve(diameter);
    let mut out: Vec<u64> = Vec::with_capacity(count);
    for k in 0..count as u64 {
        let mut d = d_min + k * d_min / 10;
        if let Some(&prev) = out.last() {
            if d <= prev {
                d = prev + 1;
            }
        }
        out.push(d);
    }
    out
}

/// Endpoints and demand of one random flow.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlowDraw {
    pub source: NodeId,
    pub dest: NodeId,
    pub demand_bps: u64,
}

/// `count` flows between distinct ordered host pairs whose hosts sit on
/// different switches, with demands uniform in `demand_bps`.
pub fn random_flows<R: Rng>(
    rng: &mut R,
    topology: &Topology,
    count: usize,
    demand_bps: &RangeInclusive<u64>,
) -> Result<Vec<FlowDraw>, ExperimentError> {
    let hosts: Vec<NodeId> = topology.hosts().collect();
    let eligible = hosts
        .iter()
        .flat_map(|&a| hosts.iter().map(move |&b| (a, b)))
        .filter(|&(a, b)| a != b && topology.attachment(a) != topology.attachment(b))
        .count();
    if count > eligible {
        return Err(ExperimentError::InvalidParams(format!(
            "{count} flows requested but only {eligible} host pairs qualify"
        )));
    }
    if demand_bps.is_empty() || *demand_bps.start() == 0 {
        return Err(ExperimentError::InvalidParams(
            "demand range must be nonempty and positive".into(),
        ));
    }
    let mut used = HashSet::new();
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let s = hosts[rng.random_range(0..hosts.len())];
        let t = hosts[rng.random_range(0..hosts.len())];
        if s == t || topology.attachment(s) == topology.attachment(t) || !used.insert((s, t)) {
            continue;
        }
        out.push(FlowDraw {
            source: s,
            dest: t,
            demand_bps: rng.random_range(demand_bps.clone()),
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{random_topology, RandomTopologyParams};
    use crate::seeds::rng_for;

    #[test]
    fn schedule_examples() {
        assert_eq!(
            deadline_schedule(DeadlineBase::Absolute(300_000), 3, 9),
            vec![300_000, 330_000, 360_000]
        );
        assert_eq!(deadline_schedule(DeadlineBase::Absolute(5), 1, 1), vec![5]);
        assert_eq!(
            deadline_schedule(DeadlineBase::PerDiameter(100_000), 2, 4),
            vec![400_000, 440_000]
        );
        let tiny = deadline_schedule(DeadlineBase::Absolute(3), 5, 1);
        assert!(tiny.windows(2).all(|w| w[0] < w[1]), "{tiny:?}");
    }

    #[test]
    fn flows_use_distinct_pairs_on_distinct_switches() {
        let t = random_topology(3, &RandomTopologyParams::default()).unwrap();
        let mut rng = rng_for(1, 2, 3);
        let flows = random_flows(&mut rng, &t, 20, &(1_000_000..=5_000_000)).unwrap();
        let pairs: HashSet<_> = flows.iter().map(|f| (f.source, f.dest)).collect();
        assert_eq!(pairs.len(), 20);
        for f in &flows {
            assert!(t.is_host(f.source) && t.is_host(f.dest));
            assert_ne!(t.attachment(f.source), t.attachment(f.dest));
            assert!((1_000_000..=5_000_000).contains(&f.demand_bps));
        }
        assert!(random_flows(&mut rng, &t, 81, &(1..=2)).is_err());
    }
}
