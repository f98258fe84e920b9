mod common;

use proptest::prelude::*;

use rtsdn::layout::{check_residuals, layout_paths, layout_paths_with_residuals, verify_layout};
use rtsdn::model::{bw_util_bound, path_bw_utilization, path_cost, path_delay, path_edges, NodeId};
use rtsdn::solver::{
    brute_force_mcp, mcp_heuristic, relax_ratio, RelaxParams, SolverError, DEFAULT_BRUTE_FORCE_CAP,
};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn heuristic_paths_satisfy_both_bounds(seed in any::<u64>(), x in 1u32..30) {
        let inst = common::random_mcp_instance(seed, x);
        match mcp_heuristic(&inst) {
            Ok(p) => {
                prop_assert!(p.satisfies(&inst));
                let mut seen = std::collections::HashSet::new();
                prop_assert!(p.nodes.iter().all(|n| seen.insert(*n)), "repeated node in {:?}", p.nodes);
                prop_assert_eq!(p.nodes.first(), Some(&inst.source));
                prop_assert_eq!(p.nodes.last(), Some(&inst.dest));
            }
            Err(e) => prop_assert_eq!(e, SolverError::NotFound),
        }
    }

    #[test]
    fn heuristic_never_beats_the_oracle(seed in any::<u64>()) {
        let inst = common::random_mcp_instance(seed, 10);
        let oracle = brute_force_mcp(&inst, DEFAULT_BRUTE_FORCE_CAP);
        if let Ok(p) = mcp_heuristic(&inst) {
            let best = oracle.expect("oracle must be feasible when the heuristic is");
            prop_assert!(best.satisfies(&inst));
            prop_assert!(best.w1 <= p.w1 || best.w2 <= p.w2);
        }
    }

    #[test]
    fn relaxed_feasibility_implies_raw_feasibility(
        raws in prop::collection::vec(1u128..1_000_000, 1..8),
        den in 1u128..5_000_000,
        x in 1u32..50,
    ) {
        let relaxed: u64 = raws.iter().map(|&r| relax_ratio(r, den, x).unwrap()).sum();
        let raw: u128 = raws.iter().sum();
        if relaxed <= x as u64 {
            prop_assert!(raw <= den);
        }
        prop_assert!(relaxed as u128 * den >= raw * x as u128);
    }

    #[test]
    fn path_costs_are_additive(seed in 0u64..10_000) {
        let (t, flows) = common::random_layout_instance(seed);
        let report = layout_paths(&t, &flows, RelaxParams::default()).unwrap();
        for r in report.placed() {
            let path = r.path().unwrap();
            let flow = flows.get(r.flow).unwrap();
            let whole = path_cost(&t, path, flow).unwrap();
            for cut in 0..=path.len() {
                let (a, b) = path.split_at(cut);
                prop_assert_eq!(path_delay(&t, a).unwrap() + path_delay(&t, b).unwrap(), whole.delay_ns);
                let u = path_bw_utilization(&t, a, flow).unwrap() + path_bw_utilization(&t, b, flow).unwrap();
                prop_assert!((u - whole.bw_util).abs() < 1e-9);
            }
            prop_assert_eq!(path_edges(&t, r.nodes().unwrap()).unwrap(), path.to_vec());
        }
    }

    #[test]
    fn utilization_budget_covers_every_simple_path(seed in 0u64..10_000) {
        let (t, flows) = common::random_layout_instance(seed);
        let flow = &flows.flows()[0];
        let bound = bw_util_bound(&t, flow).unwrap();
        // Longest simple path has |V| - 1 edges, each at most the worst utilization.
        let worst = t.edges().iter().map(|e| flow.demand_bps as f64 / e.bandwidth_bps() as f64).fold(0.0, f64::max);
        prop_assert!(worst * (t.node_count() - 1) as f64 <= bound);
        let report = layout_paths(&t, &flows, RelaxParams::default()).unwrap();
        for r in report.placed() {
            let f = flows.get(r.flow).unwrap();
            prop_assert!(path_bw_utilization(&t, r.path().unwrap(), f).unwrap() <= bw_util_bound(&t, f).unwrap());
        }
    }

    #[test]
    fn layouts_verify_and_conserve_bandwidth(seed in 0u64..10_000) {
        let (t, flows) = common::random_layout_instance(seed);
        let (report, after) = layout_paths_with_residuals(&t, &flows, RelaxParams::default()).unwrap();
        prop_assert_eq!(verify_layout(&t, &flows, &report), vec![]);
        prop_assert!(check_residuals(&after, &report).is_empty());
        prop_assert_eq!(report.schedulable, report.results.iter().all(|r| r.is_placed()));
        for r in report.placed() {
            let nodes = r.nodes().unwrap();
            let f = flows.get(r.flow).unwrap();
            prop_assert_eq!((nodes[0], *nodes.last().unwrap()), (f.source, f.dest));
            prop_assert!(nodes[1..nodes.len() - 1].iter().all(|&n: &NodeId| t.is_switch(n)));
        }
        prop_assert_eq!(layout_paths(&t, &flows, RelaxParams::default()).unwrap(), report);
    }
}
