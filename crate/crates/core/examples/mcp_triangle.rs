//! Two-constraint path search on a triangle: the direct edge is fast but
//! expensive in the second weight, the detour is slow but cheap. The search
//! returns the feasible path with the smallest second weight; the brute-force
//! reference prefers the smallest first weight, so both are shown.
//!
//! `cargo run --example mcp_triangle`

use rtsdn::solver::{
    brute_force_mcp, mcp_heuristic_traced, WeightedInstance, DEFAULT_BRUTE_FORCE_CAP,
};

fn triangle(c1: u128, c2: u32) -> WeightedInstance {
    let mut inst = WeightedInstance::new(3, 0, 2, c1, c2);
    inst.add_edge(0, 2, 100, 8, 0);
    inst.add_edge(0, 1, 120, 2, 1);
    inst.add_edge(1, 2, 130, 2, 2);
    inst
}

fn main() -> anyhow::Result<()> {
    for (c1, c2) in [(300, 10), (300, 5), (200, 10), (200, 5)] {
        let inst = triangle(c1, c2);
        let (path, state) = mcp_heuristic_traced(&inst)?;
        let oracle = brute_force_mcp(&inst, DEFAULT_BRUTE_FORCE_CAP).ok();
        match path {
            Some(p) => println!(
                "C1={c1} C2={c2}: path {:?} with W1={} W2={} after {} sweeps",
                p.nodes,
                p.w1,
                p.w2,
                state.sweeps()
            ),
            None => println!("C1={c1} C2={c2}: no path"),
        }
        println!("  reference (least W1): {:?}", oracle.map(|p| p.nodes));
    }
    println!(
        "\nfinal table for C1=300 C2=10:\n{}",
        mcp_heuristic_traced(&triangle(300, 10))?.1.to_csv()
    );
    Ok(())
}
