//! Acceptance ratio over a grid of tightest deadlines and flow counts on
//! random five-switch topologies.
//!
//! `cargo run --release --example acceptance_surface -- [trials]`

use rtsdn::experiments::{acceptance_sweep, SweepConfig};

fn main() -> anyhow::Result<()> {
    let trials = std::env::args()
        .nth(1)
        .map(|s| s.parse())
        .transpose()?
        .unwrap_or(50);
    let config = SweepConfig {
        trials_per_cell: trials,
        ..Default::default()
    };
    let surface = acceptance_sweep(&config, None)?;

    print!("{:>10}", "d_min(us)");
    for n in &config.flow_counts {
        print!("{n:>7}");
    }
    println!();
    for &d in &config.d_min_grid {
        print!("{:>10}", d / 1_000);
        for &n in &config.flow_counts {
            print!("{:>7.2}", surface.get(d, n).unwrap().ratio);
        }
        println!();
    }
    println!(
        "worst monotonicity violation: {:.3}",
        surface.worst_monotonicity_violation()
    );
    Ok(())
}
