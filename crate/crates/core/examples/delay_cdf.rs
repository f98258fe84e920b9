//! Bursty real-time traffic on random schedulable layouts, with best-effort
//! background flows. Prints per-instance round-trip figures against the
//! diameter bound and a coarse CDF of per-flow p99 delays.
//!
//! `cargo run --release --example delay_cdf`

use rtsdn::experiments::{delay_cdf_run, DelayCdfConfig, Metric};

fn main() -> anyhow::Result<()> {
    let result = delay_cdf_run(&DelayCdfConfig::default(), None)?;
    println!(
        "{:>4} {:>4} {:>10} {:>12} {:>12} {:>7}",
        "inst", "diam", "bound(us)", "p99 rt(us)", "max rt(us)", "misses"
    );
    for i in &result.instances {
        println!(
            "{:>4} {:>4} {:>10.1} {:>12.1} {:>12.1} {:>7}",
            i.instance,
            i.diameter,
            i.round_trip_bound_ns as f64 / 1e3,
            i.max_rt_p99_round_trip_ns as f64 / 1e3,
            i.max_rt_round_trip_ns as f64 / 1e3,
            i.deadline_misses
        );
    }
    println!("\np99 round-trip CDF:");
    let p99: Vec<_> = result
        .cdf
        .iter()
        .filter(|p| p.metric == Metric::P99)
        .collect();
    for p in p99
        .iter()
        .step_by((p99.len() / 10).max(1))
        .chain(p99.last())
    {
        println!("  {:>9.1} us  {:.2}", p.delay_ns / 1e3, p.fraction);
    }
    Ok(())
}
