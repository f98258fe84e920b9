//! Two flows crossing one core link, once with a queue per flow and once with
//! both flows in one shared queue, at increasing send rates.
//!
//! `cargo run --release --example queue_isolation`

use rtsdn::experiments::{queue_strategy_compare, QueueCompareConfig};

fn main() -> anyhow::Result<()> {
    let result = queue_strategy_compare(&QueueCompareConfig::default(), None)?;
    println!(
        "{:>6} {:>10} {:>12} {:>12} {:>12} {:>12} {:>8}",
        "rate", "Mbps", "sep mean", "shared mean", "sep p99", "shared p99", "sep<sh"
    );
    for p in &result.points {
        println!(
            "{:>6.2} {:>10.1} {:>12.0} {:>12.0} {:>12.0} {:>12.0} {:>8.2}",
            p.rate_fraction,
            p.send_rate_bps as f64 / 1e6,
            p.separate_mean_ns,
            p.shared_mean_ns,
            p.separate_p99_ns,
            p.shared_p99_ns,
            p.separate_better_fraction
        );
    }
    println!("(delays in ns)");
    Ok(())
}
