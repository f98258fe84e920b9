//! Per-link delay bound for a few link rates and packet sizes.
//!
//! `cargo run --example delay_budget`

use rtsdn::model::DelayModel;

fn main() {
    let base = DelayModel::default();
    println!(
        "processing {} ns, propagation {} ns over {} m\n",
        base.processing_ns,
        base.propagation_ns(),
        base.link_length_m
    );
    println!(
        "{:>10} {:>8} {:>14} {:>12}",
        "link", "packet", "transmission", "bound"
    );
    for mbps in [10u64, 100, 1_000] {
        for bytes in [25u64, 125, 1_500] {
            let m = DelayModel {
                max_packet_bytes: bytes,
                ..base
            };
            let bps = mbps * 1_000_000;
            println!(
                "{:>6} Mbps {:>6} B {:>11.3} us {:>9.3} us",
                mbps,
                bytes,
                m.transmission_ns(bps) as f64 / 1e3,
                m.edge_delay_bound(bps) as f64 / 1e3
            );
        }
    }
}
