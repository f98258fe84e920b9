//! Per-link delay components: switch processing, propagation and transmission.

use serde::{Deserialize, Serialize};

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT_M_PER_S: f64 = 299_792_458.0;

/// Parameters of the per-link delay bound.
///
/// Defaults: 3.6 µs measured software-switch processing time, 100 m links at
/// 0.66 c, and 125-byte maximum packets.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DelayModel {
    pub processing_ns: u64,
    pub link_length_m: f64,
    pub propagation_fraction_of_c: f64,
    pub max_packet_bytes: u64,
}

impl Default for DelayModel {
    fn default() -> Self {
        Self {
            processing_ns: 3_600,
            link_length_m: 100.0,
            propagation_fraction_of_c: 0.66,
            max_packet_bytes: 125,
        }
    }
}

/// Integer ceiling of `bits * 1e9 / rate_bps`.
pub fn serialization_ns(bits: u64, rate_bps: u64) -> u64 {
    assert!(rate_bps > 0, "rate must be positive");
    let num = bits as u128 * 1_000_000_000u128;
    num.div_ceil(rate_bps as u128) as u64
}

impl DelayModel {
    pub fn propagation_ns(&self) -> u64 {
        let secs = self.link_length_m / (self.propagation_fraction_of_c * SPEED_OF_LIGHT_M_PER_S);
        (secs * 1e9).ceil() as u64
    }

    pub fn transmission_ns(&self, bandwidth_bps: u64) -> u64 {
        serialization_ns(self.max_packet_bytes * 8, bandwidth_bps)
    }

    /// Upper bound on the delay of a single link: processing + propagation + transmission.
    pub fn edge_delay_bound(&self, bandwidth_bps: u64) -> u64 {
        self.processing_ns + self.propagation_ns() + self.transmission_ns(bandwidth_bps)
    }
}
