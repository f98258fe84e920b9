use rand::Rng;
use serde::{Deserialize, Serialize};

use super::SimError;
use crate::io::FORMAT_VERSION;
use crate::model::{FlowId, NodeId};

pub const DEFAULT_PACKET_BYTES: u64 = 125;

fn default_packet_bytes() -> u64 {
    DEFAULT_PACKET_BYTES
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Pattern {
    /// Evenly spaced packets at the send rate.
    ConstantRate,
    /// `burst_size` packets at the send rate every `inter_burst_ns`.
    Burst {
        burst_size: u32,
        inter_burst_ns: u64,
    },
}

/// How a source emits packets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrafficShape {
    pub send_rate_bps: u64,
    #[serde(default = "default_packet_bytes")]
    pub packet_bytes: u64,
    pub pattern: Pattern,
    pub duration_ns: u64,
}

impl TrafficShape {
    pub fn constant(send_rate_bps: u64, packet_bytes: u64, duration_ns: u64) -> Self {
        Self {
            send_rate_bps,
            packet_bytes,
            pattern: Pattern::ConstantRate,
            duration_ns,
        }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if self.send_rate_bps == 0 || self.packet_bytes == 0 {
            return Err(SimError::InvalidProfile(
                "send rate and packet size must be positive".into(),
            ));
        }
        if let Pattern::Burst {
            burst_size,
            inter_burst_ns,
        } = self.pattern
        {
            if burst_size == 0 || inter_burst_ns == 0 {
                return Err(SimError::InvalidProfile(
                    "bursts need a positive size and spacing".into(),
                ));
            }
        }
        Ok(())
    }

    fn bits(&self) -> u128 {
        self.packet_bytes as u128 * 8
    }

    /// Spacing of consecutive packets at the send rate, as an exact offset of packet `k`.
    fn spacing(&self, k: u64) -> u64 {
        (k as u128 * self.bits() * 1_000_000_000 / self.send_rate_bps as u128) as u64
    }

    /// Average offered load in bits per second.
    pub fn average_rate_bps(&self) -> f64 {
        match self.pattern {
            Pattern::ConstantRate => self.send_rate_bps as f64,
            Pattern::Burst {
                burst_size,
                inter_burst_ns,
            } => burst_size as f64 * self.bits() as f64 * 1e9 / inter_burst_ns as f64,
        }
    }

    /// Generation times within `[0, duration)`, shifted by a random phase and
    /// per-packet jitter in `[0, jitter_ns)`. The phase is drawn first and one
    /// jitter value per packet after it, so equal seeds give comparable runs
    /// across rates.
    pub fn generate<R: Rng>(&self, rng: &mut R, jitter_ns: u64) -> Vec<u64> {
        let u: f64 = rng.random();
        let mut times = Vec::new();
        let period = match self.pattern {
            Pattern::ConstantRate => self.spacing(1),
            Pattern::Burst { inter_burst_ns, .. } => inter_burst_ns,
        };
        let offset = (u * period as f64) as u64;
        match self.pattern {
            Pattern::ConstantRate => {
                for k in 0.. {
                    let t = offset + self.spacing(k);
                    if t >= self.duration_ns {
                        break;
                    }
                    times.push(t);
                }
            }
            Pattern::Burst {
                burst_size,
                inter_burst_ns,
            } => {
                'bursts: for m in 0u64.. {
                    let base = offset + m * inter_burst_ns;
                    for i in 0..burst_size as u64 {
                        let t = base + self.spacing(i);
                        if t >= self.duration_ns {
                            if i == 0 {
                                break 'bursts;
                            }
                            continue 'bursts;
                        }
                        times.push(t);
                    }
                }
            }
        }
        if jitter_ns > 0 {
            for t in &mut times {
                *t += rng.random_range(0..jitter_ns);
            }
        }
        times
    }
}

/// Traffic of one placed real-time flow.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrafficProfile {
    pub flow: FlowId,
    #[serde(flatten)]
    pub shape: TrafficShape,
}

/// Non-critical traffic between two hosts, carried by the default queues.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BestEffortFlow {
    pub source: NodeId,
    pub dest: NodeId,
    pub profile: TrafficShape,
}

/// Everything offered to the network in one run.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(try_from = "TrafficFile", into = "TrafficFile")]
pub struct Traffic {
    pub profiles: Vec<TrafficProfile>,
    pub best_effort: Vec<BestEffortFlow>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrafficFile {
    pub format_version: u32,
    pub profiles: Vec<TrafficProfile>,
    #[serde(default)]
    pub best_effort: Vec<BestEffortFlow>,
}

impl TryFrom<TrafficFile> for Traffic {
    type Error = SimError;

    fn try_from(f: TrafficFile) -> Result<Self, Self::Error> {
        if f.format_version != FORMAT_VERSION {
            return Err(SimError::InvalidProfile(format!(
                "unsupported format version {}",
                f.format_version
            )));
        }
        Ok(Traffic {
            profiles: f.profiles,
            best_effort: f.best_effort,
        })
    }
}

impl From<Traffic> for TrafficFile {
    fn from(t: Traffic) -> Self {
        TrafficFile {
            format_version: FORMAT_VERSION,
            profiles: t.profiles,
            best_effort: t.best_effort,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn constant_rate_spacing() {
        // 125 B at 10 Mbps: one packet per 100 us.
        let s = TrafficShape::constant(10_000_000, 125, 1_000_000);
        let t = s.generate(&mut ChaCha8Rng::seed_from_u64(0), 0);
        assert_eq!(t.len(), 10);
        for w in t.windows(2) {
            assert_eq!(w[1] - w[0], 100_000);
        }
        assert!(t[0] < 100_000);
    }

    #[test]
    fn fixed_duration_gives_fixed_count() {
        for rate in [5_000_000u64, 7_000_000, 9_600_000] {
            let s = TrafficShape::constant(rate, 125, 0);
            let n = 500;
            let s = TrafficShape {
                duration_ns: s.spacing(n),
                ..s
            };
            for seed in 0..5 {
                assert_eq!(
                    s.generate(&mut ChaCha8Rng::seed_from_u64(seed), 2_000)
                        .len(),
                    n as usize
                );
            }
        }
    }

    #[test]
    fn bursts() {
        let s = TrafficShape {
            send_rate_bps: 10_000_000,
            packet_bytes: 25,
            pattern: Pattern::Burst {
                burst_size: 5,
                inter_burst_ns: 1_000_000,
            },
            duration_ns: 10_000_000,
        };
        let t = s.generate(&mut ChaCha8Rng::seed_from_u64(3), 0);
        assert_eq!(t.len(), 50);
        assert_eq!(t[1] - t[0], 20_000);
        assert_eq!(t[5] - t[0], 1_000_000);
        assert!((s.average_rate_bps() - 1_000_000.0).abs() < 1e-6);
    }

    #[test]
    fn zero_duration_is_empty() {
        let s = TrafficShape::constant(1_000, 125, 0);
        assert!(s.generate(&mut ChaCha8Rng::seed_from_u64(0), 10).is_empty());
    }

    #[test]
    fn file_round_trip() {
        let t = Traffic {
            profiles: vec![TrafficProfile {
                flow: FlowId(3),
                shape: TrafficShape::constant(1_000_000, 125, 1_000),
            }],
            best_effort: vec![],
        };
        let json = serde_json::to_string(&t).unwrap();
        assert!(json.contains(r#""pattern":{"type":"constant_rate"}"#));
        assert_eq!(serde_json::from_str::<Traffic>(&json).unwrap(), t);
    }
}
