//! Real-time path layout for software-defined networks.
//!
//! Flows with hard end-to-end deadlines and bandwidth demands are routed one
//! at a time in delay-monotonic order by a two-constraint path search, then
//! compiled into per-switch forwarding rules with a dedicated egress queue per
//! flow. A discrete-event simulator replays the result under synthetic
//! traffic, and the experiment harness runs randomized schedulability sweeps.
//!
//! ```
//! use rtsdn::model::{random_topology, FlowSet, FlowSpec, RandomTopologyParams};
//! use rtsdn::layout::layout_paths;
//! use rtsdn::solver::RelaxParams;
//!
//! let topo = random_topology(7, &RandomTopologyParams::default()).unwrap();
//! let hosts: Vec<_> = topo.hosts().collect();
//! let flows = FlowSet::new(vec![FlowSpec::new(0, hosts[0], hosts[9], 1_000_000, 2_000_000)]).unwrap();
//! let report = layout_paths(&topo, &flows, RelaxParams::default()).unwrap();
//! assert!(report.schedulable);
//! ```

pub mod experiments;
pub mod intents;
pub mod io;
pub mod layout;
pub mod model;
pub mod seeds;
pub mod sim;
pub mod solver;
