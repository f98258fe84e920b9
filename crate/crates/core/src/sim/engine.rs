use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap, VecDeque};

use super::{
    FlowStats, QueueMode, SimConfig, SimError, SimReport, Traffic, TrafficClass, TrafficShape,
};
use crate::layout::LayoutReport;
use crate::model::{serialization_ns, EdgeId, NodeId, Topology};
use crate::seeds::rng_for;

/// Priority of the default queue: below every real-time queue.
const DEFAULT_PRIO: u32 = u32::MAX;
const STREAM_TRAFFIC: u64 = 0x7472_6166;

struct Queue {
    fifo: VecDeque<usize>,
    /// Shaper rate; `None` serves at line rate.
    rate_bps: Option<u64>,
    /// Earliest time the shaper lets the next packet start.
    free_at: u64,
    /// When the current head reached the front.
    head_since: u64,
    prio: u32,
}

struct Port {
    link_bps: u64,
    wire_free_at: u64,
    queues: Vec<Queue>,
    /// Pending wake-up, to avoid piling duplicate events.
    wake_at: Option<u64>,
}

impl Port {
    fn queue(&mut self, rate_bps: Option<u64>, prio: u32) -> usize {
        self.queues.push(Queue {
            fifo: VecDeque::new(),
            rate_bps,
            free_at: 0,
            head_since: 0,
            prio,
        });
        self.queues.len() - 1
    }
}

#[derive(Clone, Copy)]
struct Hop {
    port: usize,
    queue: usize,
}

struct SimFlow {
    class: TrafficClass,
    id: u32,
    source: NodeId,
    dest: NodeId,
    deadline_ns: Option<u64>,
    shape: TrafficShape,
    hops: Vec<Hop>,
}

struct Packet {
    flow: usize,
    hop: usize,
    bits: u64,
    entered: Option<u64>,
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Event {
    Enqueue(usize),
    Deliver(usize),
    Wake(usize),
}

struct Network {
    ports: Vec<Port>,
    index: HashMap<(NodeId, EdgeId), usize>,
    shared: HashMap<usize, usize>,
}

impl Network {
    fn port(&mut self, topology: &Topology, node: NodeId, edge: EdgeId) -> usize {
        *self.index.entry((node, edge)).or_insert_with(|| {
            self.ports.push(Port {
                link_bps: topology.edge(edge).bandwidth_bps(),
                wire_free_at: 0,
                queues: vec![Queue {
                    fifo: VecDeque::new(),
                    rate_bps: None,
                    free_at: 0,
                    head_since: 0,
                    prio: DEFAULT_PRIO,
                }],
                wake_at: None,
            });
            self.ports.len() - 1
        })
    }
}

/// Shortest hop path that uses hosts only as endpoints; ties go to the lowest
/// node id.
fn shortest_path(topology: &Topology, source: NodeId, dest: NodeId) -> Option<Vec<NodeId>> {
    let mut prev: HashMap<NodeId, NodeId> = HashMap::new();
    let mut frontier = VecDeque::from([source]);
    let mut seen = std::collections::HashSet::from([source]);
    while let Some(u) = frontier.pop_front() {
        if u == dest {
            let mut path = vec![dest];
            while let Some(&p) = prev.get(path.last().unwrap()) {
                path.push(p);
            }
            path.reverse();
            return Some(path);
        }
        if u != source && !topology.is_switch(u) {
            continue;
        }
        let mut nbrs: Vec<NodeId> = topology.neighbors(u).map(|(n, _)| n).collect();
        nbrs.sort();
        for v in nbrs {
            if seen.insert(v) {
                prev.insert(v, u);
                frontier.push_back(v);
            }
        }
    }
    None
}

struct Sim<'a> {
    config: &'a SimConfig,
    net: Network,
    flows: Vec<SimFlow>,
    packets: Vec<Packet>,
    heap: BinaryHeap<Reverse<(u64, u64, Event)>>,
    seq: u64,
    samples: Vec<Vec<u64>>,
    dropped: Vec<u64>,
}

impl Sim<'_> {
    fn schedule(&mut self, at: u64, ev: Event) {
        self.heap.push(Reverse((at, self.seq, ev)));
        self.seq += 1;
    }

    fn enqueue(&mut self, now: u64, pkt: usize) {
        let p = &self.packets[pkt];
        let hop = self.flows[p.flow].hops[p.hop];
        let q = &mut self.net.ports[hop.port].queues[hop.queue];
        if let Some(cap) = self.config.queue_capacity {
            if q.fifo.len() >= cap {
                self.dropped[p.flow] += 1;
                return;
            }
        }
        if q.fifo.is_empty() {
            q.head_since = now;
        }
        q.fifo.push_back(pkt);
        self.serve(now, hop.port);
    }

    /// Starts the next transmission on `port` if the wire is idle and a queue
    /// head is eligible, otherwise arranges to be woken when one becomes so.
    fn serve(&mut self, now: u64, port_idx: usize) {
        let port = &mut self.net.ports[port_idx];
        if port.wire_free_at > now {
            return;
        }
        let mut best: Option<usize> = None;
        let mut next_eligible = u64::MAX;
        for (i, q) in port.queues.iter().enumerate() {
            if q.fifo.is_empty() {
                continue;
            }
            if q.free_at > now {
                next_eligible = next_eligible.min(q.free_at);
                continue;
            }
            if best.is_none_or(|b| q.prio < port.queues[b].prio) {
                best = Some(i);
            }
        }
        let Some(qi) = best else {
            if next_eligible != u64::MAX
                && port.wake_at.is_none_or(|w| w > next_eligible || w < now)
            {
                port.wake_at = Some(next_eligible);
                self.schedule(next_eligible, Event::Wake(port_idx));
            }
            return;
        };
        let link_bps = port.link_bps;
        let q = &mut port.queues[qi];
        let pkt = q.fifo.pop_front().unwrap();
        let eligible_since = q.head_since.max(q.free_at);
        let bits = self.packets[pkt].bits;
        let wire = serialization_ns(bits, link_bps);
        // The shaper clock runs from when the packet became eligible, not from
        // when it got the wire, so time spent behind higher-priority queues is
        // not taken out of this queue's rate.
        q.free_at = eligible_since + q.rate_bps.map_or(wire, |r| serialization_ns(bits, r));
        q.head_since = now;
        port.wire_free_at = now + wire;
        self.schedule(now + wire, Event::Wake(port_idx));

        let p = &mut self.packets[pkt];
        if p.hop == 0 {
            p.entered = Some(eligible_since);
        }
        let arrive =
            now + wire + self.config.delay.propagation_ns() + self.config.delay.processing_ns;
        p.hop += 1;
        if p.hop == self.flows[p.flow].hops.len() {
            self.schedule(arrive, Event::Deliver(pkt));
        } else {
            self.schedule(arrive, Event::Enqueue(pkt));
        }
    }

    fn run(&mut self) {
        while let Some(Reverse((now, _, ev))) = self.heap.pop() {
            match ev {
                Event::Enqueue(pkt) => self.enqueue(now, pkt),
                Event::Deliver(pkt) => {
                    let p = &self.packets[pkt];
                    let delay = now - p.entered.expect("delivered packets have entered");
                    self.samples[p.flow].push(delay);
                }
                Event::Wake(port) => {
                    if self.net.ports[port].wake_at == Some(now) {
                        self.net.ports[port].wake_at = None;
                    }
                    self.serve(now, port);
                }
            }
        }
    }
}

fn build(
    topology: &Topology,
    layout: &LayoutReport,
    traffic: &Traffic,
    config: &SimConfig,
) -> Result<(Network, Vec<SimFlow>), SimError> {
    let mut net = Network {
        ports: Vec::new(),
        index: HashMap::new(),
        shared: HashMap::new(),
    };
    let mut flows = Vec::new();

    // Real-time flows, ranked by their position in the priority-ordered report.
    let mut rt: Vec<(usize, &super::TrafficProfile, &crate::layout::LayoutResult)> = Vec::new();
    for p in &traffic.profiles {
        p.shape.validate()?;
        let (rank, r) = layout
            .results
            .iter()
            .enumerate()
            .find(|(_, r)| r.flow == p.flow)
            .ok_or(SimError::UnplacedFlow(p.flow))?;
        if !r.is_placed() {
            return Err(SimError::UnplacedFlow(p.flow));
        }
        if config.strict && p.shape.send_rate_bps > r.demand_bps {
            return Err(SimError::OverCapacityProfile {
                flow: p.flow,
                send_rate_bps: p.shape.send_rate_bps,
                reserved_bps: r.demand_bps,
            });
        }
        rt.push((rank, p, r));
    }
    rt.sort_by_key(|(rank, _, _)| *rank);

    if config.mode == QueueMode::SharedSingle {
        // Shared queue rate per switch port: the sum of the reservations crossing it.
        let mut sums: HashMap<usize, u64> = HashMap::new();
        for (_, _, r) in &rt {
            let nodes = r.nodes().unwrap();
            for (i, &e) in r.path().unwrap().iter().enumerate() {
                if topology.is_switch(nodes[i]) {
                    let port = net.port(topology, nodes[i], e);
                    *sums.entry(port).or_default() += r.demand_bps;
                }
            }
        }
        let mut ports: Vec<_> = sums.into_iter().collect();
        ports.sort();
        for (port, rate) in ports {
            let q = net.ports[port].queue(Some(rate), 0);
            net.shared.insert(port, q);
        }
    }

    for (rank, p, r) in rt {
        let nodes = r.nodes().unwrap();
        let mut hops = Vec::new();
        for (i, &e) in r.path().unwrap().iter().enumerate() {
            let port = net.port(topology, nodes[i], e);
            let queue = if !topology.is_switch(nodes[i]) {
                let rate = config.police_ingress.then_some(r.demand_bps);
                net.ports[port].queue(rate, rank as u32 + 1)
            } else {
                match config.mode {
                    QueueMode::SeparatePerFlow => {
                        net.ports[port].queue(Some(r.demand_bps), rank as u32 + 1)
                    }
                    QueueMode::SharedSingle => net.shared[&port],
                }
            };
            hops.push(Hop { port, queue });
        }
        flows.push(SimFlow {
            class: TrafficClass::RealTime,
            id: r.flow.0,
            source: nodes[0],
            dest: *nodes.last().unwrap(),
            deadline_ns: Some(r.deadline_ns),
            shape: p.shape,
            hops,
        });
    }

    for (i, be) in traffic.best_effort.iter().enumerate() {
        be.profile.validate()?;
        let nodes = shortest_path(topology, be.source, be.dest)
            .ok_or(SimError::NoRoute(be.source, be.dest))?;
        let hops = nodes
            .windows(2)
            .map(|w| {
                let e = topology.edge_between(w[0], w[1]).unwrap();
                Hop {
                    port: net.port(topology, w[0], e),
                    queue: 0,
                }
            })
            .collect();
        flows.push(SimFlow {
            class: TrafficClass::BestEffort,
            id: i as u32,
            source: be.source,
            dest: be.dest,
            deadline_ns: None,
            shape: be.profile,
            hops,
        });
    }
    Ok((net, flows))
}

/// Runs the simulation and also returns every delivered packet's delay, per
/// flow in report order.
pub fn simulate_with_samples(
    topology: &Topology,
    layout: &LayoutReport,
    traffic: &Traffic,
    config: &SimConfig,
) -> Result<(SimReport, Vec<Vec<u64>>), SimError> {
    let (net, flows) = build(topology, layout, traffic, config)?;
    let mut sim = Sim {
        config,
        net,
        packets: Vec::new(),
        heap: BinaryHeap::new(),
        seq: 0,
        samples: vec![Vec::new(); flows.len()],
        dropped: vec![0; flows.len()],
        flows,
    };
    let mut sent = Vec::with_capacity(sim.flows.len());
    for fi in 0..sim.flows.len() {
        let mut rng = rng_for(config.seed, STREAM_TRAFFIC, fi as u64);
        let shape = sim.flows[fi].shape;
        let times = shape.generate(&mut rng, config.jitter_ns);
        sent.push(times.len() as u64);
        for t in times {
            sim.packets.push(Packet {
                flow: fi,
                hop: 0,
                bits: shape.packet_bytes * 8,
                entered: None,
            });
            let id = sim.packets.len() - 1;
            sim.schedule(t, Event::Enqueue(id));
        }
    }
    sim.run();

    let stats = sim
        .flows
        .iter()
        .enumerate()
        .map(|(i, f)| {
            FlowStats::from_samples(
                f.class,
                f.id,
                (f.source, f.dest),
                sent[i],
                sim.dropped[i],
                f.deadline_ns,
                &sim.samples[i],
            )
        })
        .collect();
    Ok((SimReport::new(config, stats), sim.samples))
}

pub fn simulate(
    topology: &Topology,
    layout: &LayoutReport,
    traffic: &Traffic,
    config: &SimConfig,
) -> Result<SimReport, SimError> {
    Ok(simulate_with_samples(topology, layout, traffic, config)?.0)
}
