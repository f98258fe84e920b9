//! Compiles placed flows into per-switch forwarding intents, dedicated egress
//! queues, and an OpenFlow-style rule document.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::net::Ipv4Addr;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::io::FORMAT_VERSION;
use crate::layout::{LayoutReport, Outcome};
use crate::model::{FlowId, FlowSet, FlowSpec, NodeId, Topology};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IntentError {
    #[error("flow {0} has no placed path")]
    PathNotPlaced(FlowId),
    #[error("flow {flow}: path is not a walk through the topology at {at}")]
    BadPath { flow: FlowId, at: NodeId },
    #[error("port {port} on switch {switch} needs {needed} dedicated queues, only {available} available")]
    QueueExhausted {
        switch: NodeId,
        port: PortId,
        needed: usize,
        available: usize,
    },
    #[error("invalid match: {0}")]
    InvalidMatch(String),
    #[error("flow {0} is not in the flow set")]
    UnknownFlow(FlowId),
}

/// Switch port number. Physical ports count from 1 in ascending order of the
/// neighbor id; [`LOCAL_PORT`] stands for the switch itself.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PortId(pub u32);

pub const LOCAL_PORT: PortId = PortId(0xffff_fffe);

impl fmt::Display for PortId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if *self == LOCAL_PORT {
            f.write_str("LOCAL")
        } else {
            write!(f, "{}", self.0)
        }
    }
}

/// Deterministic port numbering for every switch of a topology.
#[derive(Debug, Clone)]
pub struct Ports {
    by_pair: HashMap<(NodeId, NodeId), PortId>,
    by_port: HashMap<(NodeId, PortId), NodeId>,
}

impl Ports {
    pub fn new(topology: &Topology) -> Self {
        let mut by_pair = HashMap::new();
        let mut by_port = HashMap::new();
        for sw in topology.switches() {
            let mut nbrs: Vec<NodeId> = topology.neighbors(sw).map(|(n, _)| n).collect();
            nbrs.sort();
            for (i, n) in nbrs.into_iter().enumerate() {
                let p = PortId(i as u32 + 1);
                by_pair.insert((sw, n), p);
                by_port.insert((sw, p), n);
            }
        }
        Self { by_pair, by_port }
    }

    /// Port on `switch` facing `neighbor`.
    pub fn port(&self, switch: NodeId, neighbor: NodeId) -> Option<PortId> {
        self.by_pair.get(&(switch, neighbor)).copied()
    }

    pub fn neighbor(&self, switch: NodeId, port: PortId) -> Option<NodeId> {
        self.by_port.get(&(switch, port)).copied()
    }
}

/// IPv4 prefix, written `a.b.c.d/len`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct IpPrefix {
    pub addr: Ipv4Addr,
    pub len: u8,
}

impl IpPrefix {
    pub fn new(addr: Ipv4Addr, len: u8) -> Result<Self, IntentError> {
        if len > 32 {
            return Err(IntentError::InvalidMatch(format!(
                "prefix length {len} exceeds 32"
            )));
        }
        Ok(Self { addr, len })
    }

    pub fn host(addr: Ipv4Addr) -> Self {
        Self { addr, len: 32 }
    }
}

impl fmt::Display for IpPrefix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.addr, self.len)
    }
}

impl FromStr for IpPrefix {
    type Err = IntentError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (addr, len) = match s.split_once('/') {
            Some((a, l)) => (
                a,
                l.parse::<u8>()
                    .map_err(|e| IntentError::InvalidMatch(format!("{s}: {e}")))?,
            ),
            None => (s, 32),
        };
        let addr = addr
            .parse::<Ipv4Addr>()
            .map_err(|e| IntentError::InvalidMatch(format!("{s}: {e}")))?;
        IpPrefix::new(addr, len)
    }
}

impl Serialize for IpPrefix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for IpPrefix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

pub const ETH_TYPE_IPV4: u16 = 0x0800;
pub const IP_PROTO_UDP: u8 = 17;

/// Packet header match; absent fields are wildcards.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Match {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eth_type: Option<u16>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ip_src: Option<IpPrefix>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ip_dst: Option<IpPrefix>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ip_proto: Option<u8>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub l4_src_port: Option<u16>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub l4_dst_port: Option<u16>,
}

impl Match {
    pub fn validate(&self) -> Result<(), IntentError> {
        if *self == Match::default() {
            return Err(IntentError::InvalidMatch(
                "at least one field must be set".into(),
            ));
        }
        Ok(())
    }

    /// UDP between the two endpoints' host addresses.
    pub fn default_for(flow: &FlowSpec) -> Self {
        Self {
            eth_type: Some(ETH_TYPE_IPV4),
            ip_src: Some(IpPrefix::host(host_ip(flow.source))),
            ip_dst: Some(IpPrefix::host(host_ip(flow.dest))),
            ip_proto: Some(IP_PROTO_UDP),
            ..Default::default()
        }
    }
}

/// Synthetic address of a node: `10.0.0.0` plus its id.
pub fn host_ip(n: NodeId) -> Ipv4Addr {
    Ipv4Addr::from(u32::from(Ipv4Addr::new(10, 0, 0, 0)).wrapping_add(n.0))
}

/// One forwarding decision for one flow at one switch.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Intent {
    pub flow: FlowId,
    pub switch: NodeId,
    #[serde(rename = "match")]
    pub match_fields: Match,
    pub in_port: PortId,
    pub out_port: PortId,
    pub rate_bps: u64,
}

/// Splits a placed path into one intent per switch. Hosts at the ends map to
/// the switch's host-facing port; a switch endpoint uses [`LOCAL_PORT`].
pub fn decompose(
    topology: &Topology,
    ports: &Ports,
    flow: &FlowSpec,
    path: &[NodeId],
    match_fields: &Match,
) -> Result<Vec<Intent>, IntentError> {
    if path.len() < 2 {
        return Err(IntentError::PathNotPlaced(flow.id));
    }
    if path.first() != Some(&flow.source) || path.last() != Some(&flow.dest) {
        return Err(IntentError::BadPath {
            flow: flow.id,
            at: path[0],
        });
    }
    match_fields.validate()?;
    let mut out = Vec::new();
    for (i, &n) in path.iter().enumerate() {
        if !topology.is_switch(n) {
            continue;
        }
        let port_to = |m: NodeId| {
            ports.port(n, m).ok_or(IntentError::BadPath {
                flow: flow.id,
                at: n,
            })
        };
        let in_port = if i == 0 {
            LOCAL_PORT
        } else {
            port_to(path[i - 1])?
        };
        let out_port = if i + 1 == path.len() {
            LOCAL_PORT
        } else {
            port_to(path[i + 1])?
        };
        out.push(Intent {
            flow: flow.id,
            switch: n,
            match_fields: match_fields.clone(),
            in_port,
            out_port,
            rate_bps: flow.demand_bps,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QueueOwner {
    Default,
    Flow(FlowId),
}

/// Egress queue reservation on one switch port.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueueConfig {
    pub switch: NodeId,
    pub port: PortId,
    pub queue_id: u32,
    pub rate_bps: u64,
    pub owner: QueueOwner,
}

/// Rate of the default queue: the link rate behind the port, or the fastest
/// attached link for the local port.
fn port_rate(topology: &Topology, ports: &Ports, switch: NodeId, port: PortId) -> u64 {
    match ports
        .neighbor(switch, port)
        .and_then(|n| topology.edge_between(switch, n))
    {
        Some(e) => topology.edge(e).bandwidth_bps(),
        None => topology
            .neighbors(switch)
            .map(|(_, e)| topology.edge(e).bandwidth_bps())
            .max()
            .unwrap_or(0),
    }
}

/// Gives every flow its own queue on each egress port it uses, numbered from
/// 1 in the order the intents are supplied, with queue 0 kept as the default
/// queue on every used port.
pub fn allocate_queues(
    intents: &[Intent],
    topology: &Topology,
    ports: &Ports,
) -> Result<Vec<QueueConfig>, IntentError> {
    let mut by_port: BTreeMap<(NodeId, PortId), Vec<&Intent>> = BTreeMap::new();
    for it in intents {
        let users = by_port.entry((it.switch, it.out_port)).or_default();
        if !users.iter().any(|u| u.flow == it.flow) {
            users.push(it);
        }
    }
    let available = topology.queues_per_port().saturating_sub(1) as usize;
    let mut out = Vec::new();
    for ((switch, port), users) in by_port {
        if users.len() > available {
            return Err(IntentError::QueueExhausted {
                switch,
                port,
                needed: users.len(),
                available,
            });
        }
        out.push(QueueConfig {
            switch,
            port,
            queue_id: 0,
            rate_bps: port_rate(topology, ports, switch, port),
            owner: QueueOwner::Default,
        });
        for (i, it) in users.iter().enumerate() {
            out.push(QueueConfig {
                switch,
                port,
                queue_id: i as u32 + 1,
                rate_bps: it.rate_bps,
                owner: QueueOwner::Flow(it.flow),
            });
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Action {
    SetQueue(u32),
    Output(PortId),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rule {
    pub flow: FlowId,
    #[serde(rename = "match")]
    pub match_fields: Match,
    pub in_port: PortId,
    pub actions: Vec<Action>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SwitchRules {
    pub switch: NodeId,
    pub rules: Vec<Rule>,
    pub queues: Vec<QueueConfig>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RuleDocument {
    pub format_version: u32,
    pub switches: Vec<SwitchRules>,
}

impl RuleDocument {
    pub fn rule_count(&self) -> usize {
        self.switches.iter().map(|s| s.rules.len()).sum()
    }
}

/// Assembles the per-switch rule tables. Switches are sorted by id; rules keep
/// the order of `intents`; queues are sorted by port then queue id.
pub fn export_rules(intents: &[Intent], queues: &[QueueConfig]) -> RuleDocument {
    let mut switches: BTreeMap<NodeId, SwitchRules> = BTreeMap::new();
    fn entry(map: &mut BTreeMap<NodeId, SwitchRules>, sw: NodeId) -> &mut SwitchRules {
        map.entry(sw).or_insert_with(|| SwitchRules {
            switch: sw,
            rules: Vec::new(),
            queues: Vec::new(),
        })
    }
    for q in queues {
        entry(&mut switches, q.switch).queues.push(q.clone());
    }
    let queue_of: HashMap<(NodeId, PortId, FlowId), u32> = queues
        .iter()
        .filter_map(|q| match q.owner {
            QueueOwner::Flow(f) => Some(((q.switch, q.port, f), q.queue_id)),
            QueueOwner::Default => None,
        })
        .collect();
    for it in intents {
        let q = queue_of
            .get(&(it.switch, it.out_port, it.flow))
            .copied()
            .unwrap_or(0);
        entry(&mut switches, it.switch).rules.push(Rule {
            flow: it.flow,
            match_fields: it.match_fields.clone(),
            in_port: it.in_port,
            actions: vec![Action::SetQueue(q), Action::Output(it.out_port)],
        });
    }
    let mut switches: Vec<SwitchRules> = switches.into_values().collect();
    for s in &mut switches {
        s.queues.sort_by_key(|q| (q.port, q.queue_id));
    }
    RuleDocument {
        format_version: FORMAT_VERSION,
        switches,
    }
}

/// Intents for every placed flow of `report`, in priority order.
pub fn decompose_report(
    topology: &Topology,
    ports: &Ports,
    flows: &FlowSet,
    report: &LayoutReport,
) -> Result<Vec<Intent>, IntentError> {
    let mut out = Vec::new();
    for r in &report.results {
        let Outcome::Placed { nodes, .. } = &r.outcome else {
            continue;
        };
        let flow = flows.get(r.flow).ok_or(IntentError::UnknownFlow(r.flow))?;
        let m = flow
            .match_fields
            .clone()
            .unwrap_or_else(|| Match::default_for(flow));
        out.extend(decompose(topology, ports, flow, nodes, &m)?);
    }
    Ok(out)
}

/// Decompose, allocate and export in one step.
pub fn synthesize(
    topology: &Topology,
    flows: &FlowSet,
    report: &LayoutReport,
) -> Result<RuleDocument, IntentError> {
    let ports = Ports::new(topology);
    let intents = decompose_report(topology, &ports, flows, report)?;
    let queues = allocate_queues(&intents, topology, &ports)?;
    Ok(export_rules(&intents, &queues))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Edge, Node, NodeKind};

    /// Hosts 100+i hang off switch i; switches form a chain 0-1-...-(n-1).
    fn chain(n: u32) -> Topology {
        let mut nodes = Vec::new();
        let mut edges = Vec::new();
        for i in 0..n {
            nodes.push(Node {
                id: NodeId(i),
                kind: NodeKind::Switch,
            });
            nodes.push(Node {
                id: NodeId(100 + i),
                kind: NodeKind::Host,
            });
            edges.push(Edge::new(NodeId(100 + i), NodeId(i), 10_000_000, 50_000));
            if i > 0 {
                edges.push(Edge::new(NodeId(i - 1), NodeId(i), 10_000_000, 50_000));
            }
        }
        nodes.push(Node {
            id: NodeId(200),
            kind: NodeKind::Host,
        });
        edges.push(Edge::new(NodeId(200), NodeId(0), 10_000_000, 50_000));
        Topology::new(nodes, edges, 8).unwrap()
    }

    fn through(n: u32) -> Vec<NodeId> {
        let mut p = vec![NodeId(100)];
        p.extend((0..n).map(NodeId));
        p.push(NodeId(100 + n - 1));
        p
    }

    #[test]
    fn one_intent_per_switch() {
        let t = chain(4);
        let ports = Ports::new(&t);
        for n in [2, 4] {
            let flow = FlowSpec::new(1, NodeId(100), NodeId(100 + n - 1), 1_000_000, 1_000_000);
            let intents =
                decompose(&t, &ports, &flow, &through(n), &Match::default_for(&flow)).unwrap();
            assert_eq!(intents.len(), n as usize);
            for w in intents.windows(2) {
                let out_nbr = ports.neighbor(w[0].switch, w[0].out_port).unwrap();
                let in_nbr = ports.neighbor(w[1].switch, w[1].in_port).unwrap();
                assert_eq!(out_nbr, w[1].switch);
                assert_eq!(in_nbr, w[0].switch);
            }
            assert!(intents
                .iter()
                .all(|i| i.rate_bps == 1_000_000 && i.in_port != i.out_port));
        }
    }

    #[test]
    fn single_switch_path_uses_host_ports() {
        let t = chain(2);
        let ports = Ports::new(&t);
        let flow = FlowSpec::new(1, NodeId(100), NodeId(200), 1_000_000, 1_000_000);
        let path = [NodeId(100), NodeId(0), NodeId(200)];
        let intents = decompose(&t, &ports, &flow, &path, &Match::default_for(&flow)).unwrap();
        assert_eq!(intents.len(), 1);
        assert_eq!(
            ports.neighbor(NodeId(0), intents[0].in_port),
            Some(NodeId(100))
        );
        assert_eq!(
            ports.neighbor(NodeId(0), intents[0].out_port),
            Some(NodeId(200))
        );
    }

    #[test]
    fn ports_count_from_one_by_neighbor_id() {
        let t = chain(3);
        let ports = Ports::new(&t);
        // switch 1 neighbors: 0, 2, 101
        assert_eq!(ports.port(NodeId(1), NodeId(0)), Some(PortId(1)));
        assert_eq!(ports.port(NodeId(1), NodeId(2)), Some(PortId(2)));
        assert_eq!(ports.port(NodeId(1), NodeId(101)), Some(PortId(3)));
    }

    fn shared_port_intents(k: u32) -> (Topology, Ports, Vec<Intent>) {
        let t = chain(2);
        let ports = Ports::new(&t);
        let mut intents = Vec::new();
        for f in 0..k {
            let flow = FlowSpec::new(f, NodeId(100), NodeId(101), 1_000_000 + f as u64, 1_000_000);
            intents.extend(
                decompose(&t, &ports, &flow, &through(2), &Match::default_for(&flow)).unwrap(),
            );
        }
        (t, ports, intents)
    }

    #[test]
    fn seven_flows_fill_queues_one_to_seven() {
        let (t, ports, intents) = shared_port_intents(7);
        let queues = allocate_queues(&intents, &t, &ports).unwrap();
        let core = ports.port(NodeId(0), NodeId(1)).unwrap();
        let mut ids: Vec<u32> = queues
            .iter()
            .filter(|q| q.switch == NodeId(0) && q.port == core)
            .map(|q| q.queue_id)
            .collect();
        ids.sort();
        assert_eq!(ids, (0..8).collect::<Vec<_>>());
        let defaults = queues
            .iter()
            .filter(|q| q.owner == QueueOwner::Default)
            .count();
        assert_eq!(defaults, 2);
    }

    #[test]
    fn eighth_flow_exhausts_the_port() {
        let (t, ports, intents) = shared_port_intents(8);
        assert!(matches!(
            allocate_queues(&intents, &t, &ports),
            Err(IntentError::QueueExhausted {
                needed: 8,
                available: 7,
                ..
            })
        ));
    }

    #[test]
    fn rules_reference_flow_queue() {
        let (t, ports, intents) = shared_port_intents(1);
        let queues = allocate_queues(&intents, &t, &ports).unwrap();
        let doc = export_rules(&intents, &queues);
        assert_eq!(doc.rule_count(), 2);
        for s in &doc.switches {
            assert_eq!(s.rules[0].actions[0], Action::SetQueue(1));
        }
        let a = crate::io::to_json_string(&doc).unwrap();
        let b = crate::io::to_json_string(&export_rules(&intents, &queues)).unwrap();
        assert_eq!(a, b);
        assert!(a.contains("\"set_queue\": 1"));
    }

    #[test]
    fn empty_layout_exports_empty_document() {
        let doc = export_rules(&[], &[]);
        assert_eq!(doc.rule_count(), 0);
        let json = serde_json::to_string(&doc).unwrap();
        assert_eq!(json, r#"{"format_version":1,"switches":[]}"#);
    }

    #[test]
    fn match_round_trip_and_validation() {
        let flow = FlowSpec::new(1, NodeId(12), NodeId(13), 1, 1);
        let m = Match::default_for(&flow);
        let json = serde_json::to_string(&m).unwrap();
        assert_eq!(
            json,
            r#"{"eth_type":2048,"ip_src":"10.0.0.12/32","ip_dst":"10.0.0.13/32","ip_proto":17}"#
        );
        assert_eq!(serde_json::from_str::<Match>(&json).unwrap(), m);
        assert!(Match::default().validate().is_err());
        assert!("10.0.0.1/33".parse::<IpPrefix>().is_err());
        assert_eq!("10.0.0.0/8".parse::<IpPrefix>().unwrap().len, 8);
    }
}
