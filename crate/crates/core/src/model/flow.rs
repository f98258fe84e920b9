use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::{ModelError, NodeId, Topology};
use crate::intents::Match;
use crate::io::FORMAT_VERSION;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FlowId(pub u32);

impl fmt::Display for FlowId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "f{}", self.0)
    }
}

/// One real-time flow: endpoints, end-to-end delay budget and bandwidth demand.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlowSpec {
    pub id: FlowId,
    pub source: NodeId,
    pub dest: NodeId,
    pub deadline_ns: u64,
    pub demand_bps: u64,
    /// Header match used when the flow is compiled into rules.
    #[serde(rename = "match", default, skip_serializing_if = "Option::is_none")]
    pub match_fields: Option<Match>,
}

impl FlowSpec {
    pub fn new(id: u32, source: NodeId, dest: NodeId, deadline_ns: u64, demand_bps: u64) -> Self {
        Self {
            id: FlowId(id),
            source,
            dest,
            deadline_ns,
            demand_bps,
            match_fields: None,
        }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if self.source == self.dest {
            return Err(ModelError::SameEndpoints(self.id));
        }
        if self.deadline_ns == 0 {
            return Err(ModelError::ZeroDeadline(self.id));
        }
        if self.demand_bps == 0 {
            return Err(ModelError::ZeroDemand(self.id));
        }
        Ok(())
    }
}

/// A validated set of flows: unique ids and pairwise distinct deadlines.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(try_from = "FlowSetFile", into = "FlowSetFile")]
pub struct FlowSet {
    flows: Vec<FlowSpec>,
}

impl FlowSet {
    pub fn new(flows: Vec<FlowSpec>) -> Result<Self, ModelError> {
        let mut ids = HashMap::new();
        let mut deadlines: HashMap<u64, FlowId> = HashMap::new();
        for f in &flows {
            f.validate()?;
            if ids.insert(f.id, ()).is_some() {
                return Err(ModelError::DuplicateFlowId(f.id));
            }
            if let Some(&other) = deadlines.get(&f.deadline_ns) {
                return Err(ModelError::DuplicateDeadline {
                    first: other,
                    second: f.id,
                    deadline_ns: f.deadline_ns,
                });
            }
            deadlines.insert(f.deadline_ns, f.id);
        }
        Ok(Self { flows })
    }

    pub fn flows(&self) -> &[FlowSpec] {
        &self.flows
    }

    pub fn len(&self) -> usize {
        self.flows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.flows.is_empty()
    }

    pub fn get(&self, id: FlowId) -> Option<&FlowSpec> {
        self.flows.iter().find(|f| f.id == id)
    }

    /// Checks that every endpoint is a node of `topology`.
    pub fn check_endpoints(&self, topology: &Topology) -> Result<(), ModelError> {
        for f in &self.flows {
            for n in [f.source, f.dest] {
                if !topology.contains(n) {
                    return Err(ModelError::UnknownNode(n));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FlowSetFile {
    pub format_version: u32,
    pub flows: Vec<FlowSpec>,
}

impl TryFrom<FlowSetFile> for FlowSet {
    type Error = ModelError;

    fn try_from(file: FlowSetFile) -> Result<Self, Self::Error> {
        if file.format_version != FORMAT_VERSION {
            return Err(ModelError::UnsupportedFormatVersion(file.format_version));
        }
        FlowSet::new(file.flows)
    }
}

impl From<FlowSet> for FlowSetFile {
    fn from(set: FlowSet) -> Self {
        FlowSetFile {
            format_version: FORMAT_VERSION,
            flows: set.flows,
        }
    }
}
