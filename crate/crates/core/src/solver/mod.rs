//! Two-constraint path search: a pseudo-polynomial dynamic program over an
//! integer budget axis, the ceiling relaxation that produces that axis, and a
//! brute-force reference for small graphs.

mod brute;
mod dp;
mod relax;

pub use brute::{brute_force_mcp, DEFAULT_BRUTE_FORCE_CAP};
pub use dp::{mcp_heuristic, run as mcp_heuristic_traced, DpState, Pred, INFINITY};
pub use relax::{relax_ratio, relax_weight, RelaxParams};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SolverError {
    #[error("relaxation bound must be positive")]
    ZeroBound,
    #[error("no path satisfies both bounds")]
    NotFound,
    #[error("graph has {nodes} nodes, brute force is capped at {cap}")]
    TooLarge { nodes: usize, cap: usize },
    #[error("invalid instance: {0}")]
    InvalidInstance(String),
}

/// A directed arc with an exact first weight and an integer second weight.
///
/// `tag` is opaque to the solver; callers use it to map arcs back to their
/// own edge identifiers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Arc {
    pub from: usize,
    pub to: usize,
    pub w1: u128,
    pub w2: u32,
    pub tag: usize,
}

/// Nodes are dense indices `0..n`. `W1` is compared exactly as an integer, so
/// delays are nanoseconds and utilizations are units of a [`crate::model::UtilScale`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightedInstance {
    pub n: usize,
    pub arcs: Vec<Arc>,
    pub source: usize,
    pub dest: usize,
    pub c1: u128,
    pub c2: u32,
}

impl WeightedInstance {
    pub fn new(n: usize, source: usize, dest: usize, c1: u128, c2: u32) -> Self {
        Self {
            n,
            arcs: Vec::new(),
            source,
            dest,
            c1,
            c2,
        }
    }

    pub fn add_arc(&mut self, from: usize, to: usize, w1: u128, w2: u32) -> &mut Self {
        let tag = self.arcs.len();
        self.arcs.push(Arc {
            from,
            to,
            w1,
            w2,
            tag,
        });
        self
    }

    /// Adds the arc in both directions with the same weights and tag.
    pub fn add_edge(&mut self, a: usize, b: usize, w1: u128, w2: u32, tag: usize) -> &mut Self {
        self.arcs.push(Arc {
            from: a,
            to: b,
            w1,
            w2,
            tag,
        });
        self.arcs.push(Arc {
            from: b,
            to: a,
            w1,
            w2,
            tag,
        });
        self
    }

    pub fn validate(&self) -> Result<(), SolverError> {
        if self.source >= self.n || self.dest >= self.n {
            return Err(SolverError::InvalidInstance("endpoint out of range".into()));
        }
        if self.source == self.dest {
            return Err(SolverError::InvalidInstance(
                "source equals destination".into(),
            ));
        }
        if let Some(a) = self
            .arcs
            .iter()
            .find(|a| a.from >= self.n || a.to >= self.n)
        {
            return Err(SolverError::InvalidInstance(format!(
                "arc {}->{} out of range",
                a.from, a.to
            )));
        }
        Ok(())
    }

    /// Exact weight sums of an arc sequence, or `None` if it is not a
    /// node-simple walk from source to destination.
    pub fn check_path(&self, arcs: &[usize]) -> Option<(u128, u64)> {
        let mut at = self.source;
        let mut seen = vec![false; self.n];
        seen[at] = true;
        let (mut w1, mut w2) = (0u128, 0u64);
        for &i in arcs {
            let a = self.arcs.get(i)?;
            if a.from != at || seen[a.to] {
                return None;
            }
            seen[a.to] = true;
            at = a.to;
            w1 += a.w1;
            w2 += a.w2 as u64;
        }
        (at == self.dest).then_some((w1, w2))
    }
}

/// A node-simple path with its exact weight sums.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct McpPath {
    pub nodes: Vec<usize>,
    /// Indices into [`WeightedInstance::arcs`].
    pub arcs: Vec<usize>,
    pub w1: u128,
    pub w2: u64,
}

impl McpPath {
    pub fn satisfies(&self, inst: &WeightedInstance) -> bool {
        self.w1 <= inst.c1
            && self.w2 <= inst.c2 as u64
            && inst.check_path(&self.arcs) == Some((self.w1, self.w2))
    }
}
