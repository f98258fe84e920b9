use super::{McpPath, SolverError, WeightedInstance};

pub const DEFAULT_BRUTE_FORCE_CAP: usize = 10;

/// Enumerates every simple source-to-destination path and returns the
/// feasible one with the smallest `W1`, then smallest `W2`, then the
/// lexicographically smallest node sequence.
pub fn brute_force_mcp(inst: &WeightedInstance, cap: usize) -> Result<McpPath, SolverError> {
    if inst.n > cap {
        return Err(SolverError::TooLarge { nodes: inst.n, cap });
    }
    inst.validate()?;
    let mut out: Vec<Vec<usize>> = vec![Vec::new(); inst.n];
    for (i, a) in inst.arcs.iter().enumerate() {
        out[a.from].push(i);
    }
    let mut search = Search {
        inst,
        out: &out,
        seen: vec![false; inst.n],
        nodes: vec![inst.source],
        arcs: Vec::new(),
        best: None,
    };
    search.seen[inst.source] = true;
    search.dfs(inst.source, 0, 0);
    search.best.ok_or(SolverError::NotFound)
}

struct Search<'a> {
    inst: &'a WeightedInstance,
    out: &'a [Vec<usize>],
    seen: Vec<bool>,
    nodes: Vec<usize>,
    arcs: Vec<usize>,
    best: Option<McpPath>,
}

impl Search<'_> {
    fn dfs(&mut self, at: usize, w1: u128, w2: u64) {
        if at == self.inst.dest {
            if w1 <= self.inst.c1 && w2 <= self.inst.c2 as u64 {
                let better = match &self.best {
                    None => true,
                    Some(b) => (w1, w2, &self.nodes) < (b.w1, b.w2, &b.nodes),
                };
                if better {
                    self.best = Some(McpPath {
                        nodes: self.nodes.clone(),
                        arcs: self.arcs.clone(),
                        w1,
                        w2,
                    });
                }
            }
            return;
        }
        for &i in &self.out[at] {
            let a = self.inst.arcs[i];
            if self.seen[a.to] {
                continue;
            }
            self.seen[a.to] = true;
            self.nodes.push(a.to);
            self.arcs.push(i);
            self.dfs(a.to, w1 + a.w1, w2 + a.w2 as u64);
            self.arcs.pop();
            self.nodes.pop();
            self.seen[a.to] = false;
        }
    }
}
