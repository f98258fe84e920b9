use std::fmt::Write as _;

use super::{McpPath, SolverError, WeightedInstance};

/// Predecessor of a DP cell: the previous node, the column it was reached
/// in, and the arc used.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Pred {
    pub node: usize,
    pub col: u32,
    pub arc: usize,
}

/// DP table: `d[v][j]` is the smallest `W1` found so far over walks from the
/// source to `v` whose `W2` is at most `j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DpState {
    cols: usize,
    d: Vec<u128>,
    pred: Vec<Option<Pred>>,
    sweeps: usize,
}

/// Marks an unreached cell.
pub const INFINITY: u128 = u128::MAX;

impl DpState {
    pub fn new(inst: &WeightedInstance) -> Self {
        let cols = inst.c2 as usize + 1;
        let mut d = vec![INFINITY; inst.n * cols];
        d[inst.source * cols..(inst.source + 1) * cols].fill(0);
        Self {
            cols,
            d,
            pred: vec![None; inst.n * cols],
            sweeps: 0,
        }
    }

    pub fn value(&self, v: usize, j: u32) -> Option<u128> {
        let x = self.d[v * self.cols + j as usize];
        (x != INFINITY).then_some(x)
    }

    pub fn pred(&self, v: usize, j: u32) -> Option<Pred> {
        self.pred[v * self.cols + j as usize]
    }

    pub fn sweeps(&self) -> usize {
        self.sweeps
    }

    /// One relaxation pass over every column and arc, updating in place.
    /// Returns whether any cell improved.
    pub fn sweep(&mut self, inst: &WeightedInstance) -> bool {
        let cols = self.cols;
        let mut changed = false;
        for j in 0..cols {
            for (i, a) in inst.arcs.iter().enumerate() {
                let w2 = a.w2 as usize;
                if w2 > j {
                    continue;
                }
                let pj = j - w2;
                let du = self.d[a.from * cols + pj];
                if du == INFINITY {
                    continue;
                }
                let cand = du.saturating_add(a.w1);
                let cell = a.to * cols + j;
                if cand < self.d[cell] {
                    self.d[cell] = cand;
                    self.pred[cell] = Some(Pred {
                        node: a.from,
                        col: pj as u32,
                        arc: i,
                    });
                    changed = true;
                }
            }
        }
        self.sweeps += 1;
        changed
    }

    /// Walks predecessors back from `(dest, j)`. `None` if the chain does not
    /// reach the source as a node-simple path.
    pub fn backtrack(&self, inst: &WeightedInstance, j: u32) -> Option<Vec<usize>> {
        let mut arcs = Vec::new();
        let (mut v, mut col) = (inst.dest, j);
        let mut seen = vec![false; inst.n];
        seen[v] = true;
        while v != inst.source {
            let p = self.pred(v, col)?;
            if seen[p.node] {
                return None;
            }
            seen[p.node] = true;
            arcs.push(p.arc);
            v = p.node;
            col = p.col;
        }
        arcs.reverse();
        Some(arcs)
    }

    /// Smallest column passing the solution test whose backtracked path is
    /// node-simple and satisfies both bounds on exact re-summation.
    pub fn solution(&self, inst: &WeightedInstance) -> Option<McpPath> {
        for j in 0..=inst.c2 {
            match self.value(inst.dest, j) {
                Some(w) if w <= inst.c1 => {}
                _ => continue,
            }
            let Some(arcs) = self.backtrack(inst, j) else {
                continue;
            };
            let Some((w1, w2)) = inst.check_path(&arcs) else {
                continue;
            };
            if w1 > inst.c1 || w2 > inst.c2 as u64 {
                continue;
            }
            let mut nodes = vec![inst.source];
            nodes.extend(arcs.iter().map(|&a| inst.arcs[a].to));
            return Some(McpPath {
                nodes,
                arcs,
                w1,
                w2,
            });
        }
        None
    }

    /// CSV rendering: one row per cell with `node,j,d,pred_node,pred_col`.
    /// Unreached cells leave `d` empty.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("node,j,d,pred_node,pred_col\n");
        let n = self.d.len() / self.cols;
        for v in 0..n {
            for j in 0..self.cols {
                let idx = v * self.cols + j;
                let d = match self.d[idx] {
                    INFINITY => String::new(),
                    x => x.to_string(),
                };
                let (pn, pc) = match self.pred[idx] {
                    Some(p) => (p.node.to_string(), p.col.to_string()),
                    None => (String::new(), String::new()),
                };
                let _ = writeln!(out, "{v},{j},{d},{pn},{pc}");
            }
        }
        out
    }
}

/// Runs exactly `n - 1` sweeps and returns the path for the smallest feasible
/// column, with the final table for inspection.
pub fn run(inst: &WeightedInstance) -> Result<(Option<McpPath>, DpState), SolverError> {
    inst.validate()?;
    let mut state = DpState::new(inst);
    for _ in 1..inst.n {
        state.sweep(inst);
    }
    let path = state.solution(inst);
    Ok((path, state))
}

pub fn mcp_heuristic(inst: &WeightedInstance) -> Result<McpPath, SolverError> {
    run(inst)?.0.ok_or(SolverError::NotFound)
}
