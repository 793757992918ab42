//! Budgeted j-MST: grow a Prim tree from the root one vertex at a time and
//! keep the largest prefix whose cumulative cost fits the energy budget.

use serde::{Deserialize, Serialize};

use crate::error::GraphError;
use crate::graph::{EnergyGraph, Trajectory};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JmstConfig {
    /// Budget slack factor, `>= 1`.
    pub lambda: f64,
    /// Cap on attached vertices; `None` means every available vertex.
    pub max_vertices: Option<usize>,
}

impl Default for JmstConfig {
    fn default() -> Self {
        Self {
            lambda: 2.0,
            max_vertices: None,
        }
    }
}

impl JmstConfig {
    pub fn validate(&self) -> Result<(), GraphError> {
        if !(self.lambda >= 1.0 && self.lambda.is_finite()) {
            return Err(GraphError::InvalidTree(format!("lambda {} < 1", self.lambda)));
        }
        if self.max_vertices == Some(0) {
            return Err(GraphError::InvalidTree("max_vertices must be at least 1".into()));
        }
        Ok(())
    }
}

/// Incremental Prim over the vertices flagged in `allowed`.
///
/// Each step attaches the non-tree vertex with the cheapest directed edge
/// from any tree vertex. Ties go to the lowest destination id, then the
/// lowest source id.
pub(crate) struct PrimGrowth<'g> {
    graph: &'g EnergyGraph,
    tree: Trajectory,
    /// `(vertex, best weight into it, its source)` for vertices not yet attached.
    frontier: Vec<(usize, f64, usize)>,
}

impl<'g> PrimGrowth<'g> {
    pub(crate) fn new(graph: &'g EnergyGraph, root: usize, allowed: impl Fn(usize) -> bool) -> Self {
        let frontier = (0..graph.len())
            .filter(|&v| v != root && allowed(v))
            .map(|v| (v, graph.weight(root, v), root))
            .collect();
        Self {
            graph,
            tree: Trajectory::root_only(graph.uav(), root),
            frontier,
        }
    }

    pub(crate) fn remaining(&self) -> usize {
        self.frontier.len()
    }

    /// Cost of the tree after attaching vertex `v` with cumulative energy `cum`.
    pub(crate) fn cost_after(&self, v: usize, cum: f64) -> f64 {
        self.tree.cost_with(Some((v, cum)))
    }

    /// `(vertex, parent, cumulative energy of vertex)` of the next
    /// attachment, without performing it.
    pub(crate) fn peek(&self) -> Option<(usize, usize, f64)> {
        let mut best: Option<(usize, f64, usize)> = None;
        for &(v, w, s) in &self.frontier {
            // frontier is ascending by vertex id, so strict `<` keeps the lowest id on ties
            if best.is_none_or(|(_, bw, _)| w < bw) {
                best = Some((v, w, s));
            }
        }
        best.map(|(v, w, s)| {
            let cum = self.tree.cumulative_energy(s).expect("source in tree") + w;
            (v, s, cum)
        })
    }

    pub(crate) fn step(&mut self) -> Option<(usize, usize, f64)> {
        let (v, s, cum) = self.peek()?;
        let w = self.graph.weight(s, v);
        self.tree.attach(s, v, w).expect("frontier vertex not yet in tree");
        self.frontier.retain(|&(u, _, _)| u != v);
        for entry in &mut self.frontier {
            let wv = self.graph.weight(v, entry.0);
            if wv < entry.1 || (wv == entry.1 && v < entry.2) {
                entry.1 = wv;
                entry.2 = v;
            }
        }
        Some((v, s, cum))
    }

    pub(crate) fn into_tree(self) -> Trajectory {
        self.tree
    }
}

/// Prim tree from `root` with exactly `i` attached vertices.
pub fn prim_tree(g: &EnergyGraph, root: usize, i: usize) -> Result<Trajectory, GraphError> {
    if root >= g.len() {
        return Err(GraphError::InvalidTree(format!("root {root} not in graph")));
    }
    let available = g.len() - 1;
    if i > available {
        return Err(GraphError::InsufficientVertices {
            requested: i,
            available,
        });
    }
    let mut growth = PrimGrowth::new(g, root, |_| true);
    for _ in 0..i {
        growth.step();
    }
    Ok(growth.into_tree())
}

/// Result of a budgeted growth, including the cost of the first prefix that
/// did not fit (the budget at which the answer would next change).
#[derive(Debug, Clone)]
pub(crate) struct BudgetedTree {
    pub(crate) tree: Trajectory,
    pub(crate) next_cost: Option<f64>,
}

/// Largest Prim prefix rooted at `root`, over vertices accepted by
/// `allowed`, whose cumulative cost is at most `limit`.
///
/// Prefix costs grow monotonically with the prefix, so the scan stops at the
/// first prefix over the limit.
pub(crate) fn grow_within(
    g: &EnergyGraph,
    root: usize,
    allowed: impl Fn(usize) -> bool,
    limit: f64,
    max_vertices: Option<usize>,
) -> BudgetedTree {
    let mut growth = PrimGrowth::new(g, root, allowed);
    let cap = max_vertices.unwrap_or(usize::MAX).min(growth.remaining());
    let mut attached = 0;
    let mut next_cost = None;
    while attached < cap {
        let (v, _, cum) = growth.peek().expect("frontier not exhausted");
        let candidate = growth.cost_after(v, cum);
        if candidate <= limit {
            growth.step();
            attached += 1;
        } else {
            next_cost = Some(candidate);
            break;
        }
    }
    BudgetedTree {
        tree: growth.into_tree(),
        next_cost,
    }
}

/// Budgeted j-MST on the whole graph, rooted at vertex 0.
///
/// Grows Prim trees `Y(1)..Y(j)` and returns the last one whose cost is at
/// most `lambda * budget`, or the root-only tree when none qualifies.
pub fn budgeted_jmst(g: &EnergyGraph, budget: f64, cfg: &JmstConfig) -> Trajectory {
    grow_within(g, 0, |_| true, cfg.lambda * budget, cfg.max_vertices).tree
}

/// Budgeted j-MST restricted to the vertices accepted by `allowed` (the root
/// is always included).
pub fn budgeted_jmst_within(
    g: &EnergyGraph,
    allowed: impl Fn(usize) -> bool,
    budget: f64,
    cfg: &JmstConfig,
) -> Trajectory {
    grow_within(g, 0, allowed, cfg.lambda * budget, cfg.max_vertices).tree
}
