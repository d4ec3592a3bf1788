//! Mixed graphs with endpoint marks, shared by latent DAGs, MAGs and PAGs.

mod latent;
pub(crate) mod mag;
mod pag;
pub mod separation;

use alloc::collections::VecDeque;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use serde::Serialize;

use crate::bits::Bits;
use crate::{Error, Result};

pub use latent::LatentDag;
pub use mag::{mag_of_dag, Mag};
pub use pag::Pag;

/// Hard limit on observed nodes for every graph kind.
pub const MAX_OBSERVED: usize = 12;

/// Hard limit on all nodes of a graph, latents included.
pub const MAX_NODES: usize = 64;

/// Mark at one endpoint of an edge.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum EdgeMark {
    Tail,
    Arrow,
    Circle,
}

/// Ordered set of node identifiers. Iteration follows insertion order;
/// equality ignores order.
#[derive(Clone, Debug, Default, Eq, Serialize)]
#[serde(transparent)]
pub struct NodeSet(Vec<String>);

impl NodeSet {
    pub fn new() -> Self {
        NodeSet(Vec::new())
    }

    /// Adds `name` unless it is already present. Returns whether it was added.
    pub fn insert(&mut self, name: impl Into<String>) -> bool {
        let name = name.into();
        if self.contains(&name) {
            false
        } else {
            self.0.push(name);
            true
        }
    }

    pub fn contains(&self, name: &str) -> bool {
        self.0.iter().any(|n| n == name)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.0.iter().map(String::as_str)
    }

    pub fn as_slice(&self) -> &[String] {
        &self.0
    }

    pub fn is_subset(&self, other: &NodeSet) -> bool {
        self.iter().all(|n| other.contains(n))
    }

    pub fn union(&self, other: &NodeSet) -> NodeSet {
        let mut out = self.clone();
        for n in other.iter() {
            out.insert(n);
        }
        out
    }

    pub fn intersection(&self, other: &NodeSet) -> NodeSet {
        self.iter().filter(|n| other.contains(n)).collect()
    }

    pub fn difference(&self, other: &NodeSet) -> NodeSet {
        self.iter().filter(|n| !other.contains(n)).collect()
    }

    /// Members in lexicographic order.
    pub fn sorted(&self) -> Vec<String> {
        let mut v = self.0.clone();
        v.sort();
        v
    }
}

impl PartialEq for NodeSet {
    fn eq(&self, other: &Self) -> bool {
        self.len() == other.len() && self.is_subset(other)
    }
}

impl<S: Into<String>> FromIterator<S> for NodeSet {
    fn from_iter<I: IntoIterator<Item = S>>(iter: I) -> Self {
        let mut set = NodeSet::new();
        for s in iter {
            set.insert(s);
        }
        set
    }
}

impl fmt::Display for NodeSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, n) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            f.write_str(n)?;
        }
        f.write_str("}")
    }
}

/// One edge with its endpoint marks; `a` precedes `b` in node order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Edge {
    pub a: String,
    pub b: String,
    pub mark_a: EdgeMark,
    pub mark_b: EdgeMark,
    pub visible: bool,
}

/// Nodes plus edges carrying one mark per endpoint and a visibility flag on
/// directed edges.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct MixedGraph {
    names: Vec<String>,
    // marks[at][other]: mark at `at` on the edge at–other.
    marks: Vec<Vec<Option<EdgeMark>>>,
    // visible[tail][head]; only set on directed edges.
    visible: Vec<Vec<bool>>,
}

impl MixedGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_nodes<I, S>(names: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut g = Self::new();
        for n in names {
            g.add_node(n)?;
        }
        Ok(g)
    }

    pub fn add_node(&mut self, name: impl Into<String>) -> Result<usize> {
        let name = name.into();
        if name.is_empty() || name.chars().any(char::is_whitespace) {
            return Err(Error::Invalid(alloc::format!("bad node name {name:?}")));
        }
        if self.index_of(&name).is_some() {
            return Err(Error::DuplicateNode(name));
        }
        if self.names.len() == MAX_NODES {
            return Err(Error::TooManyNodes { got: MAX_NODES + 1, limit: MAX_NODES });
        }
        self.names.push(name);
        for row in self.marks.iter_mut() {
            row.push(None);
        }
        for row in self.visible.iter_mut() {
            row.push(false);
        }
        let n = self.names.len();
        self.marks.push(alloc::vec![None; n]);
        self.visible.push(alloc::vec![false; n]);
        Ok(n - 1)
    }

    /// Adds the edge `a`–`b` with `mark_a` at `a` and `mark_b` at `b`.
    pub fn add_edge(&mut self, a: &str, b: &str, mark_a: EdgeMark, mark_b: EdgeMark) -> Result<()> {
        let i = self.require(a)?;
        let j = self.require(b)?;
        if i == j {
            return Err(Error::SelfLoop(a.to_string()));
        }
        if self.marks[i][j].is_some() {
            return Err(Error::DuplicateEdge(a.to_string(), b.to_string()));
        }
        self.set_edge_ix(i, j, mark_a, mark_b);
        Ok(())
    }

    /// Flags the directed edge `tail`→`head` as visible or not.
    pub fn set_visible(&mut self, tail: &str, head: &str, visible: bool) -> Result<()> {
        let t = self.require(tail)?;
        let h = self.require(head)?;
        if !self.is_directed_ix(t, h) {
            return Err(Error::Invalid(alloc::format!(
                "visibility flag on {tail}–{head}, which is not a directed edge {tail}→{head}"
            )));
        }
        self.visible[t][h] = visible;
        Ok(())
    }

    pub fn node_count(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn nodes(&self) -> NodeSet {
        self.names.iter().cloned().collect()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// Mark at `at` on the edge `at`–`other`, if the edge exists.
    pub fn mark(&self, at: &str, other: &str) -> Option<EdgeMark> {
        let i = self.index_of(at)?;
        let j = self.index_of(other)?;
        self.marks[i][j]
    }

    pub fn adjacent(&self, a: &str, b: &str) -> bool {
        self.mark(a, b).is_some()
    }

    /// True iff `a`→`b` (tail at `a`, arrowhead at `b`).
    pub fn is_directed(&self, a: &str, b: &str) -> bool {
        match (self.index_of(a), self.index_of(b)) {
            (Some(i), Some(j)) => self.is_directed_ix(i, j),
            _ => false,
        }
    }

    pub fn is_visible(&self, tail: &str, head: &str) -> bool {
        match (self.index_of(tail), self.index_of(head)) {
            (Some(i), Some(j)) => self.visible[i][j],
            _ => false,
        }
    }

    /// All edges, ordered by the node order of their endpoints.
    pub fn edges(&self) -> Vec<Edge> {
        let n = self.node_count();
        let mut out = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                if let (Some(ma), Some(mb)) = (self.marks[i][j], self.marks[j][i]) {
                    out.push(Edge {
                        a: self.names[i].clone(),
                        b: self.names[j].clone(),
                        mark_a: ma,
                        mark_b: mb,
                        visible: self.visible[i][j] || self.visible[j][i],
                    });
                }
            }
        }
        out
    }

    pub fn edge_count(&self) -> usize {
        let n = self.node_count();
        (0..n).map(|i| (i + 1..n).filter(|&j| self.marks[i][j].is_some()).count()).sum()
    }

    /// Subgraph over `a`, keeping the original node order and copying marks
    /// and visibility flags verbatim.
    pub fn induced_subgraph(&self, a: &NodeSet) -> Result<MixedGraph> {
        let keep = self.set_of(a)?;
        Ok(self.induced_ix(keep))
    }

    /// Nodes with a potentially directed path into some member of `y`,
    /// including `y` itself.
    pub fn possible_ancestors(&self, y: &NodeSet) -> Result<NodeSet> {
        let ys = self.set_of(y)?;
        Ok(self.node_set(self.possible_ancestors_in(self.all(), ys)))
    }

    // ---- index-level helpers -------------------------------------------

    pub(crate) fn require(&self, name: &str) -> Result<usize> {
        self.index_of(name).ok_or_else(|| Error::UnknownNode(name.to_string()))
    }

    pub(crate) fn all(&self) -> Bits {
        Bits::full(self.node_count())
    }

    pub(crate) fn set_of(&self, s: &NodeSet) -> Result<Bits> {
        let mut b = Bits::EMPTY;
        for n in s.iter() {
            b.insert(self.require(n)?);
        }
        Ok(b)
    }

    pub(crate) fn node_set(&self, b: Bits) -> NodeSet {
        b.iter().map(|i| self.names[i].clone()).collect()
    }

    pub(crate) fn name(&self, i: usize) -> &str {
        &self.names[i]
    }

    pub(crate) fn mark_ix(&self, at: usize, other: usize) -> Option<EdgeMark> {
        self.marks[at][other]
    }

    pub(crate) fn visible_ix(&self, tail: usize, head: usize) -> bool {
        self.visible[tail][head]
    }

    pub(crate) fn set_visible_ix(&mut self, tail: usize, head: usize, v: bool) {
        self.visible[tail][head] = v;
    }

    pub(crate) fn set_edge_ix(&mut self, i: usize, j: usize, mark_i: EdgeMark, mark_j: EdgeMark) {
        self.marks[i][j] = Some(mark_i);
        self.marks[j][i] = Some(mark_j);
        self.visible[i][j] = false;
        self.visible[j][i] = false;
    }

    pub(crate) fn is_directed_ix(&self, a: usize, b: usize) -> bool {
        self.marks[a][b] == Some(EdgeMark::Tail) && self.marks[b][a] == Some(EdgeMark::Arrow)
    }

    pub(crate) fn is_bidirected_ix(&self, a: usize, b: usize) -> bool {
        self.marks[a][b] == Some(EdgeMark::Arrow) && self.marks[b][a] == Some(EdgeMark::Arrow)
    }

    /// Edge a–b exists and has an arrowhead at `b`.
    pub(crate) fn into_ix(&self, a: usize, b: usize) -> bool {
        self.marks[b][a] == Some(EdgeMark::Arrow)
    }

    pub(crate) fn neighbors(&self, i: usize) -> Bits {
        self.marks[i].iter().enumerate().filter(|(_, m)| m.is_some()).map(|(j, _)| j).collect()
    }

    pub(crate) fn parents_ix(&self, i: usize) -> Bits {
        self.neighbors(i).iter().filter(|&j| self.is_directed_ix(j, i)).collect()
    }

    pub(crate) fn children_ix(&self, i: usize) -> Bits {
        self.neighbors(i).iter().filter(|&j| self.is_directed_ix(i, j)).collect()
    }

    pub(crate) fn induced_ix(&self, keep: Bits) -> MixedGraph {
        let idx: Vec<usize> = keep.iter().collect();
        let mut g = MixedGraph {
            names: idx.iter().map(|&i| self.names[i].clone()).collect(),
            marks: alloc::vec![alloc::vec![None; idx.len()]; idx.len()],
            visible: alloc::vec![alloc::vec![false; idx.len()]; idx.len()],
        };
        for (a, &i) in idx.iter().enumerate() {
            for (b, &j) in idx.iter().enumerate() {
                g.marks[a][b] = self.marks[i][j];
                g.visible[a][b] = self.visible[i][j];
            }
        }
        g
    }

    /// Possible ancestors of `y` in the subgraph induced by `within`.
    pub(crate) fn possible_ancestors_in(&self, within: Bits, y: Bits) -> Bits {
        self.reach_back(within, y, |g, u, w| g.marks[u][w] != Some(EdgeMark::Arrow) && g.marks[w][u].is_some())
    }

    /// Ancestors of `y` along directed edges inside `within`.
    pub(crate) fn ancestors_in(&self, within: Bits, y: Bits) -> Bits {
        self.reach_back(within, y, |g, u, w| g.is_directed_ix(u, w))
    }

    /// Possible descendants of `x` inside `within`: nodes reached by a
    /// potentially directed path out of `x`.
    pub(crate) fn possible_descendants_in(&self, within: Bits, x: Bits) -> Bits {
        self.reach_back(within, x, |g, u, w| g.marks[w][u] != Some(EdgeMark::Arrow) && g.marks[u][w].is_some())
    }

    // Closure of `start` under `step(g, u, w)`: u joins when some w already
    // in the set satisfies the predicate.
    fn reach_back(&self, within: Bits, start: Bits, step: impl Fn(&Self, usize, usize) -> bool) -> Bits {
        let mut seen = start & within;
        let mut queue: VecDeque<usize> = seen.iter().collect();
        while let Some(w) = queue.pop_front() {
            for u in (self.neighbors(w) & within).iter() {
                if !seen.contains(u) && step(self, u, w) {
                    seen.insert(u);
                    queue.push_back(u);
                }
            }
        }
        seen
    }

    /// True iff the directed part of the subgraph on `within` has a cycle.
    pub(crate) fn has_directed_cycle_in(&self, within: Bits) -> bool {
        self.topological_order_in(within).is_none()
    }

    /// Kahn's algorithm on directed edges, smallest index first.
    pub(crate) fn topological_order_in(&self, within: Bits) -> Option<Vec<usize>> {
        let mut indeg: Vec<usize> = (0..self.node_count())
            .map(|i| if within.contains(i) { (self.parents_ix(i) & within).len() } else { 0 })
            .collect();
        let mut ready: Bits = within.iter().filter(|&i| indeg[i] == 0).collect();
        let mut order = Vec::with_capacity(within.len());
        while let Some(i) = ready.first() {
            ready.remove(i);
            order.push(i);
            for c in (self.children_ix(i) & within).iter() {
                indeg[c] -= 1;
                if indeg[c] == 0 {
                    ready.insert(c);
                }
            }
        }
        (order.len() == within.len()).then_some(order)
    }
}
