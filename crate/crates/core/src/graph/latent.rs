use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::{EdgeMark, MixedGraph, NodeSet, MAX_OBSERVED};
use crate::bits::Bits;
use crate::{Error, Result};

/// Acyclic causal diagram whose latent nodes are roots with exactly two
/// observed children, one per confounded pair.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LatentDag {
    graph: MixedGraph,
    latent: Bits,
}

impl LatentDag {
    /// Builds a diagram over `observed` with directed edges and confounded
    /// pairs; each pair becomes a fresh latent node.
    pub fn new<S: AsRef<str>>(observed: &[S], directed: &[(S, S)], bidirected: &[(S, S)]) -> Result<Self> {
        let mut graph = MixedGraph::with_nodes(observed.iter().map(|s| s.as_ref().to_string()))?;
        check_observed(graph.node_count())?;
        for (a, b) in directed {
            graph.add_edge(a.as_ref(), b.as_ref(), EdgeMark::Tail, EdgeMark::Arrow)?;
        }
        let mut latent = Bits::EMPTY;
        let mut counter = 0;
        for (a, b) in bidirected {
            let (a, b) = (a.as_ref(), b.as_ref());
            let ia = graph.require(a)?;
            let ib = graph.require(b)?;
            if ia == ib {
                return Err(Error::SelfLoop(a.to_string()));
            }
            let name = fresh_name(&graph, &mut counter);
            let l = graph.add_node(name)?;
            graph.set_edge_ix(l, ia, EdgeMark::Tail, EdgeMark::Arrow);
            graph.set_edge_ix(l, ib, EdgeMark::Tail, EdgeMark::Arrow);
            latent.insert(l);
        }
        Self::from_graph(graph, latent)
    }

    /// Normalizes an arbitrary DAG with designated latent nodes by latent
    /// projection: observed A→B for every latent-only directed path, and a
    /// two-child latent for every pair sharing a latent ancestor through
    /// latent-only directed paths.
    pub fn project(dag: &MixedGraph, latent: &NodeSet) -> Result<Self> {
        for e in dag.edges() {
            let directed =
                matches!((e.mark_a, e.mark_b), (EdgeMark::Tail, EdgeMark::Arrow) | (EdgeMark::Arrow, EdgeMark::Tail));
            if !directed {
                return Err(Error::Invalid(format!("edge {}–{} is not directed", e.a, e.b)));
            }
        }
        if dag.has_directed_cycle_in(dag.all()) {
            return Err(Error::Invalid("directed cycle".into()));
        }
        let lat = dag.set_of(latent)?;
        let obs = dag.all() - lat;
        let observed: Vec<String> = obs.iter().map(|i| dag.name(i).to_string()).collect();
        let mut directed = Vec::new();
        let mut bidirected: Vec<(String, String)> = Vec::new();
        for a in obs.iter() {
            for b in latent_reach(dag, lat, a).iter() {
                directed.push((dag.name(a).to_string(), dag.name(b).to_string()));
            }
        }
        for l in lat.iter() {
            let reach: Vec<usize> = latent_reach(dag, lat, l).iter().collect();
            for (k, &a) in reach.iter().enumerate() {
                for &b in &reach[k + 1..] {
                    let pair = (dag.name(a).to_string(), dag.name(b).to_string());
                    if !bidirected.contains(&pair) {
                        bidirected.push(pair);
                    }
                }
            }
        }
        Self::new(&observed, &directed, &bidirected)
    }

    /// Validates a graph that is already in canonical form, with `latent`
    /// naming its latent nodes.
    pub fn with_latents(graph: MixedGraph, latent: &NodeSet) -> Result<Self> {
        let bits = graph.set_of(latent)?;
        Self::from_graph(graph, bits)
    }

    pub(crate) fn from_graph(graph: MixedGraph, latent_set: Bits) -> Result<Self> {
        check_observed(graph.node_count() - latent_set.len())?;
        for e in graph.edges() {
            let ok =
                matches!((e.mark_a, e.mark_b), (EdgeMark::Tail, EdgeMark::Arrow) | (EdgeMark::Arrow, EdgeMark::Tail));
            if !ok {
                return Err(Error::Invalid(format!("edge {}–{} is not directed", e.a, e.b)));
            }
        }
        if graph.has_directed_cycle_in(graph.all()) {
            return Err(Error::Invalid("directed cycle".into()));
        }
        for l in latent_set.iter() {
            let ch = graph.children_ix(l);
            if !graph.parents_ix(l).is_empty() || ch.len() != 2 || ch.intersects(latent_set) {
                return Err(Error::Invalid(format!(
                    "latent `{}` must be a root with exactly two observed children",
                    graph.name(l)
                )));
            }
        }
        Ok(LatentDag { graph, latent: latent_set })
    }

    pub fn graph(&self) -> &MixedGraph {
        &self.graph
    }

    pub fn observed(&self) -> NodeSet {
        self.graph.node_set(self.observed_bits())
    }

    pub fn latents(&self) -> NodeSet {
        self.graph.node_set(self.latent)
    }

    pub fn is_latent(&self, name: &str) -> bool {
        self.graph.index_of(name).is_some_and(|i| self.latent.contains(i))
    }

    /// Observed pairs sharing a latent parent, in latent order.
    pub fn confounded_pairs(&self) -> Vec<(String, String)> {
        self.latent
            .iter()
            .map(|l| {
                let mut ch = self.graph.children_ix(l).iter();
                let a = ch.next().unwrap_or(l);
                let b = ch.next().unwrap_or(l);
                (self.graph.name(a).to_string(), self.graph.name(b).to_string())
            })
            .collect()
    }

    /// Observed directed edges as (tail, head) pairs.
    pub fn directed_edges(&self) -> Vec<(String, String)> {
        let obs = self.observed_bits();
        let mut out = Vec::new();
        for a in obs.iter() {
            for b in (self.graph.children_ix(a) & obs).iter() {
                out.push((self.graph.name(a).to_string(), self.graph.name(b).to_string()));
            }
        }
        out
    }

    /// Subdiagram over observed `a` plus the latents whose children are both
    /// in `a`.
    pub fn induced_subgraph(&self, a: &NodeSet) -> Result<LatentDag> {
        let keep = self.graph.set_of(a)?;
        if keep.intersects(self.latent) {
            return Err(Error::Precondition("induced subgraph over latent nodes".into()));
        }
        let full = self.within(keep);
        let graph = self.graph.induced_ix(full);
        let latent = full.iter().enumerate().filter(|(_, i)| self.latent.contains(*i)).map(|(k, _)| k).collect();
        Ok(LatentDag { graph, latent })
    }

    /// Ancestors of `y` among observed nodes, `y` included.
    pub fn ancestors(&self, y: &NodeSet) -> Result<NodeSet> {
        let ys = self.graph.set_of(y)?;
        Ok(self.graph.node_set(self.graph.ancestors_in(self.graph.all(), ys) - self.latent))
    }

    pub(crate) fn observed_bits(&self) -> Bits {
        self.graph.all() - self.latent
    }

    pub(crate) fn latent_bits(&self) -> Bits {
        self.latent
    }

    /// `t` plus every latent whose two children lie in `t`.
    pub(crate) fn within(&self, t: Bits) -> Bits {
        let mut out = t;
        for l in self.latent.iter() {
            if self.graph.children_ix(l).is_subset(t) {
                out.insert(l);
            }
        }
        out
    }
}

fn check_observed(n: usize) -> Result<()> {
    if n > MAX_OBSERVED {
        Err(Error::TooManyNodes { got: n, limit: MAX_OBSERVED })
    } else {
        Ok(())
    }
}

fn fresh_name(g: &MixedGraph, counter: &mut usize) -> String {
    loop {
        *counter += 1;
        let name = format!("_L{counter}");
        if g.index_of(&name).is_none() {
            return name;
        }
    }
}

// Observed nodes reached from `from` by directed paths whose intermediate
// nodes are all latent.
fn latent_reach(g: &MixedGraph, lat: Bits, from: usize) -> Bits {
    let mut out = Bits::EMPTY;
    let mut seen = Bits::single(from);
    let mut stack = alloc::vec![from];
    while let Some(u) = stack.pop() {
        for c in g.children_ix(u).iter() {
            if seen.contains(c) {
                continue;
            }
            seen.insert(c);
            if lat.contains(c) {
                stack.push(c);
            } else {
                out.insert(c);
            }
        }
    }
    out
}
