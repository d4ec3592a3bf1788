//! PAG analytics: visibility, buckets, the partial topological order, and
//! the pc-, dc- and cpc-component notions.
//!
//! Every function accepts a full PAG or an induced subgraph of one.
//! Induced subgraphs carry the visibility flags of the graph they came from.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::bits::Bits;
use crate::graph::{EdgeMark, MixedGraph, NodeSet};
use crate::{Error, Result};

/// Ordered buckets `B_1 < … < B_m` partitioning the nodes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartialOrder {
    pub buckets: Vec<NodeSet>,
}

impl PartialOrder {
    /// Union of the buckets before position `i`.
    pub fn preceding(&self, i: usize) -> NodeSet {
        let mut out = NodeSet::new();
        for b in &self.buckets[..i] {
            out = out.union(b);
        }
        out
    }
}

impl fmt::Display for PartialOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, b) in self.buckets.iter().enumerate() {
            if i > 0 {
                f.write_str(" < ")?;
            }
            if b.len() == 1 {
                f.write_str(b.as_slice()[0].as_str())?;
            } else {
                write!(f, "{b}")?;
            }
        }
        Ok(())
    }
}

/// Directed edges certified visible by the graphical test, as (tail, head).
pub fn visible_edges(g: &MixedGraph) -> Vec<(String, String)> {
    visible_pairs(g, g.all()).into_iter().map(|(a, b)| (String::from(g.name(a)), String::from(g.name(b)))).collect()
}

/// Circle-connected components, ordered by their first node.
pub fn buckets(g: &MixedGraph) -> Vec<NodeSet> {
    buckets_in(g, g.all()).into_iter().map(|b| g.node_set(b)).collect()
}

/// Partial topological order by repeated extraction of a bucket with only
/// arrowheads incident from the remaining buckets.
pub fn pto(g: &MixedGraph) -> Result<PartialOrder> {
    let order = pto_in(g, g.all())?;
    Ok(PartialOrder { buckets: order.into_iter().map(|b| g.node_set(b)).collect() })
}

/// Nodes joined to `seed` by a path of invisible edges whose interior nodes
/// are all definite colliders.
pub fn pc_component(g: &MixedGraph, seed: &NodeSet) -> Result<NodeSet> {
    let s = g.set_of(seed)?;
    Ok(g.node_set(pc_component_in(g, g.all(), s)))
}

/// Closure of `seed` under bidirected edges.
pub fn dc_component(g: &MixedGraph, seed: &NodeSet) -> Result<NodeSet> {
    let s = g.set_of(seed)?;
    Ok(g.node_set(dc_component_in(g, g.all(), s)))
}

/// Transitive closure of the pc-component relation.
pub fn cpc_components(g: &MixedGraph) -> Vec<NodeSet> {
    cpc_components_in(g, g.all()).into_iter().map(|b| g.node_set(b)).collect()
}

/// Nodes adjacent to a member of `x` by an edge without an arrowhead at
/// that member.
pub fn possible_children(g: &MixedGraph, x: &NodeSet) -> Result<NodeSet> {
    let xs = g.set_of(x)?;
    Ok(g.node_set(possible_children_in(g, g.all(), xs)))
}

/// First triple (A, B, C) breaking the circle-path closure: A*→B∘–*C
/// requires A*→C, and A→B additionally rules out A↔C.
pub fn circle_rule_violation(g: &MixedGraph) -> Option<(String, String, String)> {
    closure_violation_in(g, g.all()).map(|(a, b, c)| (g.name(a).into(), g.name(b).into(), g.name(c).into()))
}

// ---- index-level implementations ----------------------------------------

pub(crate) fn visible_pairs(g: &MixedGraph, within: Bits) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for x in within.iter() {
        for y in (g.neighbors(x) & within).iter() {
            if g.is_directed_ix(x, y) && edge_is_visible(g, within, x, y) {
                out.push((x, y));
            }
        }
    }
    out
}

fn edge_is_visible(g: &MixedGraph, within: Bits, x: usize, y: usize) -> bool {
    let adj_y = g.neighbors(y) & within;
    let certifies = |z: usize| z != y && !adj_y.contains(z);
    let parents_y: Bits = (g.parents_ix(y) & within).iter().collect();
    // Walk back from x along collider paths into x whose interior nodes are
    // parents of y.
    let mut stack: Vec<(usize, Bits)> = alloc::vec![(x, Bits::single(x) | Bits::single(y))];
    while let Some((u, used)) = stack.pop() {
        for z in (g.neighbors(u) & within).iter() {
            if used.contains(z) || !g.into_ix(z, u) {
                continue;
            }
            if certifies(z) {
                return true;
            }
            // z becomes an interior collider: needs z→y and the edge u–z into z.
            if parents_y.contains(z) && g.into_ix(u, z) {
                stack.push((z, used | Bits::single(z)));
            }
        }
    }
    false
}

pub(crate) fn buckets_in(g: &MixedGraph, within: Bits) -> Vec<Bits> {
    let mut left = within;
    let mut out = Vec::new();
    while let Some(s) = left.first() {
        let mut comp = Bits::single(s);
        let mut stack = alloc::vec![s];
        while let Some(u) = stack.pop() {
            for w in (g.neighbors(u) & within).iter() {
                if !comp.contains(w)
                    && g.mark_ix(u, w) == Some(EdgeMark::Circle)
                    && g.mark_ix(w, u) == Some(EdgeMark::Circle)
                {
                    comp.insert(w);
                    stack.push(w);
                }
            }
        }
        left = left - comp;
        out.push(comp);
    }
    out
}

pub(crate) fn pto_in(g: &MixedGraph, within: Bits) -> Result<Vec<Bits>> {
    if let Some((a, b, c)) = closure_violation_in(g, within) {
        return Err(Error::Invalid(format!(
            "circle-path closure violated at {} *-> {} o-* {}",
            g.name(a),
            g.name(b),
            g.name(c)
        )));
    }
    let mut remaining = buckets_in(g, within);
    let mut extracted = Vec::with_capacity(remaining.len());
    while !remaining.is_empty() {
        let alive: Bits = remaining.iter().fold(Bits::EMPTY, |acc, b| acc | *b);
        let mut best: Option<usize> = None;
        for (k, b) in remaining.iter().enumerate() {
            let only_arrows = b
                .iter()
                .all(|u| (g.neighbors(u) & (alive - *b)).iter().all(|w| g.mark_ix(u, w) == Some(EdgeMark::Arrow)));
            if !only_arrows {
                continue;
            }
            let better = match best {
                None => true,
                Some(j) => min_name(g, *b) > min_name(g, remaining[j]),
            };
            if better {
                best = Some(k);
            }
        }
        let k = best.ok_or_else(|| Error::Invalid("no bucket with only arrowheads incident".into()))?;
        extracted.push(remaining.remove(k));
    }
    extracted.reverse();
    Ok(extracted)
}

fn min_name(g: &MixedGraph, b: Bits) -> &str {
    b.iter().map(|i| g.name(i)).min().unwrap_or("")
}

pub(crate) fn closure_violation_in(g: &MixedGraph, within: Bits) -> Option<(usize, usize, usize)> {
    for b in within.iter() {
        let nb = g.neighbors(b) & within;
        for a in nb.iter() {
            if !g.into_ix(a, b) {
                continue;
            }
            for c in nb.iter() {
                if c == a || g.mark_ix(b, c) != Some(EdgeMark::Circle) {
                    continue;
                }
                if !g.into_ix(a, c) {
                    return Some((a, b, c));
                }
                if g.is_directed_ix(a, b) && g.mark_ix(a, c) == Some(EdgeMark::Arrow) {
                    return Some((a, b, c));
                }
            }
        }
    }
    None
}

pub(crate) fn pc_component_in(g: &MixedGraph, within: Bits, seed: Bits) -> Bits {
    let mut out = seed & within;
    for s in (seed & within).iter() {
        let mut stack: Vec<(usize, usize, Bits)> = Vec::new();
        for w in (g.neighbors(s) & within).iter() {
            if invisible(g, s, w) {
                out.insert(w);
                stack.push((w, s, Bits::single(s) | Bits::single(w)));
            }
        }
        while let Some((u, prev, used)) = stack.pop() {
            if !g.into_ix(prev, u) {
                continue;
            }
            for w in (g.neighbors(u) & within).iter() {
                if used.contains(w) || !g.into_ix(w, u) || !invisible(g, u, w) {
                    continue;
                }
                out.insert(w);
                stack.push((w, u, used | Bits::single(w)));
            }
        }
    }
    out
}

fn invisible(g: &MixedGraph, a: usize, b: usize) -> bool {
    !g.visible_ix(a, b) && !g.visible_ix(b, a)
}

pub(crate) fn dc_component_in(g: &MixedGraph, within: Bits, seed: Bits) -> Bits {
    let mut out = seed & within;
    let mut stack: Vec<usize> = out.iter().collect();
    while let Some(u) = stack.pop() {
        for w in (g.neighbors(u) & within).iter() {
            if !out.contains(w) && g.is_bidirected_ix(u, w) {
                out.insert(w);
                stack.push(w);
            }
        }
    }
    out
}

pub(crate) fn cpc_components_in(g: &MixedGraph, within: Bits) -> Vec<Bits> {
    let pcs: Vec<(usize, Bits)> = within.iter().map(|v| (v, pc_component_in(g, within, Bits::single(v)))).collect();
    let mut left = within;
    let mut out = Vec::new();
    while let Some(s) = left.first() {
        let mut comp = Bits::single(s);
        loop {
            let mut grown = comp;
            for (v, pc) in &pcs {
                if comp.contains(*v) || pc.intersects(comp) {
                    grown = grown | *pc | Bits::single(*v);
                }
            }
            if grown == comp {
                break;
            }
            comp = grown;
        }
        left = left - comp;
        out.push(comp);
    }
    out
}

pub(crate) fn possible_children_in(g: &MixedGraph, within: Bits, x: Bits) -> Bits {
    let mut out = Bits::EMPTY;
    for u in (x & within).iter() {
        for w in (g.neighbors(u) & within).iter() {
            if !g.into_ix(w, u) {
                out.insert(w);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::EdgeMark::*;

    fn set(v: &[&str]) -> NodeSet {
        v.iter().copied().collect()
    }

    fn confounded_mediator() -> MixedGraph {
        let mut g = MixedGraph::with_nodes(["V1", "V2", "X", "V3", "V4"]).unwrap();
        g.add_edge("V1", "X", Circle, Arrow).unwrap();
        g.add_edge("V2", "X", Circle, Arrow).unwrap();
        g.add_edge("X", "V3", Tail, Arrow).unwrap();
        g.add_edge("X", "V4", Tail, Arrow).unwrap();
        g.add_edge("V3", "V4", Circle, Circle).unwrap();
        g.set_visible("X", "V3", true).unwrap();
        g.set_visible("X", "V4", true).unwrap();
        g
    }

    #[test]
    fn visibility_needs_a_certifying_node() {
        let g = confounded_mediator();
        let mut v = visible_edges(&g);
        v.sort();
        assert_eq!(v, alloc::vec![("X".into(), "V3".into()), ("X".into(), "V4".into())]);
        let mut two = MixedGraph::with_nodes(["A", "B"]).unwrap();
        two.add_edge("A", "B", Tail, Arrow).unwrap();
        assert!(visible_edges(&two).is_empty());
    }

    #[test]
    fn visibility_through_collider_path() {
        // Z <-> W <-> X -> Y with W -> Y: Z not adjacent to Y certifies X -> Y.
        let mut g = MixedGraph::with_nodes(["Z", "W", "X", "Y"]).unwrap();
        g.add_edge("Z", "W", Arrow, Arrow).unwrap();
        g.add_edge("W", "X", Arrow, Arrow).unwrap();
        g.add_edge("X", "Y", Tail, Arrow).unwrap();
        g.add_edge("W", "Y", Tail, Arrow).unwrap();
        let v = visible_edges(&g);
        assert!(v.contains(&("X".into(), "Y".into())));
        // With W <-> Y instead, W is no parent of Y and nothing certifies.
        let mut h = MixedGraph::with_nodes(["Z", "W", "X", "Y"]).unwrap();
        h.add_edge("Z", "W", Arrow, Arrow).unwrap();
        h.add_edge("W", "X", Arrow, Arrow).unwrap();
        h.add_edge("X", "Y", Tail, Arrow).unwrap();
        h.add_edge("W", "Y", Arrow, Arrow).unwrap();
        assert!(!visible_edges(&h).contains(&("X".into(), "Y".into())));
    }

    #[test]
    fn buckets_and_order() {
        let g = confounded_mediator();
        assert_eq!(buckets(&g), alloc::vec![set(&["V1"]), set(&["V2"]), set(&["X"]), set(&["V3", "V4"])]);
        let o = pto(&g).unwrap();
        assert_eq!(alloc::format!("{o}"), "V1 < V2 < X < {V3,V4}");
        assert_eq!(o.preceding(3), set(&["V1", "V2", "X"]));

        let sub = g.induced_subgraph(&set(&["V1", "V2", "X", "V4"])).unwrap();
        assert_eq!(buckets(&sub).len(), 4);
        assert_eq!(alloc::format!("{}", pto(&sub).unwrap()), "V1 < V2 < X < V4");

        let single = MixedGraph::with_nodes(["A"]).unwrap();
        assert_eq!(pto(&single).unwrap().buckets, alloc::vec![set(&["A"])]);
    }

    #[test]
    fn components() {
        let g = confounded_mediator();
        let sub = g.induced_subgraph(&set(&["V1", "V2", "X", "V4"])).unwrap();
        assert_eq!(pc_component(&sub, &set(&["X"])).unwrap(), set(&["V1", "V2", "X"]));
        assert_eq!(cpc_components(&sub), alloc::vec![set(&["V1", "V2", "X"]), set(&["V4"])]);
        assert_eq!(dc_component(&g, &set(&["X"])).unwrap(), set(&["X"]));
        assert_eq!(possible_children(&g, &set(&["X"])).unwrap(), set(&["V3", "V4"]));
        assert_eq!(possible_children(&sub, &set(&["V1"])).unwrap(), set(&["X"]));
        assert_eq!(possible_children(&sub, &set(&["V4"])).unwrap(), set(&[]));

        let mut chain = MixedGraph::with_nodes(["V1", "V2", "V3"]).unwrap();
        chain.add_edge("V1", "V2", Circle, Circle).unwrap();
        chain.add_edge("V2", "V3", Circle, Circle).unwrap();
        assert_eq!(pc_component(&chain, &set(&["V1"])).unwrap(), set(&["V1", "V2"]));
        assert_eq!(cpc_components(&chain), alloc::vec![set(&["V1", "V2", "V3"])]);
    }

    #[test]
    fn closure_violation_is_reported() {
        let mut g = MixedGraph::with_nodes(["A", "B", "C"]).unwrap();
        g.add_edge("A", "B", Tail, Arrow).unwrap();
        g.add_edge("B", "C", Circle, Circle).unwrap();
        assert_eq!(circle_rule_violation(&g), Some(("A".into(), "B".into(), "C".into())));
        assert!(pto(&g).is_err());
        g.add_edge("A", "C", Arrow, Arrow).unwrap();
        assert!(circle_rule_violation(&g).is_some());
        assert!(circle_rule_violation(&confounded_mediator()).is_none());
    }
}
