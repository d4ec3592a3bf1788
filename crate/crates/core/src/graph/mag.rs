use alloc::format;
use alloc::string::ToString;
use alloc::vec::Vec;

use super::{EdgeMark, LatentDag, MixedGraph, MAX_OBSERVED};
use crate::bits::Bits;
use crate::{Error, Result};

/// Maximal ancestral graph over observed nodes; edges are →, ← or ↔.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Mag(MixedGraph);

impl Mag {
    /// Validates marks, ancestrality and maximality.
    pub fn new(graph: MixedGraph) -> Result<Mag> {
        if graph.node_count() > MAX_OBSERVED {
            return Err(Error::TooManyNodes { got: graph.node_count(), limit: MAX_OBSERVED });
        }
        for e in graph.edges() {
            match (e.mark_a, e.mark_b) {
                (EdgeMark::Circle, _) | (_, EdgeMark::Circle) => {
                    return Err(Error::Invalid(format!("circle mark on {}–{} in a MAG", e.a, e.b)))
                }
                (EdgeMark::Tail, EdgeMark::Tail) => {
                    return Err(Error::Invalid(format!("undirected edge {}–{} in a MAG", e.a, e.b)))
                }
                _ => {}
            }
            if e.visible && !(e.mark_a == EdgeMark::Tail || e.mark_b == EdgeMark::Tail) {
                return Err(Error::Invalid(format!("visible flag on {}↔{}", e.a, e.b)));
            }
        }
        if let Some(msg) = ancestral_violation(&graph) {
            return Err(Error::Invalid(msg));
        }
        if let Some((a, b)) = maximality_violation(&graph) {
            return Err(Error::Invalid(format!(
                "not maximal: inducing path between non-adjacent {} and {}",
                graph.name(a),
                graph.name(b)
            )));
        }
        Ok(Mag(graph))
    }

    pub(crate) fn new_unchecked(graph: MixedGraph) -> Mag {
        Mag(graph)
    }

    pub fn graph(&self) -> &MixedGraph {
        &self.0
    }

    pub fn into_graph(self) -> MixedGraph {
        self.0
    }
}

/// Directed or almost directed cycle, described, if any.
pub(crate) fn ancestral_violation(g: &MixedGraph) -> Option<alloc::string::String> {
    let all = g.all();
    if g.has_directed_cycle_in(all) {
        return Some("directed cycle".into());
    }
    for a in all.iter() {
        let anc = g.ancestors_in(all, Bits::single(a));
        for b in g.neighbors(a).iter() {
            if g.is_bidirected_ix(a, b) && anc.contains(b) {
                return Some(format!("almost directed cycle through {}↔{}", g.name(a), g.name(b)));
            }
        }
    }
    None
}

pub(crate) fn maximality_violation(g: &MixedGraph) -> Option<(usize, usize)> {
    let n = g.node_count();
    for a in 0..n {
        for b in a + 1..n {
            if g.mark_ix(a, b).is_none() && inducing_path(g, Bits::EMPTY, a, b) {
                return Some((a, b));
            }
        }
    }
    None
}

/// Whether an inducing path relative to `latent` joins `a` and `b`: every
/// non-latent interior node is a collider, every collider is an ancestor of
/// `a` or `b`.
///
/// Searched as reachability over (node, arrived-with-arrowhead) states. A
/// qualifying walk shortens to a qualifying path because revisited observed
/// nodes are colliders on every visit and latent nodes are never colliders
/// in canonical form.
pub(crate) fn inducing_path(g: &MixedGraph, latent: Bits, a: usize, b: usize) -> bool {
    let all = g.all();
    let anc = g.ancestors_in(all, Bits::single(a) | Bits::single(b));
    let n = g.node_count();
    let mut seen = alloc::vec![[false; 2]; n];
    let mut stack: Vec<(usize, bool)> = Vec::new();
    for w in g.neighbors(a).iter() {
        if w == b {
            return true;
        }
        let into = g.into_ix(a, w);
        if !seen[w][into as usize] {
            seen[w][into as usize] = true;
            stack.push((w, into));
        }
    }
    while let Some((u, into)) = stack.pop() {
        for w in g.neighbors(u).iter() {
            if w == a {
                continue;
            }
            let collider = into && g.into_ix(w, u);
            let ok = if collider { anc.contains(u) } else { latent.contains(u) };
            if !ok {
                continue;
            }
            if w == b {
                return true;
            }
            let next = g.into_ix(u, w);
            if !seen[w][next as usize] {
                seen[w][next as usize] = true;
                stack.push((w, next));
            }
        }
    }
    false
}

/// MAG of `d` over its observed nodes.
pub fn mag_of_dag(d: &LatentDag) -> Mag {
    let g = d.graph();
    let obs = d.observed_bits();
    let lat = d.latent_bits();
    let idx: Vec<usize> = obs.iter().collect();
    let mut m = MixedGraph::with_nodes(idx.iter().map(|&i| g.name(i).to_string())).unwrap_or_default();
    let all = g.all();
    for (ka, &a) in idx.iter().enumerate() {
        let anc_a = g.ancestors_in(all, Bits::single(a));
        for (kb, &b) in idx.iter().enumerate().skip(ka + 1) {
            if !inducing_path(g, lat, a, b) {
                continue;
            }
            let anc_b = g.ancestors_in(all, Bits::single(b));
            let mark_a = if anc_b.contains(a) { EdgeMark::Tail } else { EdgeMark::Arrow };
            let mark_b = if anc_a.contains(b) { EdgeMark::Tail } else { EdgeMark::Arrow };
            m.set_edge_ix(ka, kb, mark_a, mark_b);
        }
    }
    Mag::new_unchecked(m)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn edge(m: &Mag, a: &str, b: &str) -> Option<(EdgeMark, EdgeMark)> {
        Some((m.graph().mark(a, b)?, m.graph().mark(b, a)?))
    }

    #[test]
    fn latent_free_dag_maps_to_itself() {
        let d = LatentDag::new(&["A", "B", "C"], &[("A", "B"), ("B", "C")], &[]).unwrap();
        let m = mag_of_dag(&d);
        assert_eq!(m.graph().edge_count(), 2);
        assert_eq!(edge(&m, "A", "B"), Some((EdgeMark::Tail, EdgeMark::Arrow)));
        assert!(Mag::new(m.graph().clone()).is_ok());
    }

    #[test]
    fn confounded_pair_is_bidirected() {
        let d = LatentDag::new(&["X", "Y"], &[], &[("X", "Y")]).unwrap();
        let m = mag_of_dag(&d);
        assert_eq!(edge(&m, "X", "Y"), Some((EdgeMark::Arrow, EdgeMark::Arrow)));
    }

    #[test]
    fn mediator_with_confounded_outcome() {
        let d = LatentDag::new(
            &["V1", "V2", "X", "V3", "V4"],
            &[("V1", "X"), ("V2", "X"), ("X", "V3"), ("V3", "V4")],
            &[("V2", "X"), ("V3", "V4")],
        )
        .unwrap();
        let m = mag_of_dag(&d);
        let t = EdgeMark::Tail;
        let h = EdgeMark::Arrow;
        assert_eq!(edge(&m, "V1", "X"), Some((t, h)));
        assert_eq!(edge(&m, "V2", "X"), Some((t, h)));
        assert_eq!(edge(&m, "X", "V3"), Some((t, h)));
        // X→V3←L→V4 is inducing: V3 is a collider and an ancestor of V4.
        assert_eq!(edge(&m, "X", "V4"), Some((t, h)));
        assert_eq!(edge(&m, "V3", "V4"), Some((t, h)));
        assert_eq!(m.graph().edge_count(), 5);
        assert!(Mag::new(m.graph().clone()).is_ok());
    }

    #[test]
    fn rejects_non_ancestral_and_non_maximal() {
        let mut g = MixedGraph::with_nodes(["A", "B", "C"]).unwrap();
        g.add_edge("A", "B", EdgeMark::Tail, EdgeMark::Arrow).unwrap();
        g.add_edge("B", "C", EdgeMark::Tail, EdgeMark::Arrow).unwrap();
        g.add_edge("A", "C", EdgeMark::Arrow, EdgeMark::Arrow).unwrap();
        assert!(Mag::new(g).is_err());

        let mut g = MixedGraph::with_nodes(["A", "B", "C", "D"]).unwrap();
        g.add_edge("A", "B", EdgeMark::Arrow, EdgeMark::Arrow).unwrap();
        g.add_edge("B", "C", EdgeMark::Arrow, EdgeMark::Arrow).unwrap();
        g.add_edge("C", "D", EdgeMark::Arrow, EdgeMark::Arrow).unwrap();
        g.add_edge("B", "D", EdgeMark::Tail, EdgeMark::Arrow).unwrap();
        g.add_edge("C", "A", EdgeMark::Tail, EdgeMark::Arrow).unwrap();
        // A↔B↔C↔D: B and C are colliders, B→D and C→A make them ancestors.
        assert!(matches!(Mag::new(g), Err(Error::Invalid(m)) if m.contains("not maximal")));
    }
}
