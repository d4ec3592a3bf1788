use alloc::format;

use super::{EdgeMark, MixedGraph, MAX_OBSERVED};
use crate::structure::{closure_violation_in, visible_pairs};
use crate::{Error, Result};

/// Partial ancestral graph with visibility flags matching the graphical
/// visibility test.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Pag(MixedGraph);

impl Pag {
    /// Validates `graph` and checks that its visibility flags are exactly
    /// the edges the graphical test certifies.
    pub fn new(graph: MixedGraph) -> Result<Pag> {
        let expected = Self::from_marks(graph.clone())?;
        for e in graph.edges() {
            let (i, j) = (graph.require(&e.a)?, graph.require(&e.b)?);
            for (t, h) in [(i, j), (j, i)] {
                if graph.visible_ix(t, h) != expected.0.visible_ix(t, h) {
                    let (tn, hn) = (graph.name(t), graph.name(h));
                    let msg = if graph.visible_ix(t, h) {
                        format!("edge {tn} --> {hn} is flagged visible but no node certifies it")
                    } else {
                        format!("edge {tn} --> {hn} is visible but not flagged")
                    };
                    return Err(Error::Invalid(msg));
                }
            }
        }
        Ok(expected)
    }

    /// Validates marks and recomputes the visibility flags.
    pub fn from_marks(mut graph: MixedGraph) -> Result<Pag> {
        if graph.node_count() > MAX_OBSERVED {
            return Err(Error::TooManyNodes { got: graph.node_count(), limit: MAX_OBSERVED });
        }
        for e in graph.edges() {
            if e.mark_a == EdgeMark::Tail && e.mark_b == EdgeMark::Tail {
                return Err(Error::Invalid(format!("undirected edge {}–{}", e.a, e.b)));
            }
        }
        if let Some((a, b, c)) = closure_violation_in(&graph, graph.all()) {
            return Err(Error::Invalid(format!(
                "circle-path closure violated at {} *-> {} o-* {}",
                graph.name(a),
                graph.name(b),
                graph.name(c)
            )));
        }
        let all = graph.all();
        for i in all.iter() {
            for j in all.iter() {
                graph.set_visible_ix(i, j, false);
            }
        }
        for (t, h) in visible_pairs(&graph, all) {
            graph.set_visible_ix(t, h, true);
        }
        Ok(Pag(graph))
    }

    pub fn graph(&self) -> &MixedGraph {
        &self.0
    }

    pub fn into_graph(self) -> MixedGraph {
        self.0
    }
}
