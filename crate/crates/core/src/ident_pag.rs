//! Identification of `P_x(y)` from a PAG.
//!
//! `Identify(C, T, Q[T])` removes one bucket `B ⊆ T \ C` at a time. A bucket
//! is removable when none of its members has a possible child outside `B`
//! in its pc-component of the subgraph over `T`; then
//!
//! ```text
//! Q[T \ B] = Q[T] / F · Σ_B F,   F = Π_{B_i ⊆ S} Q[T](B_i | B^(i-1))
//! ```
//!
//! with `S` the union of the dc-components of `B`'s members and the `B_i`
//! taken in the partial topological order of the subgraph over `T`.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::adjustment::PagSeparation;
use crate::bits::Bits;
use crate::expr::{simplify, simplify_certified, Expr, Independence};
use crate::graph::{MixedGraph, NodeSet, Pag};
use crate::ident_dag::{check_query, finish, reduction_blocks, var_set, Candidates};
use crate::structure::{
    buckets_in, cpc_components_in, dc_component_in, pc_component_in, possible_children_in, pto_in, PartialOrder,
};
use crate::{Error, Result};

pub use crate::ident_dag::{CandidateOrder, Fail, IdOptions, Identification, Run, Step, Witness};

#[derive(Clone, Debug, PartialEq)]
pub enum BucketVerdict {
    Identifiable,
    /// `witness.child` is a possible child of `witness.node` outside the
    /// bucket and inside its pc-component.
    Blocked(Witness),
}

fn blocker(g: &MixedGraph, t: Bits, b: Bits) -> Option<Witness> {
    for u in b.iter() {
        let pc = pc_component_in(g, t, Bits::single(u));
        if let Some(c) = ((possible_children_in(g, t, Bits::single(u)) - b) & pc).first() {
            return Some(Witness {
                node: String::from(g.name(u)),
                child: String::from(g.name(c)),
                component: g.node_set(pc),
            });
        }
    }
    None
}

fn require_bucket(g: &MixedGraph, x: &NodeSet) -> Result<Bits> {
    let b = g.set_of(x)?;
    if !buckets_in(g, g.all()).contains(&b) {
        return Err(Error::Precondition(format!("{x} is not a bucket")));
    }
    Ok(b)
}

/// Whether `Q[T \ x]` is identifiable from `Q[T]`, where `p_t` is the PAG
/// restricted to `T` and `x` one of its buckets.
pub fn bucket_identifiable(p_t: &MixedGraph, x: &NodeSet) -> Result<BucketVerdict> {
    let b = require_bucket(p_t, x)?;
    Ok(match blocker(p_t, p_t.all(), b) {
        None => BucketVerdict::Identifiable,
        Some(w) => BucketVerdict::Blocked(w),
    })
}

/// `Q[T \ x]` from `q = Q[T]`, where `p_t` is the PAG restricted to `T` and
/// `order` its partial topological order.
pub fn q_reduce_bucket(p_t: &MixedGraph, x: &NodeSet, q: &Expr, order: &PartialOrder) -> Result<Expr> {
    let b = require_bucket(p_t, x)?;
    let t = p_t.all();
    if b == t {
        return Err(Error::Precondition(format!("{x} is the whole graph")));
    }
    if let Some(w) = blocker(p_t, t, b) {
        return Err(Error::Precondition(format!("{} has possible child {} in its pc-component", w.node, w.child)));
    }
    let blocks = order.buckets.iter().map(|s| p_t.set_of(s)).collect::<Result<Vec<_>>>()?;
    let s = dc_component_in(p_t, t, b);
    Ok(simplify(&reduction_blocks(p_t, t, b, s, q, &blocks)))
}

pub fn idp(p: &Pag, x: &NodeSet, y: &NodeSet) -> Result<Identification> {
    Ok(idp_with(p, x, y, &IdOptions::default())?.outcome)
}

pub fn idp_with(p: &Pag, x: &NodeSet, y: &NodeSet, opts: &IdOptions) -> Result<Run> {
    let g = p.graph();
    let (xb, yb) = (g.set_of(x)?, g.set_of(y)?);
    check_query(xb, yb)?;
    let all = g.all();
    let dset = g.possible_ancestors_in(all - xb, yb);
    let comps = cpc_components_in(g, dset);
    let oracle = PagSeparation(g);
    let mut cands = Candidates::new(opts.order);
    let mut steps = Vec::new();
    let mut qs = Vec::new();
    let base = Expr::dist(var_set(g, all));
    let run = |outcome, steps| Run {
        outcome,
        d: g.node_set(dset),
        components: comps.iter().map(|&c| g.node_set(c)).collect(),
        steps,
    };
    for &c in &comps {
        match identify(g, c, all, base.clone(), &mut cands, &mut steps, &oracle)? {
            Ok(q) => qs.push(q),
            Err(fail) => return Ok(run(Identification::NotIdentified { fail }, steps)),
        }
    }
    let expression = finish(var_set(g, dset - yb), qs, &var_set(g, xb | yb), &oracle);
    Ok(run(Identification::Identified { expression }, steps))
}

fn identify(
    g: &MixedGraph,
    c: Bits,
    mut t: Bits,
    mut q: Expr,
    cands: &mut Candidates,
    steps: &mut Vec<Step>,
    oracle: &dyn Independence,
) -> Result<core::result::Result<Expr, Fail>> {
    while c != t {
        let order = pto_in(g, t)?;
        let free = t - c;
        let mut scan: Vec<Bits> = order.iter().rev().copied().filter(|b| b.is_subset(free)).collect();
        cands.arrange(&mut scan);
        let Some(b) = scan.iter().copied().find(|&b| blocker(g, t, b).is_none()) else {
            let witness = scan.iter().find_map(|&b| blocker(g, t, b));
            return Ok(Err(Fail { c: g.node_set(c), t: g.node_set(t), stuck: g.node_set(free), witness }));
        };
        let s = dc_component_in(g, t, b);
        q = simplify_certified(&reduction_blocks(g, t, b, s, &q, &order), oracle);
        steps.push(Step { c: g.node_set(c), t: g.node_set(t), removed: g.node_set(b), q: q.clone() });
        t = t - b;
    }
    Ok(Ok(q))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::EdgeMark::*;

    fn set(v: &[&str]) -> NodeSet {
        v.iter().copied().collect()
    }

    fn two_treatments() -> Pag {
        let mut g = MixedGraph::with_nodes(["V1", "V2", "X1", "X2", "Y1", "Y2", "Y3"]).unwrap();
        g.add_edge("V1", "X1", Circle, Arrow).unwrap();
        g.add_edge("V2", "X2", Circle, Arrow).unwrap();
        g.add_edge("X1", "Y1", Tail, Arrow).unwrap();
        g.add_edge("X2", "Y3", Tail, Arrow).unwrap();
        for (a, b) in [("X1", "X2"), ("X1", "Y3"), ("X2", "Y2"), ("Y1", "Y2")] {
            g.add_edge(a, b, Arrow, Arrow).unwrap();
        }
        Pag::from_marks(g).unwrap()
    }

    #[test]
    fn worked_example_two_treatments() {
        let r = idp(&two_treatments(), &set(&["X1", "X2"]), &set(&["Y1", "Y2", "Y3"])).unwrap();
        assert_eq!(r.expr().map(Expr::to_text).as_deref(), Some("P(y1,y2|x1) * P(y3|x2)"));
    }

    #[test]
    fn first_reduction_of_worked_example() {
        let g = two_treatments().into_graph();
        let q = Expr::dist(var_set(&g, g.all()));
        let order = crate::structure::pto(&g).unwrap();
        let r = q_reduce_bucket(&g, &set(&["Y3"]), &q, &order).unwrap();
        assert_eq!(r.to_text(), "P(v1,v2,x1,x2,y1,y2)");
    }

    #[test]
    fn circle_pair_fails_without_witness() {
        let mut g = MixedGraph::with_nodes(["X", "Y"]).unwrap();
        g.add_edge("X", "Y", Circle, Circle).unwrap();
        let p = Pag::from_marks(g).unwrap();
        let r = idp(&p, &set(&["X"]), &set(&["Y"])).unwrap();
        let f = r.fail().unwrap();
        assert_eq!(f.stuck, set(&["X"]));
        assert!(f.witness.is_none());
    }

    #[test]
    fn blocked_bucket_names_possible_child() {
        let mut g = MixedGraph::with_nodes(["V1", "V2", "X", "V3", "V4"]).unwrap();
        g.add_edge("V1", "X", Circle, Arrow).unwrap();
        g.add_edge("V2", "X", Circle, Arrow).unwrap();
        g.add_edge("X", "V3", Tail, Arrow).unwrap();
        g.add_edge("X", "V4", Tail, Arrow).unwrap();
        g.add_edge("V3", "V4", Circle, Circle).unwrap();
        let p = Pag::from_marks(g).unwrap();
        match bucket_identifiable(p.graph(), &set(&["V2"])).unwrap() {
            BucketVerdict::Blocked(w) => assert_eq!((w.node.as_str(), w.child.as_str()), ("V2", "X")),
            BucketVerdict::Identifiable => panic!("V2 should be blocked"),
        }
        assert_eq!(bucket_identifiable(p.graph(), &set(&["X"])).unwrap(), BucketVerdict::Identifiable);
        let r = idp(&p, &set(&["X"]), &set(&["V1", "V2", "V3", "V4"])).unwrap();
        assert_eq!(r.expr().map(Expr::to_text).as_deref(), Some("P(v1,v2) * P(v3,v4|v1,v2,x)"));
    }
}
