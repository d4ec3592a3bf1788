//! Generalized adjustment criterion over PAGs, and definite m-separation.

use alloc::string::String;
use alloc::vec::Vec;

use serde::Serialize;

use crate::bits::Bits;
use crate::expr::{Independence, VarSet};
use crate::graph::{EdgeMark, MixedGraph, NodeSet};
use crate::ident_dag::check_query;
use crate::Result;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeStatus {
    DefiniteCollider,
    DefiniteNonCollider,
}

/// Path whose interior nodes all have definite status.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DefiniteStatusPath {
    pub nodes: Vec<String>,
    /// One entry per interior node.
    pub status: Vec<NodeStatus>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "reason", rename_all = "snake_case")]
pub enum GacFail {
    /// A proper possibly directed path leaves `x` through an edge that is
    /// not a visible directed edge.
    NotAmenable { path: Vec<String> },
    /// A proper definite-status non-causal path is open given `set`.
    OpenPath { path: DefiniteStatusPath, set: NodeSet },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Gac {
    Adjust { set: NodeSet },
    Fail { fail: GacFail },
}

/// Status of `u` on `a – u – b`, if definite.
pub(crate) fn status(g: &MixedGraph, a: usize, u: usize, b: usize) -> Option<NodeStatus> {
    let (ma, mb) = (g.mark_ix(u, a)?, g.mark_ix(u, b)?);
    match (ma, mb) {
        (EdgeMark::Arrow, EdgeMark::Arrow) => Some(NodeStatus::DefiniteCollider),
        (EdgeMark::Tail, _) | (_, EdgeMark::Tail) => Some(NodeStatus::DefiniteNonCollider),
        (EdgeMark::Circle, EdgeMark::Circle) if g.mark_ix(a, b).is_none() => Some(NodeStatus::DefiniteNonCollider),
        _ => None,
    }
}

/// Depth-first enumeration of simple paths from `from` to `to` whose
/// interior avoids `from ∪ to` and passes `step(a, u, b)` at every interior
/// `u`; `visit` returns true to stop.
fn paths(
    g: &MixedGraph,
    from: Bits,
    to: Bits,
    step: &dyn Fn(usize, usize, usize) -> bool,
    visit: &mut dyn FnMut(&[usize]) -> bool,
) -> bool {
    fn go(
        g: &MixedGraph,
        path: &mut Vec<usize>,
        used: Bits,
        to: Bits,
        step: &dyn Fn(usize, usize, usize) -> bool,
        visit: &mut dyn FnMut(&[usize]) -> bool,
    ) -> bool {
        let u = path[path.len() - 1];
        for w in (g.neighbors(u) - used).iter() {
            if path.len() >= 2 && !step(path[path.len() - 2], u, w) {
                continue;
            }
            path.push(w);
            let stop = if to.contains(w) { visit(path) } else { go(g, path, used | Bits::single(w), to, step, visit) };
            path.pop();
            if stop {
                return true;
            }
        }
        false
    }
    for s in from.iter() {
        let mut path = alloc::vec![s];
        if go(g, &mut path, from | Bits::single(s), to, step, visit) {
            return true;
        }
    }
    false
}

fn open_step(g: &MixedGraph, z: Bits) -> impl Fn(usize, usize, usize) -> bool + '_ {
    let pan_z = g.possible_ancestors_in(g.all(), z);
    move |a, u, b| match status(g, a, u, b) {
        Some(NodeStatus::DefiniteCollider) => pan_z.contains(u),
        Some(NodeStatus::DefiniteNonCollider) => !z.contains(u),
        None => false,
    }
}

pub(crate) fn definitely_m_separated_ix(g: &MixedGraph, x: Bits, y: Bits, z: Bits) -> bool {
    let step = open_step(g, z);
    !paths(g, x, y - x, &step, &mut |_| true)
}

/// Whether every definite-status path between `x` and `y` is blocked by
/// `z`: a definite non-collider in `z`, or a collider with no possible
/// descendant in `z`. On a MAG this is m-separation.
pub fn definitely_m_separated(g: &MixedGraph, x: &NodeSet, y: &NodeSet, z: &NodeSet) -> Result<bool> {
    Ok(definitely_m_separated_ix(g, g.set_of(x)?, g.set_of(y)?, g.set_of(z)?))
}

/// Definite m-separation in a PAG as an independence certificate.
pub struct PagSeparation<'a>(pub &'a MixedGraph);

impl Independence for PagSeparation<'_> {
    fn independent(&self, a: &VarSet, b: &VarSet, given: &VarSet) -> bool {
        let ns = |s: &VarSet| s.iter().map(String::as_str).collect::<NodeSet>();
        definitely_m_separated(self.0, &ns(a), &ns(b), &ns(given)).unwrap_or(false)
    }
}

fn possibly_directed(g: &MixedGraph, a: usize, b: usize) -> bool {
    !g.into_ix(b, a)
}

// Proper possibly directed paths from x to y.
fn causal_paths(g: &MixedGraph, x: Bits, y: Bits, visit: &mut dyn FnMut(&[usize]) -> bool) -> bool {
    fn go(g: &MixedGraph, path: &mut Vec<usize>, used: Bits, y: Bits, visit: &mut dyn FnMut(&[usize]) -> bool) -> bool {
        let u = path[path.len() - 1];
        for w in (g.neighbors(u) - used).iter() {
            if !possibly_directed(g, u, w) {
                continue;
            }
            path.push(w);
            let stop = if y.contains(w) { visit(path) } else { go(g, path, used | Bits::single(w), y, visit) };
            path.pop();
            if stop {
                return true;
            }
        }
        false
    }
    for s in x.iter() {
        let mut path = alloc::vec![s];
        if go(g, &mut path, x, y - x, visit) {
            return true;
        }
    }
    false
}

pub(crate) fn forbidden_ix(g: &MixedGraph, x: Bits, y: Bits) -> Bits {
    let mut on_paths = Bits::EMPTY;
    causal_paths(g, x, y, &mut |p| {
        on_paths = on_paths | p[1..].iter().copied().collect();
        false
    });
    g.possible_descendants_in(g.all(), on_paths)
}

/// Possible descendants of the non-treatment nodes on proper possibly
/// directed paths from `x` to `y`.
pub fn forbidden_set(g: &MixedGraph, x: &NodeSet, y: &NodeSet) -> Result<NodeSet> {
    let (xb, yb) = (g.set_of(x)?, g.set_of(y)?);
    check_query(xb, yb)?;
    Ok(g.node_set(forbidden_ix(g, xb, yb)))
}

pub(crate) fn adjust_ix(g: &MixedGraph, x: Bits, y: Bits) -> Bits {
    g.possible_ancestors_in(g.all(), x | y) - forbidden_ix(g, x, y) - (x | y)
}

/// `PossAn(x ∪ y) \ (Forb ∪ x ∪ y)`.
pub fn adjust_set(g: &MixedGraph, x: &NodeSet, y: &NodeSet) -> Result<NodeSet> {
    let (xb, yb) = (g.set_of(x)?, g.set_of(y)?);
    check_query(xb, yb)?;
    Ok(g.node_set(adjust_ix(g, xb, yb)))
}

/// The adjustment set if `x`, `y` admit covariate adjustment, else the
/// violated condition.
pub fn gac(g: &MixedGraph, x: &NodeSet, y: &NodeSet) -> Result<Gac> {
    let (xb, yb) = (g.set_of(x)?, g.set_of(y)?);
    check_query(xb, yb)?;
    let names = |p: &[usize]| p.iter().map(|&i| String::from(g.name(i))).collect::<Vec<_>>();

    let mut bad = None;
    causal_paths(g, xb, yb, &mut |p| {
        let ok = g.is_directed_ix(p[0], p[1]) && g.visible_ix(p[0], p[1]);
        if !ok {
            bad = Some(names(p));
        }
        !ok
    });
    if let Some(path) = bad {
        return Ok(Gac::Fail { fail: GacFail::NotAmenable { path } });
    }

    let z = adjust_ix(g, xb, yb);
    let step = open_step(g, z);
    let mut open = None;
    paths(g, xb, yb - xb, &step, &mut |p| {
        let causal = p.windows(2).all(|w| possibly_directed(g, w[0], w[1]));
        if !causal {
            let status = (1..p.len() - 1).filter_map(|k| status(g, p[k - 1], p[k], p[k + 1])).collect();
            open = Some(DefiniteStatusPath { nodes: names(p), status });
        }
        !causal
    });
    Ok(match open {
        Some(path) => Gac::Fail { fail: GacFail::OpenPath { path, set: g.node_set(z) } },
        None => Gac::Adjust { set: g.node_set(z) },
    })
}
