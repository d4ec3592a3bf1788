//! Identification of `P_x(y)` from a causal diagram with latent confounders.
//!
//! `Identify(C, T, Q[T])` repeatedly removes one node of `T \ C` that shares
//! no c-component with any of its children in the subdiagram over `T`. The
//! outcome types here are shared with the PAG algorithm.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::bits::Bits;
use crate::expr::{drop_conditioning, simplify, simplify_certified, Expr, Independence, VarSet};
use crate::graph::separation::m_separated;
use crate::graph::{LatentDag, MixedGraph, NodeSet};
use crate::{Error, Result};

/// A node that cannot be removed: `child` is a (possible) child of `node`
/// inside `component`, the node's (p)c-component in the current subgraph.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Witness {
    pub node: String,
    pub child: String,
    pub component: NodeSet,
}

/// `Q[c]` could not be obtained from `Q[t]`: nothing in `stuck = t \ c` is
/// removable.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Fail {
    pub c: NodeSet,
    pub t: NodeSet,
    pub stuck: NodeSet,
    pub witness: Option<Witness>,
}

impl fmt::Display for Fail {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "cannot reduce Q[{}] to Q[{}]; stuck on {}", self.t, self.c, self.stuck)?;
        if let Some(w) = &self.witness {
            write!(f, "; {} has possible child {} in its component {}", w.node, w.child, w.component)?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Identification {
    Identified { expression: Expr },
    NotIdentified { fail: Fail },
}

impl Identification {
    pub fn expr(&self) -> Option<&Expr> {
        match self {
            Identification::Identified { expression } => Some(expression),
            Identification::NotIdentified { .. } => None,
        }
    }

    pub fn fail(&self) -> Option<&Fail> {
        match self {
            Identification::Identified { .. } => None,
            Identification::NotIdentified { fail } => Some(fail),
        }
    }

    pub fn is_identified(&self) -> bool {
        self.expr().is_some()
    }
}

/// One removal inside `Identify`: `q` is `Q[t \ removed]`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Step {
    pub c: NodeSet,
    pub t: NodeSet,
    pub removed: NodeSet,
    pub q: Expr,
}

/// Full record of an identification run.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Run {
    pub outcome: Identification,
    /// Observed ancestors of the outcome once treatments are removed.
    pub d: NodeSet,
    pub components: Vec<NodeSet>,
    pub steps: Vec<Step>,
}

/// Order in which removal candidates are tried.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum CandidateOrder {
    /// Latest in the (partial) topological order first.
    #[default]
    Reverse,
    /// Uniformly shuffled at every step from the given seed.
    Shuffled(u64),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct IdOptions {
    pub order: CandidateOrder,
}

pub(crate) struct Candidates(Option<ChaCha8Rng>);

impl Candidates {
    pub(crate) fn new(order: CandidateOrder) -> Self {
        match order {
            CandidateOrder::Reverse => Candidates(None),
            CandidateOrder::Shuffled(seed) => Candidates(Some(ChaCha8Rng::seed_from_u64(seed))),
        }
    }

    pub(crate) fn arrange<T>(&mut self, items: &mut [T]) {
        if let Some(rng) = &mut self.0 {
            items.shuffle(rng);
        }
    }
}

/// d-separation in the full diagram, latents included.
pub struct DagSeparation<'a>(pub &'a LatentDag);

impl Independence for DagSeparation<'_> {
    fn independent(&self, a: &VarSet, b: &VarSet, given: &VarSet) -> bool {
        let ns = |s: &VarSet| s.iter().map(String::as_str).collect::<NodeSet>();
        m_separated(self.0.graph(), &ns(a), &ns(b), &ns(given)).unwrap_or(false)
    }
}

pub(crate) fn var_set(g: &MixedGraph, b: Bits) -> VarSet {
    b.iter().map(|i| String::from(g.name(i))).collect()
}

/// c-components of the subdiagram over all observed nodes.
pub fn c_components(d: &LatentDag) -> Vec<NodeSet> {
    c_components_in(d, d.observed_bits()).into_iter().map(|c| d.graph().node_set(c)).collect()
}

pub(crate) fn c_components_in(d: &LatentDag, t: Bits) -> Vec<Bits> {
    let g = d.graph();
    let mut comps: Vec<Bits> = t.iter().map(Bits::single).collect();
    for l in d.latent_bits().iter() {
        let ch = g.children_ix(l);
        if !ch.is_subset(t) {
            continue;
        }
        let (hit, mut rest): (Vec<Bits>, Vec<Bits>) = comps.into_iter().partition(|c| c.intersects(ch));
        rest.push(hit.into_iter().fold(Bits::EMPTY, |a, b| a | b));
        comps = rest;
    }
    comps.sort_by_key(|c| c.first());
    comps
}

fn component_of(comps: &[Bits], v: usize) -> Bits {
    comps.iter().copied().find(|c| c.contains(v)).unwrap_or(Bits::single(v))
}

fn observed_set(d: &LatentDag, s: &NodeSet) -> Result<Bits> {
    let b = d.graph().set_of(s)?;
    if b.intersects(d.latent_bits()) {
        return Err(Error::Precondition(format!("{s} contains latent nodes")));
    }
    Ok(b)
}

/// `Q[t \ x]` from `q = Q[t]` when `x` is a descendant set in the subdiagram
/// over its composite c-component.
pub fn q_reduce(d: &LatentDag, t: &NodeSet, x: &NodeSet, q: &Expr) -> Result<Expr> {
    let (tb, xb) = (observed_set(d, t)?, observed_set(d, x)?);
    if !xb.is_subset(tb) || xb == tb || xb.is_empty() {
        return Err(Error::Precondition(format!("{x} must be a nonempty proper subset of {t}")));
    }
    let g = d.graph();
    let comps = c_components_in(d, tb);
    let s = comps.iter().filter(|c| c.intersects(xb)).fold(Bits::EMPTY, |a, &c| a | c);
    for v in xb.iter() {
        if let Some(c) = (g.children_ix(v) & s & tb).iter().find(|c| !xb.contains(*c)) {
            return Err(Error::Precondition(format!("{} has child {} in its c-component", g.name(v), g.name(c))));
        }
    }
    let order = g.topological_order_in(tb).unwrap_or_default();
    Ok(simplify(&reduction(g, tb, xb, s, q, &order)))
}

// q / Q[s] · Σ_x Q[s], with Q[s] factorized along `order` over `t`.
pub(crate) fn reduction(g: &MixedGraph, t: Bits, x: Bits, s: Bits, q: &Expr, order: &[usize]) -> Expr {
    let blocks: Vec<Bits> = order.iter().map(|&v| Bits::single(v)).collect();
    reduction_blocks(g, t, x, s, q, &blocks)
}

pub(crate) fn reduction_blocks(g: &MixedGraph, t: Bits, x: Bits, s: Bits, q: &Expr, blocks: &[Bits]) -> Expr {
    let domain = var_set(g, t);
    let mut prefix = Bits::EMPTY;
    let mut factors = Vec::new();
    for &b in blocks {
        if b.is_subset(s) {
            factors.push(Expr::cond_within(var_set(g, b), var_set(g, prefix), domain.clone(), q.clone()));
        }
        prefix = prefix | b;
    }
    let qs = Expr::product(factors);
    Expr::product(alloc::vec![Expr::quotient(q.clone(), qs.clone()), Expr::sum(var_set(g, x), qs)])
}

/// Nodes of `t \ c` removable from `Q[t]`: none of their children in the
/// subdiagram over `t` shares their c-component.
pub fn extractable(d: &LatentDag, t: &NodeSet, c: &NodeSet) -> Result<NodeSet> {
    let (tb, cb) = (observed_set(d, t)?, observed_set(d, c)?);
    let comps = c_components_in(d, tb);
    let g = d.graph();
    let out: Bits =
        (tb - cb).iter().filter(|&b| (g.children_ix(b) & tb & component_of(&comps, b)).is_empty()).collect();
    Ok(g.node_set(out))
}

pub fn id_dag(d: &LatentDag, x: &NodeSet, y: &NodeSet) -> Result<Identification> {
    Ok(id_dag_with(d, x, y, &IdOptions::default())?.outcome)
}

pub fn id_dag_with(d: &LatentDag, x: &NodeSet, y: &NodeSet, opts: &IdOptions) -> Result<Run> {
    let (xb, yb) = (observed_set(d, x)?, observed_set(d, y)?);
    check_query(xb, yb)?;
    let g = d.graph();
    let obs = d.observed_bits();
    let dset = g.ancestors_in(obs - xb, yb);
    let comps = c_components_in(d, dset);
    let oracle = DagSeparation(d);
    let mut cands = Candidates::new(opts.order);
    let mut steps = Vec::new();
    let mut qs = Vec::new();
    let p = Expr::dist(var_set(g, obs));
    for &c in &comps {
        match identify(d, c, obs, p.clone(), &mut cands, &mut steps, &oracle) {
            Ok(q) => qs.push(q),
            Err(fail) => {
                return Ok(Run {
                    outcome: Identification::NotIdentified { fail },
                    d: g.node_set(dset),
                    components: comps.iter().map(|&c| g.node_set(c)).collect(),
                    steps,
                })
            }
        }
    }
    let expression = finish(var_set(g, dset - yb), qs, &var_set(g, xb | yb), &oracle);
    Ok(Run {
        outcome: Identification::Identified { expression },
        d: g.node_set(dset),
        components: comps.iter().map(|&c| g.node_set(c)).collect(),
        steps,
    })
}

pub(crate) fn check_query(x: Bits, y: Bits) -> Result<()> {
    if x.is_empty() || y.is_empty() {
        return Err(Error::Precondition("treatment and outcome sets must be nonempty".into()));
    }
    if x.intersects(y) {
        return Err(Error::Precondition("treatment and outcome sets overlap".into()));
    }
    Ok(())
}

/// `Σ_{d\y} Π q_i`, then certified removal of conditioning variables outside
/// `x ∪ y`.
pub(crate) fn finish(sum_vars: VarSet, qs: Vec<Expr>, xy: &VarSet, oracle: &dyn Independence) -> Expr {
    let e = simplify_certified(&Expr::sum(sum_vars, Expr::product(qs)), oracle);
    let extra: VarSet = e.free_vars().difference(xy).cloned().collect();
    drop_conditioning(&e, &extra, oracle)
}

fn identify(
    d: &LatentDag,
    c: Bits,
    mut t: Bits,
    mut q: Expr,
    cands: &mut Candidates,
    steps: &mut Vec<Step>,
    oracle: &dyn Independence,
) -> core::result::Result<Expr, Fail> {
    let g = d.graph();
    while c != t {
        let order = g.topological_order_in(t).unwrap_or_default();
        let comps = c_components_in(d, t);
        let mut scan: Vec<usize> = order.iter().rev().copied().filter(|v| !c.contains(*v)).collect();
        cands.arrange(&mut scan);
        let blocked = |b: usize| g.children_ix(b) & t & component_of(&comps, b);
        let Some(b) = scan.iter().copied().find(|&b| blocked(b).is_empty()) else {
            let witness = scan.iter().copied().find_map(|b| {
                blocked(b).first().map(|ch| Witness {
                    node: String::from(g.name(b)),
                    child: String::from(g.name(ch)),
                    component: g.node_set(component_of(&comps, b)),
                })
            });
            return Err(Fail { c: g.node_set(c), t: g.node_set(t), stuck: g.node_set(t - c), witness });
        };
        let x = Bits::single(b);
        let s = component_of(&comps, b);
        q = simplify_certified(&reduction(g, t, x, s, &q, &order), oracle);
        steps.push(Step { c: g.node_set(c), t: g.node_set(t), removed: g.node_set(x), q: q.clone() });
        t = t - x;
    }
    Ok(q)
}
