//! Ground truth by brute force: discrete SCMs with exact joint and
//! post-intervention tables, Markov equivalence classes of MAGs, the PAG
//! of a class, and seeded random diagrams and models.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bits::Bits;
use crate::expr::{evaluate, Assignment, Expr, JointTable, Tables, VarSet};
use crate::graph::mag::{ancestral_violation, maximality_violation};
use crate::graph::separation::m_connected_ix;
use crate::graph::{EdgeMark, LatentDag, Mag, MixedGraph, NodeSet, Pag};
use crate::{Error, Result};

/// Largest number of joint states, latents included, summed over exactly.
pub const MAX_STATES: usize = 1 << 20;

/// Largest skeleton whose mark assignments are enumerated.
pub const MAX_CLASS_EDGES: usize = 12;

/// Floor applied to sampled CPT entries before renormalizing.
pub const CPT_FLOOR: f64 = 1e-6;

/// Discrete structural causal model over a diagram, latents included.
///
/// The CPT of node `v` has one row per configuration of its parents (in
/// node order, first parent varying fastest) and `card(v)` entries per row.
#[derive(Clone, Debug, PartialEq)]
pub struct Scm {
    dag: LatentDag,
    cards: Vec<usize>,
    cpts: Vec<Vec<f64>>,
}

impl Scm {
    pub fn new(dag: LatentDag, cards: Vec<usize>, cpts: Vec<Vec<f64>>) -> Result<Scm> {
        let g = dag.graph();
        let n = g.node_count();
        if cards.len() != n || cpts.len() != n || cards.contains(&0) {
            return Err(Error::Invalid("one positive cardinality and one CPT per node required".into()));
        }
        for v in 0..n {
            let rows: usize = g.parents_ix(v).iter().map(|p| cards[p]).product();
            let cpt = &cpts[v];
            if cpt.len() != rows * cards[v] {
                return Err(Error::Invalid(format!(
                    "CPT of `{}` has {} entries, expected {}",
                    g.name(v),
                    cpt.len(),
                    rows * cards[v]
                )));
            }
            for row in cpt.chunks(cards[v]) {
                let total: f64 = row.iter().sum();
                if row.iter().any(|p| !(*p >= 0.0)) || (total - 1.0).abs() > 1e-12 {
                    return Err(Error::Invalid(format!("CPT row of `{}` is not a distribution", g.name(v))));
                }
            }
        }
        Ok(Scm { dag, cards, cpts })
    }

    pub fn dag(&self) -> &LatentDag {
        &self.dag
    }

    pub fn card(&self, node: &str) -> Option<usize> {
        self.dag.graph().index_of(node).map(|i| self.cards[i])
    }

    pub fn cpt(&self, node: &str) -> Option<&[f64]> {
        self.dag.graph().index_of(node).map(|i| self.cpts[i].as_slice())
    }

    fn factor(&self, v: usize, vals: &[usize]) -> f64 {
        let g = self.dag.graph();
        let mut row = 0;
        let mut stride = 1;
        for p in g.parents_ix(v).iter() {
            row += vals[p] * stride;
            stride *= self.cards[p];
        }
        self.cpts[v][row * self.cards[v] + vals[v]]
    }

    // Visits every joint state with `clamp` fixed, weighted by the product
    // of the CPTs of the unclamped nodes.
    fn states(&self, clamp: &[(usize, usize)], f: &mut dyn FnMut(&[usize], f64)) -> Result<()> {
        let g = self.dag.graph();
        let fixed: Bits = clamp.iter().map(|&(v, _)| v).collect();
        let size = (g.all() - fixed).iter().try_fold(1usize, |acc, v| acc.checked_mul(self.cards[v]));
        match size {
            Some(s) if s <= MAX_STATES => {}
            _ => return Err(Error::SizeGuard(format!("more than {MAX_STATES} joint states"))),
        }
        let order = g.topological_order_in(g.all()).unwrap_or_default();
        let mut vals = alloc::vec![0usize; g.node_count()];
        for &(v, x) in clamp {
            vals[v] = x;
        }
        fn go(s: &Scm, order: &[usize], fixed: Bits, vals: &mut Vec<usize>, w: f64, f: &mut dyn FnMut(&[usize], f64)) {
            let Some((&v, rest)) = order.split_first() else {
                f(vals, w);
                return;
            };
            if fixed.contains(v) {
                return go(s, rest, fixed, vals, w, f);
            }
            for x in 0..s.cards[v] {
                vals[v] = x;
                let p = s.factor(v, vals);
                if p > 0.0 {
                    go(s, rest, fixed, vals, w * p, f);
                }
            }
        }
        go(self, &order, fixed, &mut vals, 1.0, f);
        Ok(())
    }

    fn table_over(&self, nodes: &[usize], clamp: &[(usize, usize)]) -> Result<JointTable> {
        let g = self.dag.graph();
        let cards: Vec<usize> = nodes.iter().map(|&v| self.cards[v]).collect();
        let mut probs = alloc::vec![0.0; cards.iter().product()];
        self.states(clamp, &mut |vals, w| {
            let mut idx = 0;
            let mut stride = 1;
            for (&v, &c) in nodes.iter().zip(&cards) {
                idx += vals[v] * stride;
                stride *= c;
            }
            probs[idx] += w;
        })?;
        JointTable::new(nodes.iter().map(|&v| String::from(g.name(v))).collect(), cards, probs)
    }
}

/// Observational distribution over the observed nodes, in node order.
pub fn joint(s: &Scm) -> Result<JointTable> {
    let obs: Vec<usize> = s.dag.observed_bits().iter().collect();
    s.table_over(&obs, &[])
}

fn clamp_of(s: &Scm, x: &Assignment) -> Result<Vec<(usize, usize)>> {
    let g = s.dag.graph();
    let mut out = Vec::new();
    for (name, &val) in x {
        let v = g.require(name)?;
        if s.dag.latent_bits().contains(v) {
            return Err(Error::Precondition(format!("cannot intervene on latent `{name}`")));
        }
        if val >= s.cards[v] {
            return Err(Error::Eval(format!("value {val} out of range for `{name}`")));
        }
        out.push((v, val));
    }
    Ok(out)
}

/// `P_x` over the observed nodes outside `x`.
pub fn truncated(s: &Scm, x: &Assignment) -> Result<JointTable> {
    let clamp = clamp_of(s, x)?;
    let fixed: Bits = clamp.iter().map(|&(v, _)| v).collect();
    let rest: Vec<usize> = (s.dag.observed_bits() - fixed).iter().collect();
    s.table_over(&rest, &clamp)
}

/// Table over every observed node whose slice at each value of `x` is
/// `P_x` of the remaining nodes; the layout [`evaluate`] expects.
pub fn interventional_table(s: &Scm, x: &NodeSet) -> Result<JointTable> {
    let g = s.dag.graph();
    let xb = g.set_of(x)?;
    let obs: Vec<usize> = s.dag.observed_bits().iter().collect();
    let cards: Vec<usize> = obs.iter().map(|&v| s.cards[v]).collect();
    let mut probs = alloc::vec![0.0; cards.iter().product()];
    let xs: Vec<usize> = xb.iter().collect();
    let combos: usize = xs.iter().map(|&v| s.cards[v]).product();
    for mut k in 0..combos {
        let clamp: Vec<(usize, usize)> = xs
            .iter()
            .map(|&v| {
                let val = k % s.cards[v];
                k /= s.cards[v];
                (v, val)
            })
            .collect();
        s.states(&clamp, &mut |vals, w| {
            let mut idx = 0;
            let mut stride = 1;
            for (&v, &c) in obs.iter().zip(&cards) {
                idx += vals[v] * stride;
                stride *= c;
            }
            probs[idx] += w;
        })?;
    }
    JointTable::new(obs.iter().map(|&v| String::from(g.name(v))).collect(), cards, probs)
}

/// Largest deviation of `e`, evaluated on the observational joint of `s`,
/// from the true `P_x(y)` over every value of `x`, `y` and any further free
/// variable of `e`.
pub fn max_error(e: &Expr, s: &Scm, x: &NodeSet, y: &NodeSet) -> Result<f64> {
    let truth = interventional_table(s, x)?;
    let tables: Tables = [(VarSet::new(), joint(s)?)].into_iter().collect();
    let xy: VarSet = x.iter().chain(y.iter()).map(String::from).collect();
    let mut names: Vec<String> = xy.iter().cloned().collect();
    names.extend(e.free_vars().into_iter().filter(|v| !xy.contains(v)));
    let cards: Vec<usize> =
        names.iter().map(|n| s.card(n).ok_or_else(|| Error::UnknownNode(n.clone()))).collect::<Result<_>>()?;
    let mut worst: f64 = 0.0;
    for mut k in 0..cards.iter().product::<usize>() {
        let mut a = Assignment::new();
        for (n, &c) in names.iter().zip(&cards) {
            a.insert(n.clone(), k % c);
            k /= c;
        }
        let want = truth.mass(&xy, &a)?;
        let got = evaluate(e, &tables, &a)?;
        worst = worst.max((want - got).abs());
    }
    Ok(worst)
}

/// Directed edges kept; each bidirected edge becomes a latent parent of
/// its two endpoints.
pub fn canonical_dag_of_mag(m: &Mag) -> LatentDag {
    let g = m.graph();
    let mut directed = Vec::new();
    let mut bidirected = Vec::new();
    for e in g.edges() {
        match (e.mark_a, e.mark_b) {
            (EdgeMark::Tail, EdgeMark::Arrow) => directed.push((e.a, e.b)),
            (EdgeMark::Arrow, EdgeMark::Tail) => directed.push((e.b, e.a)),
            _ => bidirected.push((e.a, e.b)),
        }
    }
    match LatentDag::new(g.names(), &directed, &bidirected) {
        Ok(d) => d,
        Err(_) => unreachable!("an ancestral graph has no directed cycle"),
    }
}

// Separation bit for every pair a < b and every conditioning set drawn from
// the remaining nodes.
fn separation_model(g: &MixedGraph) -> Vec<bool> {
    let n = g.node_count();
    let all = g.all();
    let mut out = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            let rest = all - Bits::single(a) - Bits::single(b);
            let mut sub = rest.0;
            loop {
                out.push(!m_connected_ix(g, Bits::single(a), Bits::single(b), Bits(sub)));
                if sub == 0 {
                    break;
                }
                sub = (sub - 1) & rest.0;
            }
        }
    }
    out
}

/// Every MAG over the skeleton of `m` with the same m-separation model.
pub fn equivalence_class(m: &Mag) -> Result<Vec<Mag>> {
    let g = m.graph();
    let edges: Vec<(usize, usize)> =
        g.edges().iter().map(|e| (g.index_of(&e.a).unwrap_or(0), g.index_of(&e.b).unwrap_or(0))).collect();
    if edges.len() > MAX_CLASS_EDGES {
        return Err(Error::SizeGuard(format!("{} edges exceed the class limit of {MAX_CLASS_EDGES}", edges.len())));
    }
    let edge_at = |a: usize, b: usize| edges.iter().position(|&(x, y)| (x, y) == (a, b) || (x, y) == (b, a));
    // Unshielded triples a – b – c with the collider status they must keep,
    // filed under the later of their two edges.
    let mut checks: Vec<Vec<(usize, usize, usize, bool)>> = alloc::vec![Vec::new(); edges.len()];
    for b in 0..g.node_count() {
        let nb: Vec<usize> = g.neighbors(b).iter().collect();
        for (i, &a) in nb.iter().enumerate() {
            for &c in &nb[i + 1..] {
                if g.mark_ix(a, c).is_some() {
                    continue;
                }
                let (Some(ea), Some(ec)) = (edge_at(a, b), edge_at(b, c)) else { continue };
                checks[ea.max(ec)].push((a, b, c, g.into_ix(a, b) && g.into_ix(c, b)));
            }
        }
    }
    let reference = separation_model(g);
    let mut cand = MixedGraph::with_nodes(g.names().iter().cloned())?;
    let mut out = Vec::new();
    const KINDS: [(EdgeMark, EdgeMark); 3] =
        [(EdgeMark::Tail, EdgeMark::Arrow), (EdgeMark::Arrow, EdgeMark::Tail), (EdgeMark::Arrow, EdgeMark::Arrow)];
    fn go(
        k: usize,
        edges: &[(usize, usize)],
        checks: &[Vec<(usize, usize, usize, bool)>],
        cand: &mut MixedGraph,
        reference: &[bool],
        out: &mut Vec<Mag>,
    ) {
        if k == edges.len() {
            if ancestral_violation(cand).is_none()
                && maximality_violation(cand).is_none()
                && separation_model(cand) == reference
            {
                out.push(Mag::new_unchecked(cand.clone()));
            }
            return;
        }
        let (a, b) = edges[k];
        for (ma, mb) in KINDS {
            cand.set_edge_ix(a, b, ma, mb);
            let ok = checks[k].iter().all(|&(x, y, z, col)| (cand.into_ix(x, y) && cand.into_ix(z, y)) == col);
            if ok {
                go(k + 1, edges, checks, cand, reference, out);
            }
        }
    }
    go(0, &edges, &checks, &mut cand, &reference, &mut out);
    Ok(out)
}

/// Marks shared by every member, circles elsewhere; visibility recomputed.
pub fn pag_of_class(class: &[Mag]) -> Result<Pag> {
    let first = class.first().ok_or_else(|| Error::Precondition("empty class".into()))?.graph();
    let n = first.node_count();
    let mut g = MixedGraph::with_nodes(first.names().iter().cloned())?;
    for m in class {
        let h = m.graph();
        let same = h.names() == first.names()
            && (0..n).all(|i| (0..n).all(|j| h.mark_ix(i, j).is_some() == first.mark_ix(i, j).is_some()));
        if !same {
            return Err(Error::Precondition("class members differ in skeleton".into()));
        }
    }
    for i in 0..n {
        for j in i + 1..n {
            if first.mark_ix(i, j).is_none() {
                continue;
            }
            let agree = |at: usize, other: usize| {
                let m0 = first.mark_ix(at, other);
                if class.iter().all(|m| m.graph().mark_ix(at, other) == m0) {
                    m0.unwrap_or(EdgeMark::Circle)
                } else {
                    EdgeMark::Circle
                }
            };
            g.set_edge_ix(i, j, agree(i, j), agree(j, i));
        }
    }
    Pag::from_marks(g)
}

/// Seeded random diagram on observed `V1..Vn`: each forward pair of a random
/// causal order gets a directed edge, and each latent slot a random
/// confounded pair, with probability `edge_prob`.
pub fn random_latent_dag(seed: u64, n_obs: usize, n_latent: usize, edge_prob: f64) -> Result<LatentDag> {
    if n_obs == 0 || n_obs > 6 || n_latent > 3 || !(0.0..=1.0).contains(&edge_prob) {
        return Err(Error::Precondition("need 1 ≤ n_obs ≤ 6, n_latent ≤ 3 and edge_prob in [0, 1]".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let names: Vec<String> = (1..=n_obs).map(|i| format!("V{i}")).collect();
    let mut rank: Vec<usize> = (0..n_obs).collect();
    rank.shuffle(&mut rng);
    let mut directed = Vec::new();
    for i in 0..n_obs {
        for j in i + 1..n_obs {
            if rng.random_bool(edge_prob) {
                directed.push((names[rank[i]].clone(), names[rank[j]].clone()));
            }
        }
    }
    let mut bidirected: Vec<(String, String)> = Vec::new();
    if n_obs >= 2 {
        for _ in 0..n_latent {
            if !rng.random_bool(edge_prob) {
                continue;
            }
            let a = rng.random_range(0..n_obs);
            let b = (a + 1 + rng.random_range(0..n_obs - 1)) % n_obs;
            let pair = (names[a.min(b)].clone(), names[a.max(b)].clone());
            if !bidirected.contains(&pair) {
                bidirected.push(pair);
            }
        }
    }
    LatentDag::new(&names, &directed, &bidirected)
}

/// Binary SCM over `d` with Dirichlet(1, …, 1) CPT rows.
pub fn random_scm(seed: u64, d: &LatentDag) -> Scm {
    let cards = alloc::vec![2; d.graph().node_count()];
    match random_scm_with(seed, d, cards) {
        Ok(s) => s,
        Err(_) => unreachable!("sampled rows are normalized"),
    }
}

/// SCM over `d` with the given cardinalities and Dirichlet(1, …, 1) rows
/// floored at [`CPT_FLOOR`].
pub fn random_scm_with(seed: u64, d: &LatentDag, cards: Vec<usize>) -> Result<Scm> {
    let g = d.graph();
    if cards.len() != g.node_count() || cards.contains(&0) {
        return Err(Error::Invalid("one positive cardinality per node required".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cpts = Vec::with_capacity(g.node_count());
    for v in 0..g.node_count() {
        let rows: usize = g.parents_ix(v).iter().map(|p| cards[p]).product();
        let mut cpt = Vec::with_capacity(rows * cards[v]);
        for _ in 0..rows {
            cpt.extend(dirichlet_row(&mut rng, cards[v]));
        }
        cpts.push(cpt);
    }
    Scm::new(d.clone(), cards, cpts)
}

// Uniform spacings give a flat Dirichlet sample.
fn dirichlet_row(rng: &mut ChaCha8Rng, k: usize) -> Vec<f64> {
    let mut cuts: Vec<f64> = (0..k - 1).map(|_| rng.random::<f64>()).collect();
    cuts.sort_by(f64::total_cmp);
    cuts.insert(0, 0.0);
    cuts.push(1.0);
    let row: Vec<f64> = cuts.windows(2).map(|w| (w[1] - w[0]).max(CPT_FLOOR)).collect();
    let total: f64 = row.iter().sum();
    row.into_iter().map(|p| p / total).collect()
}

/// Observed cardinalities of `s`, by name.
pub fn cardinalities(s: &Scm) -> BTreeMap<String, usize> {
    let g = s.dag.graph();
    s.dag.observed_bits().iter().map(|v| (String::from(g.name(v)), s.cards[v])).collect()
}
