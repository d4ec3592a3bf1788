//! Normal form: a product of marginal atoms `M_base(S)` and irreducible sums,
//! each raised to a nonzero integer power.

use alloc::boxed::Box;
use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use super::{Expr, Independence, VarSet};

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub(crate) struct Base {
    pub scope: VarSet,
    pub intervened: VarSet,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub(crate) enum Atom {
    /// Marginal of `base` over nonempty `vars ⊆ base.scope`.
    Marg { base: Base, vars: VarSet },
    /// Sum over `vars` of `body`; no variable can be eliminated. An empty
    /// body counts the joint states of `vars`.
    Sum { vars: VarSet, body: Term },
}

#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord)]
pub(crate) struct Term(pub BTreeMap<Atom, i32>);

impl Atom {
    /// Whether the atom's value depends on `v`, as a marginal variable or
    /// as an intervention value.
    fn mentions(&self, v: &str) -> bool {
        match self {
            Atom::Marg { base, vars } => vars.contains(v) || base.intervened.contains(v),
            Atom::Sum { vars, body } => !vars.contains(v) && body.0.keys().any(|a| a.mentions(v)),
        }
    }
}

impl Term {
    fn mul_atom(&mut self, atom: Atom, e: i32) {
        let trivial = match &atom {
            Atom::Marg { vars, .. } => vars.is_empty(),
            Atom::Sum { vars, .. } => vars.is_empty(),
        };
        if trivial || e == 0 {
            return;
        }
        let slot = self.0.entry(atom.clone()).or_insert(0);
        *slot += e;
        if *slot == 0 {
            self.0.remove(&atom);
        }
    }

    fn mul(&mut self, other: &Term, e: i32) {
        for (a, k) in &other.0 {
            self.mul_atom(a.clone(), k * e);
        }
    }
}

fn marg(base: &Base, vars: VarSet) -> Atom {
    Atom::Marg { base: base.clone(), vars }
}

pub(crate) fn normalize(e: &Expr, cert: Option<&dyn Independence>) -> Term {
    let mut t = Term::default();
    match e {
        Expr::Dist { scope, intervened } => {
            let base = Base { scope: scope.clone(), intervened: intervened.clone() };
            t.mul_atom(marg(&base, scope.clone()), 1);
        }
        Expr::Conditional { target, given, domain, base } => {
            let q = normalize(base, cert);
            let keep: VarSet = target.union(given).cloned().collect();
            let num = sum_term(domain.difference(&keep).cloned().collect(), q.clone(), cert);
            let den = sum_term(domain.difference(given).cloned().collect(), q, cert);
            t.mul(&num, 1);
            t.mul(&den, -1);
        }
        Expr::Product { factors } => {
            for f in factors {
                t.mul(&normalize(f, cert), 1);
            }
        }
        Expr::Quotient { num, den } => {
            t.mul(&normalize(num, cert), 1);
            t.mul(&normalize(den, cert), -1);
        }
        Expr::SumOver { vars, body } => {
            t = sum_term(vars.clone(), normalize(body, cert), cert);
        }
    }
    t
}

fn eliminable(a: &Atom, v: &str) -> bool {
    match a {
        Atom::Marg { base, vars } => vars.contains(v) && !base.intervened.contains(v),
        Atom::Sum { .. } => true,
    }
}

/// Normal form of `Σ_vars t`.
pub(crate) fn sum_term(mut vars: VarSet, mut t: Term, cert: Option<&dyn Independence>) -> Term {
    let mut counted = VarSet::new();
    loop {
        let mut progress = false;
        for v in vars.clone() {
            let holders: Vec<(&Atom, i32)> = t.0.iter().filter(|(a, _)| a.mentions(&v)).map(|(a, &k)| (a, k)).collect();
            match holders.as_slice() {
                [] => {
                    counted.insert(v.clone());
                }
                [(a, 1)] if eliminable(a, &v) => {
                    let a = (*a).clone();
                    t.0.remove(&a);
                    match a {
                        Atom::Marg { base, vars: mut s } => {
                            s.remove(&v);
                            t.mul_atom(Atom::Marg { base, vars: s }, 1);
                        }
                        Atom::Sum { vars: mut s, body } => {
                            s.insert(v.clone());
                            let r = sum_term(s, body, cert);
                            t.mul(&r, 1);
                        }
                    }
                }
                _ => continue,
            }
            vars.remove(&v);
            progress = true;
        }
        if !progress {
            if let Some(c) = cert {
                progress = dangling_drop(&mut t, &vars, c);
            }
        }
        if !progress {
            break;
        }
    }
    let mut out = Term::default();
    let groups = group_by_vars(&t, &vars);
    for (gv, atoms) in groups {
        let mut body = Term::default();
        for (a, k) in atoms {
            t.0.remove(&a);
            body.mul_atom(a, k);
        }
        out.mul_atom(Atom::Sum { vars: gv, body }, 1);
    }
    out.mul(&t, 1);
    out.mul_atom(Atom::Sum { vars: counted, body: Term::default() }, 1);
    out
}

// Atoms mentioning `vars`, partitioned by shared summed variables.
fn group_by_vars(t: &Term, vars: &VarSet) -> Vec<(VarSet, Vec<(Atom, i32)>)> {
    let mut groups: Vec<(VarSet, Vec<(Atom, i32)>)> = Vec::new();
    for (a, &k) in &t.0 {
        let mine: VarSet = vars.iter().filter(|v| a.mentions(v)).cloned().collect();
        if mine.is_empty() {
            continue;
        }
        let mut merged = (mine, alloc::vec![(a.clone(), k)]);
        let mut rest = Vec::new();
        for g in groups.drain(..) {
            if g.0.is_disjoint(&merged.0) {
                rest.push(g);
            } else {
                merged.0.extend(g.0);
                merged.1.extend(g.1);
            }
        }
        rest.push(merged);
        groups = rest;
    }
    groups.sort();
    groups
}

/// `M(full) / M(given)` over one base.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub(crate) struct Pair {
    pub base: Base,
    pub full: VarSet,
    pub given: VarSet,
}

/// Pairs every negative marginal, largest first, with the smallest unused
/// positive marginal of the same base that strictly contains it.
pub(crate) fn pair_margs<'a>(atoms: impl Iterator<Item = (&'a Atom, i32)>) -> (Vec<Pair>, Vec<(Atom, i32)>) {
    let mut pos: Vec<(Base, VarSet, bool)> = Vec::new();
    let mut neg: Vec<(Base, VarSet)> = Vec::new();
    let mut rest = Vec::new();
    for (a, k) in atoms {
        match a {
            Atom::Marg { base, vars } if k > 0 => {
                pos.extend((0..k).map(|_| (base.clone(), vars.clone(), false)));
            }
            Atom::Marg { base, vars } => {
                neg.extend((0..-k).map(|_| (base.clone(), vars.clone())));
            }
            Atom::Sum { .. } => rest.push((a.clone(), k)),
        }
    }
    neg.sort_by(|a, b| b.1.len().cmp(&a.1.len()).then_with(|| a.1.cmp(&b.1)));
    let mut pairs = Vec::new();
    for (base, given) in neg {
        let pick = pos
            .iter()
            .enumerate()
            .filter(|(_, (b, s, used))| !used && *b == base && given.is_subset(s) && s.len() > given.len())
            .min_by(|x, y| x.1 .1.len().cmp(&y.1 .1.len()).then_with(|| x.1 .1.cmp(&y.1 .1)))
            .map(|(i, _)| i);
        match pick {
            Some(i) => {
                pos[i].2 = true;
                pairs.push(Pair { base, full: pos[i].1.clone(), given });
            }
            None => rest.push((marg(&base, given), -1)),
        }
    }
    for (base, s, used) in pos {
        if !used {
            rest.push((marg(&base, s), 1));
        }
    }
    (pairs, rest)
}

fn apply_drop(t: &mut Term, p: &Pair, b: &str) {
    let mut full = p.full.clone();
    let mut given = p.given.clone();
    t.mul_atom(marg(&p.base, full.clone()), -1);
    t.mul_atom(marg(&p.base, given.clone()), 1);
    full.remove(b);
    given.remove(b);
    t.mul_atom(marg(&p.base, full), 1);
    t.mul_atom(marg(&p.base, given), -1);
}

fn certified(p: &Pair, b: &str, oracle: &dyn Independence) -> bool {
    if !p.base.intervened.is_empty() {
        return false;
    }
    let target: VarSet = p.full.difference(&p.given).cloned().collect();
    let mut rest = p.given.clone();
    rest.remove(b);
    oracle.independent(&target, &super::vars([b]), &rest)
}

// Within each group of atoms under the sum, removes one conditioning
// variable that is not summed, occurs in no other atom of the group, and
// is certified irrelevant.
fn dangling_drop(t: &mut Term, summed: &VarSet, oracle: &dyn Independence) -> bool {
    for (_, atoms) in group_by_vars(t, summed) {
        let (pairs, _) = pair_margs(atoms.iter().map(|(a, k)| (a, *k)));
        for p in &pairs {
            for b in p.given.difference(summed) {
                let uses: i32 = atoms.iter().filter(|(a, _)| a.mentions(b)).map(|(_, k)| k.abs()).sum();
                if uses == 2 && certified(p, b, oracle) {
                    apply_drop(t, p, b);
                    return true;
                }
            }
        }
    }
    false
}

/// Removes certified conditioning variables drawn from `candidates` until
/// none remains removable, descending into sums.
pub(crate) fn drop_in_term(mut t: Term, candidates: &VarSet, oracle: &dyn Independence) -> Term {
    'outer: loop {
        let (pairs, _) = pair_margs(t.0.iter().map(|(a, k)| (a, *k)));
        for p in &pairs {
            for b in p.given.intersection(candidates) {
                if certified(p, b, oracle) {
                    apply_drop(&mut t, p, b);
                    continue 'outer;
                }
            }
        }
        let sums: Vec<(Atom, i32)> =
            t.0.iter().filter(|(a, _)| matches!(a, Atom::Sum { .. })).map(|(a, k)| (a.clone(), *k)).collect();
        for (a, k) in sums {
            let Atom::Sum { vars, body } = &a else { continue };
            let inner: VarSet = candidates.difference(vars).cloned().collect();
            let nb = drop_in_term(body.clone(), &inner, oracle);
            if nb != *body {
                t.0.remove(&a);
                let r = sum_term(vars.clone(), nb, Some(oracle));
                t.mul(&r, k);
                continue 'outer;
            }
        }
        return t;
    }
}

fn dist_of(base: &Base) -> Expr {
    Expr::Dist { scope: base.scope.clone(), intervened: base.intervened.clone() }
}

fn marginal_expr(base: &Base, target: VarSet, given: VarSet) -> Expr {
    if given.is_empty() && target == base.scope {
        return dist_of(base);
    }
    Expr::Conditional { target, given, domain: base.scope.clone(), base: Box::new(dist_of(base)) }
}

fn factor_key(e: &Expr) -> (u8, VarSet, VarSet) {
    match e {
        Expr::Conditional { target, given, .. } => (0, target.clone(), given.clone()),
        Expr::Dist { scope, .. } => (0, scope.clone(), VarSet::new()),
        _ => (1, VarSet::new(), VarSet::new()),
    }
}

fn collect(mut fs: Vec<Expr>) -> Expr {
    fs.sort_by(|a, b| factor_key(a).cmp(&factor_key(b)).then_with(|| a.cmp(b)));
    if fs.len() == 1 {
        fs.pop().unwrap_or_else(Expr::one)
    } else {
        Expr::Product { factors: fs }
    }
}

/// Expression form of a normal term with paired conditionals.
pub(crate) fn render_term(t: &Term) -> Expr {
    let (pairs, rest) = pair_margs(t.0.iter().map(|(a, k)| (a, *k)));
    let mut num = Vec::new();
    let mut den = Vec::new();
    for p in pairs {
        let target = p.full.difference(&p.given).cloned().collect();
        num.push(marginal_expr(&p.base, target, p.given));
    }
    for (a, k) in rest {
        let e = match &a {
            Atom::Marg { base, vars } => marginal_expr(base, vars.clone(), VarSet::new()),
            Atom::Sum { vars, body } => Expr::SumOver { vars: vars.clone(), body: Box::new(render_term(body)) },
        };
        let side = if k > 0 { &mut num } else { &mut den };
        side.extend((0..k.unsigned_abs()).map(|_| e.clone()));
    }
    if den.is_empty() {
        collect(num)
    } else {
        Expr::Quotient { num: Box::new(collect(num)), den: Box::new(collect(den)) }
    }
}
