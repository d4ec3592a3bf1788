use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::{Expr, VarSet};
use crate::{Error, Result};

/// Nonnegative table over discrete variables, first variable varying
/// fastest.
#[derive(Clone, Debug, PartialEq)]
pub struct JointTable {
    vars: Vec<String>,
    cards: Vec<usize>,
    probs: Vec<f64>,
}

/// Tables keyed by intervened set. The table for `I` covers every
/// variable; its slice at each assignment of `I` is the post-intervention
/// distribution of the remaining variables.
pub type Tables = BTreeMap<VarSet, JointTable>;

pub type Assignment = BTreeMap<String, usize>;

impl JointTable {
    pub fn new(vars: Vec<String>, cards: Vec<usize>, probs: Vec<f64>) -> Result<Self> {
        if vars.len() != cards.len() || cards.contains(&0) {
            return Err(Error::Eval("one positive cardinality per variable required".into()));
        }
        let size = cards.iter().try_fold(1usize, |acc, &c| acc.checked_mul(c));
        if size != Some(probs.len()) {
            return Err(Error::Eval(format!("expected {:?} entries, got {}", size, probs.len())));
        }
        if probs.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(Error::Eval("entries must be finite and nonnegative".into()));
        }
        Ok(JointTable { vars, cards, probs })
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn cards(&self) -> &[usize] {
        &self.cards
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn card(&self, v: &str) -> Option<usize> {
        self.vars.iter().position(|w| w == v).map(|i| self.cards[i])
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }

    /// Assignment encoded by flat index `i`.
    pub fn decode(&self, mut i: usize) -> Vec<usize> {
        self.cards
            .iter()
            .map(|&c| {
                let v = i % c;
                i /= c;
                v
            })
            .collect()
    }

    /// Total mass of entries agreeing with `a` on `on`.
    pub fn mass(&self, on: &VarSet, a: &Assignment) -> Result<f64> {
        let mut fixed = Vec::new();
        for v in on {
            let pos =
                self.vars.iter().position(|w| w == v).ok_or_else(|| Error::Eval(format!("`{v}` not in table")))?;
            let val = *a.get(v).ok_or_else(|| Error::Eval(format!("`{v}` unassigned")))?;
            if val >= self.cards[pos] {
                return Err(Error::Eval(format!("value {val} out of range for `{v}`")));
            }
            fixed.push((pos, val));
        }
        let mut total = 0.0;
        for (i, p) in self.probs.iter().enumerate() {
            if *p == 0.0 {
                continue;
            }
            let vals = self.decode(i);
            if fixed.iter().all(|&(pos, val)| vals[pos] == val) {
                total += p;
            }
        }
        Ok(total)
    }
}

/// Value of `e` at `a`. Conditionals and quotients with zero denominator
/// evaluate to zero.
pub fn evaluate(e: &Expr, tables: &Tables, a: &Assignment) -> Result<f64> {
    let mut cards = BTreeMap::new();
    for t in tables.values() {
        for (v, &c) in t.vars.iter().zip(&t.cards) {
            cards.insert(v.clone(), c);
        }
    }
    let mut a = a.clone();
    eval(e, tables, &cards, &mut a)
}

fn eval(e: &Expr, tables: &Tables, cards: &BTreeMap<String, usize>, a: &mut Assignment) -> Result<f64> {
    match e {
        Expr::Dist { scope, intervened } => dist_mass(tables, scope, intervened, a),
        Expr::Conditional { target, given, domain, base } => {
            if let Expr::Dist { scope, intervened } = &**base {
                if scope == domain {
                    let num_on: VarSet = target.union(given).cloned().collect();
                    let den = dist_mass(tables, given, intervened, a)?;
                    if den == 0.0 {
                        return Ok(0.0);
                    }
                    return Ok(dist_mass(tables, &num_on, intervened, a)? / den);
                }
            }
            let free: Vec<String> = domain.difference(given).cloned().collect();
            let wanted: Vec<(String, usize)> = target
                .iter()
                .map(|v| a.get(v).map(|&x| (v.clone(), x)).ok_or_else(|| Error::Eval(format!("`{v}` unassigned"))))
                .collect::<Result<_>>()?;
            let (mut num, mut den) = (0.0, 0.0);
            enumerate(&free, cards, a, &mut |a| {
                let f = eval(base, tables, cards, a)?;
                den += f;
                if wanted.iter().all(|(v, x)| a.get(v) == Some(x)) {
                    num += f;
                }
                Ok(())
            })?;
            Ok(if den == 0.0 { 0.0 } else { num / den })
        }
        Expr::Product { factors } => {
            let mut out = 1.0;
            for f in factors {
                out *= eval(f, tables, cards, a)?;
            }
            Ok(out)
        }
        Expr::Quotient { num, den } => {
            let d = eval(den, tables, cards, a)?;
            if d == 0.0 {
                return Ok(0.0);
            }
            Ok(eval(num, tables, cards, a)? / d)
        }
        Expr::SumOver { vars, body } => {
            let vs: Vec<String> = vars.iter().cloned().collect();
            let mut total = 0.0;
            enumerate(&vs, cards, a, &mut |a| {
                total += eval(body, tables, cards, a)?;
                Ok(())
            })?;
            Ok(total)
        }
    }
}

fn dist_mass(tables: &Tables, on: &VarSet, intervened: &VarSet, a: &Assignment) -> Result<f64> {
    let t =
        tables.get(intervened).ok_or_else(|| Error::Eval(format!("no table for intervention on {intervened:?}")))?;
    let all: VarSet = on.union(intervened).cloned().collect();
    t.mass(&all, a)
}

// Calls `f` at every joint value of `vs`, restoring `a` afterwards.
fn enumerate(
    vs: &[String],
    cards: &BTreeMap<String, usize>,
    a: &mut Assignment,
    f: &mut dyn FnMut(&mut Assignment) -> Result<()>,
) -> Result<()> {
    let Some((v, rest)) = vs.split_first() else {
        return f(a);
    };
    let c = *cards.get(v).ok_or_else(|| Error::Eval(format!("unknown cardinality of `{v}`")))?;
    let old = a.get(v).copied();
    for x in 0..c {
        a.insert(v.clone(), x);
        enumerate(rest, cards, a, f)?;
    }
    match old {
        Some(x) => a.insert(v.clone(), x),
        None => a.remove(v),
    };
    Ok(())
}
