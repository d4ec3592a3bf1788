//! Symbolic probability expressions.
//!
//! Expressions are built from (interventional) joint distributions, their
//! conditionals, products, quotients and sums. [`simplify`] rewrites an
//! expression through a normal form of marginal factors with integer
//! exponents; [`simplify_certified`] and [`drop_conditioning`] may also
//! remove conditioning variables whose removal an [`Independence`] oracle
//! certifies.

mod eval;
mod normal;
mod render;

use alloc::boxed::Box;
use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;

use serde::Serialize;

pub use eval::{evaluate, Assignment, JointTable, Tables};
pub use render::{to_latex, to_text};

/// Set of variable names, ordered.
pub type VarSet = BTreeSet<String>;

/// Collects names into a [`VarSet`].
pub fn vars<I, S>(names: I) -> VarSet
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    names.into_iter().map(Into::into).collect()
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Expr {
    /// Joint over `scope` under intervention on `intervened` (empty when
    /// observational).
    Dist {
        scope: VarSet,
        intervened: VarSet,
    },
    /// `base(target | given)`, where `base` is a function over `domain`.
    Conditional {
        target: VarSet,
        given: VarSet,
        domain: VarSet,
        base: Box<Expr>,
    },
    Product {
        factors: Vec<Expr>,
    },
    Quotient {
        num: Box<Expr>,
        den: Box<Expr>,
    },
    #[serde(rename = "sum")]
    SumOver {
        vars: VarSet,
        body: Box<Expr>,
    },
}

impl Expr {
    pub fn one() -> Expr {
        Expr::Product { factors: Vec::new() }
    }

    pub fn dist(scope: VarSet) -> Expr {
        Expr::Dist { scope, intervened: VarSet::new() }
    }

    pub fn interventional(scope: VarSet, intervened: VarSet) -> Expr {
        Expr::Dist { scope, intervened }
    }

    /// `P(target | given)` of a joint; the domain is the joint's scope.
    pub fn cond(target: VarSet, given: VarSet, base: Expr) -> Expr {
        let domain = base.free_vars();
        Expr::Conditional { target, given, domain, base: Box::new(base) }
    }

    /// Conditional of an arbitrary function `base` over `domain`.
    pub fn cond_within(target: VarSet, given: VarSet, domain: VarSet, base: Expr) -> Expr {
        Expr::Conditional { target, given, domain, base: Box::new(base) }
    }

    pub fn product(factors: Vec<Expr>) -> Expr {
        Expr::Product { factors }
    }

    pub fn quotient(num: Expr, den: Expr) -> Expr {
        Expr::Quotient { num: Box::new(num), den: Box::new(den) }
    }

    pub fn sum(vars: VarSet, body: Expr) -> Expr {
        if vars.is_empty() {
            body
        } else {
            Expr::SumOver { vars, body: Box::new(body) }
        }
    }

    /// Variables the value of the expression depends on.
    pub fn free_vars(&self) -> VarSet {
        match self {
            Expr::Dist { scope, .. } => scope.clone(),
            Expr::Conditional { target, given, domain, base } => {
                let mut out: VarSet = target.union(given).cloned().collect();
                out.extend(base.free_vars().difference(domain).cloned());
                out
            }
            Expr::Product { factors } => factors.iter().flat_map(Expr::free_vars).collect(),
            Expr::Quotient { num, den } => {
                let mut out = num.free_vars();
                out.extend(den.free_vars());
                out
            }
            Expr::SumOver { vars, body } => body.free_vars().difference(vars).cloned().collect(),
        }
    }

    /// Text rendering, e.g. `P(y1,y2|x1) * P(y3|x2)`.
    pub fn to_text(&self) -> String {
        render::to_text(self)
    }

    pub fn to_latex(&self) -> String {
        render::to_latex(self)
    }
}

impl core::fmt::Display for Expr {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(&render::to_text(self))
    }
}

/// Conditional-independence oracle over observed variables.
pub trait Independence {
    /// Whether `a ⊥ b | given` holds in every distribution of the model.
    fn independent(&self, a: &VarSet, b: &VarSet, given: &VarSet) -> bool;
}

/// Algebraic simplification: marginalizations that cancel are carried out,
/// ratios of marginals are paired into conditionals.
pub fn simplify(e: &Expr) -> Expr {
    normal::render_term(&normal::normalize(e, None))
}

/// Like [`simplify`], and when a sum cannot be pushed further, drops
/// conditioning variables that occur nowhere else under that sum and that
/// `oracle` certifies as irrelevant.
pub fn simplify_certified(e: &Expr, oracle: &dyn Independence) -> Expr {
    normal::render_term(&normal::normalize(e, Some(oracle)))
}

/// Simplifies, then repeatedly removes a variable of `candidates` from the
/// conditioning set of an observational conditional when `oracle` certifies
/// the conditional independence that makes the removal exact.
pub fn drop_conditioning(e: &Expr, candidates: &VarSet, oracle: &dyn Independence) -> Expr {
    let t = normal::normalize(e, Some(oracle));
    normal::render_term(&normal::drop_in_term(t, candidates, oracle))
}
