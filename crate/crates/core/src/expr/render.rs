use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::{Expr, VarSet};

pub fn to_text(e: &Expr) -> String {
    match e {
        Expr::Dist { scope, intervened } => format!("{}({})", prob(intervened, false), list(scope, false)),
        Expr::Conditional { target, given, base, .. } => {
            let head = match &**base {
                Expr::Dist { intervened, .. } => prob(intervened, false),
                other => format!("[{}]", to_text(other)),
            };
            if given.is_empty() {
                format!("{head}({})", list(target, false))
            } else {
                format!("{head}({}|{})", list(target, false), list(given, false))
            }
        }
        Expr::Product { factors } if factors.is_empty() => "1".to_string(),
        Expr::Product { factors } => factors.iter().map(|f| wrap_text(f)).collect::<Vec<_>>().join(" * "),
        Expr::Quotient { num, den } => format!("{} / {}", wrap_text(num), wrap_text(den)),
        Expr::SumOver { vars, body } => format!("sum_{{{}}} [{}]", list(vars, false), to_text(body)),
    }
}

fn wrap_text(e: &Expr) -> String {
    match e {
        Expr::Product { factors } if factors.len() > 1 => format!("({})", to_text(e)),
        Expr::Quotient { .. } => format!("({})", to_text(e)),
        _ => to_text(e),
    }
}

pub fn to_latex(e: &Expr) -> String {
    match e {
        Expr::Dist { scope, intervened } => format!("{}({})", prob(intervened, true), list(scope, true)),
        Expr::Conditional { target, given, base, .. } => {
            let head = match &**base {
                Expr::Dist { intervened, .. } => prob(intervened, true),
                other => format!("\\left[{}\\right]", to_latex(other)),
            };
            if given.is_empty() {
                format!("{head}({})", list(target, true))
            } else {
                format!("{head}({} \\mid {})", list(target, true), list(given, true))
            }
        }
        Expr::Product { factors } if factors.is_empty() => "1".to_string(),
        Expr::Product { factors } => factors
            .iter()
            .map(|f| match f {
                Expr::Product { .. } => format!("\\left({}\\right)", to_latex(f)),
                _ => to_latex(f),
            })
            .collect::<Vec<_>>()
            .join(" \\, "),
        Expr::Quotient { num, den } => format!("\\frac{{{}}}{{{}}}", to_latex(num), to_latex(den)),
        Expr::SumOver { vars, body } => {
            format!("\\sum_{{{}}} \\left[{}\\right]", list(vars, true), to_latex(body))
        }
    }
}

fn prob(intervened: &VarSet, latex: bool) -> String {
    if intervened.is_empty() {
        "P".to_string()
    } else {
        format!("P_{{{}}}", list(intervened, latex))
    }
}

fn list(vs: &VarSet, latex: bool) -> String {
    let f = if latex { latex_var } else { text_var };
    vs.iter().map(|v| f(v)).collect::<Vec<_>>().join(",")
}

fn text_var(v: &str) -> String {
    v.to_lowercase()
}

/// `X12` becomes `x_{12}`.
fn latex_var(v: &str) -> String {
    let lower = v.to_lowercase();
    let stem = lower.trim_end_matches(|c: char| c.is_ascii_digit());
    if stem.is_empty() || stem.len() == lower.len() {
        lower
    } else {
        format!("{stem}_{{{}}}", &lower[stem.len()..])
    }
}
