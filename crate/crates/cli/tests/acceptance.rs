//! Acceptance criteria, one line each. Exits nonzero if any is unmet.

use std::path::PathBuf;
use std::time::{Duration, Instant};

use pagid_cli::format::{parse, GraphFile};
use pagid_cli::verify;
use pagid_core::adjustment::{gac, Gac};
use pagid_core::expr::{evaluate, simplify, vars, Assignment, Expr, JointTable, Tables, VarSet};
use pagid_core::ident_dag::id_dag;
use pagid_core::ident_pag::{idp, idp_with, IdOptions};
use pagid_core::oracle::{canonical_dag_of_mag, equivalence_class, max_error, pag_of_class, random_scm};
use pagid_core::structure::{dc_component, pto};
use pagid_core::{LatentDag, MixedGraph, NodeSet, Pag};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const NUMERIC_TOL: f64 = 1e-9;
const REWRITE_TOL: f64 = 1e-12;

struct Verdict {
    ok: bool,
    detail: String,
}

fn verdict(ok: bool, detail: impl Into<String>) -> Verdict {
    Verdict { ok, detail: detail.into() }
}

fn load(name: &str) -> GraphFile {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name);
    parse(&std::fs::read_to_string(&path).unwrap()).unwrap_or_else(|e| panic!("{name}: {e}"))
}

fn pag(name: &str) -> Pag {
    match load(name) {
        GraphFile::Pag(p) => p,
        _ => panic!("{name} is not a pag"),
    }
}

fn dag(name: &str) -> LatentDag {
    match load(name) {
        GraphFile::Dag(d) => d,
        _ => panic!("{name} is not a dag"),
    }
}

fn set(v: &[&str]) -> NodeSet {
    v.iter().copied().collect()
}

fn worst_error(e: &Expr, dags: &[LatentDag], x: &NodeSet, y: &NodeSet, scms: u64) -> f64 {
    let mut w: f64 = 0.0;
    for (i, d) in dags.iter().enumerate() {
        for k in 0..scms {
            w = w.max(max_error(e, &random_scm(((i as u64) << 32) | k, d), x, y).unwrap());
        }
    }
    w
}

fn worked_example() -> Verdict {
    let p = pag("two_treatments.pag");
    let (x, y) = (set(&["X1", "X2"]), set(&["Y1", "Y2", "Y3"]));
    let start = Instant::now();
    let run = idp_with(&p, &x, &y, &IdOptions::default()).unwrap();
    let took = start.elapsed();
    let text = run.outcome.expr().map(Expr::to_text).unwrap_or_default();
    let latex = run.outcome.expr().map(Expr::to_latex).unwrap_or_default();
    let steps: Vec<String> = run.steps.iter().filter(|s| s.c == set(&["Y1", "Y2"])).map(|s| s.q.to_text()).collect();
    let want = ["P(v1,v2,x1,x2,y1,y2)", "P(v1,v2,x1,y1,y2)", "P(v1,v2) * P(y1,y2|v1,v2,x1)"];
    let steps_ok = steps.len() >= 3 && steps[..3] == want;
    let ok = text == "P(y1,y2|x1) * P(y3|x2)"
        && latex == r"P(y_{1},y_{2} \mid x_{1}) \, P(y_{3} \mid x_{2})"
        && steps_ok
        && took < Duration::from_secs(1);
    verdict(
        ok,
        format!(
            "{text}; first reductions {}; {:.2} ms",
            steps[..3.min(steps.len())].join(" -> "),
            took.as_secs_f64() * 1e3
        ),
    )
}

fn mediator() -> Verdict {
    let p = pag("confounded_mediator.pag");
    let (x, y) = (set(&["X"]), set(&["V1", "V2", "V3", "V4"]));
    let Some(e) = idp(&p, &x, &y).unwrap().expr().cloned() else {
        return verdict(false, "not identified");
    };
    let dags = [dag("confounded_mediator.dag"), dag("confounded_mediator_alt.dag")];
    let err = worst_error(&e, &dags, &x, &y, 20);
    verdict(
        e.to_text() == "P(v1,v2) * P(v3,v4|v1,v2,x)" && err <= NUMERIC_TOL,
        format!("{e}; max error {err:.1e} over 2 DAGs x 20 SCMs"),
    )
}

fn beyond_adjustment() -> Verdict {
    let p = pag("beyond_adjustment.pag");
    let (x, y) = (set(&["X"]), set(&["Y"]));
    let gac_fails = matches!(gac(p.graph(), &x, &y).unwrap(), Gac::Fail { .. });
    let Some(e) = idp(&p, &x, &y).unwrap().expr().cloned() else {
        return verdict(false, format!("gac fails: {gac_fails}; idp fails"));
    };
    let GraphFile::Mag(m) = load("beyond_adjustment.mag") else { panic!("not a mag") };
    let start = Instant::now();
    let class = equivalence_class(&m).unwrap();
    let class_ok = pag_of_class(&class).unwrap() == p;
    let dags: Vec<LatentDag> = class.iter().map(canonical_dag_of_mag).collect();
    let err = worst_error(&e, &dags, &x, &y, 20);
    verdict(
        gac_fails && class_ok && err <= NUMERIC_TOL,
        format!(
            "gac fails: {gac_fails}; idp {e}; class of {} MAGs reproduces the PAG: {class_ok}; max error {err:.1e}; {:.1} s",
            class.len(),
            start.elapsed().as_secs_f64()
        ),
    )
}

fn non_identifiable() -> Verdict {
    let r = idp(&pag("circle_pair.pag"), &set(&["X"]), &set(&["Y"])).unwrap();
    let pair_ok = r.fail().is_some_and(|f| f.stuck == set(&["X"]));
    let b = id_dag(&dag("bow.dag"), &set(&["X"]), &set(&["Y"])).unwrap();
    let bow_ok = b.fail().and_then(|f| f.witness.as_ref()).is_some_and(|w| w.node == "X" && w.child == "Y");
    let show =
        |f: Option<&pagid_core::ident_dag::Fail>| f.map(ToString::to_string).unwrap_or_else(|| "identified".into());
    verdict(pair_ok && bow_ok, format!("circle pair: {}; bow: {}", show(r.fail()), show(b.fail())))
}

fn pipeline() -> Verdict {
    let cfg = verify::Config { seed: 2024, runs: 200, ..verify::Config::default() };
    let start = Instant::now();
    let r = verify::run(&cfg, |_, _| {}).unwrap();
    let took = start.elapsed();
    verdict(
        r.passed() && took < Duration::from_secs(600),
        format!(
            "{} runs: roundtrip {}/{}, subsumption {} violations, pto {}/{}, soundness {} of {}, adjustment {} of {}, agreement {} of {}; {:.1} s",
            r.runs,
            r.roundtrip_pass,
            r.runs,
            r.subsumption_violations,
            r.pto_pass,
            r.runs,
            r.soundness_violations,
            r.soundness_checks,
            r.adjustment_violations,
            r.adjustable,
            r.agreement_violations,
            r.agreement_checks,
            took.as_secs_f64()
        ),
    )
}

// Expression corpus: the unsimplified bucket reduction for every bucket of
// every PAG fixture, the idp result and every intermediate for every
// single-node query, and seeded random expressions.
fn reduction(g: &MixedGraph, b: &NodeSet) -> Expr {
    let all = vars(g.nodes().iter());
    let q = Expr::dist(all.clone());
    let s = dc_component(g, b).unwrap();
    let mut prefix = VarSet::new();
    let mut factors = Vec::new();
    for block in pto(g).unwrap().buckets {
        let bv = vars(block.iter());
        if block.is_subset(&s) {
            factors.push(Expr::cond_within(bv.clone(), prefix.clone(), all.clone(), q.clone()));
        }
        prefix.extend(bv);
    }
    let f = Expr::product(factors);
    Expr::product(vec![Expr::quotient(q, f.clone()), Expr::sum(vars(b.iter()), f)])
}

fn random_expr(rng: &mut ChaCha8Rng, names: &[String], depth: u32) -> Expr {
    let pick = |rng: &mut ChaCha8Rng| -> VarSet {
        loop {
            let s: VarSet = names.iter().filter(|_| rng.random_bool(0.4)).cloned().collect();
            if !s.is_empty() {
                return s;
            }
        }
    };
    if depth == 0 {
        return Expr::dist(pick(rng));
    }
    match rng.random_range(0..4) {
        0 => Expr::product((0..rng.random_range(1..=3)).map(|_| random_expr(rng, names, depth - 1)).collect()),
        1 => Expr::quotient(random_expr(rng, names, depth - 1), random_expr(rng, names, depth - 1)),
        2 => {
            let body = random_expr(rng, names, depth - 1);
            let over: VarSet = body.free_vars().into_iter().filter(|_| rng.random_bool(0.5)).collect();
            Expr::sum(over, body)
        }
        _ => {
            let target = pick(rng);
            let given: VarSet = pick(rng).difference(&target).cloned().collect();
            let scope: VarSet = target.union(&given).cloned().collect();
            Expr::cond(target, given, Expr::dist(scope))
        }
    }
}

fn random_tables(rng: &mut ChaCha8Rng, names: &[String]) -> Tables {
    let size = 1usize << names.len();
    let mut probs: Vec<f64> = (0..size).map(|_| rng.random_range(0.05..1.0)).collect();
    let total: f64 = probs.iter().sum();
    probs.iter_mut().for_each(|p| *p /= total);
    let t = JointTable::new(names.to_vec(), vec![2; names.len()], probs).unwrap();
    [(VarSet::new(), t)].into_iter().collect()
}

fn assignments(free: &VarSet) -> Vec<Assignment> {
    (0..1usize << free.len()).map(|k| free.iter().enumerate().map(|(i, v)| (v.clone(), k >> i & 1)).collect()).collect()
}

fn rewrites() -> Verdict {
    let mut corpus: Vec<(Vec<String>, Expr)> = Vec::new();
    for name in [
        "confounded_mediator.pag",
        "confounded_mediator_sub.pag",
        "two_treatments.pag",
        "beyond_adjustment.pag",
        "circle_pair.pag",
    ] {
        let p = pag(name);
        let g = p.graph();
        let names: Vec<String> = g.names().to_vec();
        for b in pto(g).unwrap().buckets {
            corpus.push((names.clone(), reduction(g, &b)));
        }
        for x in g.nodes().iter() {
            for y in g.nodes().iter().filter(|y| *y != x) {
                let run = idp_with(&p, &set(&[x]), &set(&[y]), &IdOptions::default()).unwrap();
                corpus.extend(run.outcome.expr().map(|e| (names.clone(), e.clone())));
                corpus.extend(run.steps.iter().map(|s| (names.clone(), s.q.clone())));
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let letters: Vec<String> = ["A", "B", "C", "D", "E"].iter().map(|s| s.to_string()).collect();
    for _ in 0..200 {
        let e = random_expr(&mut rng, &letters, 3);
        corpus.push((letters.clone(), e));
    }

    let (mut worst, mut not_fixed, mut grown) = (0.0f64, 0, 0);
    for (k, (names, e)) in corpus.iter().enumerate() {
        let s = simplify(e);
        not_fixed += usize::from(simplify(&s) != s);
        grown += usize::from(!s.free_vars().is_subset(&e.free_vars()));
        let mut rng = ChaCha8Rng::seed_from_u64(k as u64);
        for _ in 0..50 {
            let t = random_tables(&mut rng, names);
            for a in assignments(&e.free_vars()) {
                let (want, got) = (evaluate(e, &t, &a).unwrap(), evaluate(&s, &t, &a).unwrap());
                worst = worst.max((want - got).abs() / want.abs().max(1.0));
            }
        }
    }
    verdict(
        worst <= REWRITE_TOL && not_fixed == 0 && grown == 0,
        format!(
            "{} expressions x 50 tables: max deviation {worst:.1e}; {not_fixed} not idempotent; {grown} gained variables",
            corpus.len()
        ),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Verdict); 6] = [
        ("worked example, two treatments", worked_example),
        ("mediator query and ground truth", mediator),
        ("identifiable beyond adjustment", beyond_adjustment),
        ("non-identifiable certificates", non_identifiable),
        ("random property pipeline", pipeline),
        ("expression rewrites", rewrites),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let v = check();
        failed += usize::from(!v.ok);
        println!("[{}] {} {name}: {}", if v.ok { "PASS" } else { "FAIL" }, i + 1, v.detail);
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
