//! Identified expressions against truncated factorization on every DAG
//! consistent with the input graph.

mod common;

use common::*;
use pagid_core::expr::{vars, Expr};
use pagid_core::graph::mag_of_dag;
use pagid_core::ident_dag::id_dag;
use pagid_core::ident_pag::idp;
use pagid_core::oracle::{canonical_dag_of_mag, equivalence_class, max_error, random_scm, random_scm_with};
use pagid_core::{LatentDag, NodeSet, Pag};

const TOL: f64 = 1e-9;

fn class_dags(p: &Pag, seed: &LatentDag) -> Vec<LatentDag> {
    let class = equivalence_class(&mag_of_dag(seed)).unwrap();
    let dags: Vec<LatentDag> = class.iter().map(canonical_dag_of_mag).collect();
    assert_eq!(pagid_core::oracle::pag_of_class(&class).unwrap().graph().edges(), p.graph().edges());
    dags
}

fn worst(e: &Expr, dags: &[LatentDag], x: &NodeSet, y: &NodeSet, scms: u64) -> f64 {
    let mut w: f64 = 0.0;
    for (i, d) in dags.iter().enumerate() {
        for k in 0..scms {
            let s = random_scm(1000 * i as u64 + k, d);
            w = w.max(max_error(e, &s, x, y).unwrap());
        }
    }
    w
}

#[test]
fn mediator_expression_matches_both_source_dags() {
    let (x, y) = (set(&["X"]), set(&["V1", "V2", "V3", "V4"]));
    let e = idp(&confounded_mediator_pag(), &x, &y).unwrap().expr().unwrap().clone();
    let dags = [confounded_mediator_dag(), confounded_mediator_alt_dag()];
    assert!(worst(&e, &dags, &x, &y, 20) < TOL);
}

#[test]
fn mediator_expression_matches_its_whole_class() {
    let p = confounded_mediator_pag();
    let (x, y) = (set(&["X"]), set(&["V1", "V2", "V3", "V4"]));
    let e = idp(&p, &x, &y).unwrap().expr().unwrap().clone();
    let dags = class_dags(&p, &confounded_mediator_dag());
    assert!(worst(&e, &dags, &x, &y, 3) < TOL);
}

#[test]
fn two_treatment_expression_matches_its_class() {
    let p = two_treatments();
    let (x, y) = (set(&["X1", "X2"]), set(&["Y1", "Y2", "Y3"]));
    let e = idp(&p, &x, &y).unwrap().expr().unwrap().clone();
    let m = pagid_core::Mag::new(mixed(
        &["V1", "V2", "X1", "X2", "Y1", "Y2", "Y3"],
        &[
            ("V1", "-->", "X1"),
            ("V2", "-->", "X2"),
            ("X1", "-->", "Y1"),
            ("X2", "-->", "Y3"),
            ("X1", "<->", "X2"),
            ("X1", "<->", "Y3"),
            ("X2", "<->", "Y2"),
            ("Y1", "<->", "Y2"),
        ],
    ))
    .unwrap();
    let dags = class_dags(&p, &canonical_dag_of_mag(&m));
    assert!(worst(&e, &dags, &x, &y, 2) < TOL);
}

#[test]
fn beyond_adjustment_expression_matches_its_class() {
    let p = beyond_adjustment();
    let (x, y) = (set(&["X"]), set(&["Y"]));
    let e = idp(&p, &x, &y).unwrap().expr().unwrap().clone();
    let m = pagid_core::Mag::new(mixed(
        &["V1", "X", "V2", "V3", "V4", "Z", "Y"],
        &[
            ("V1", "-->", "X"),
            ("X", "<->", "V2"),
            ("V2", "<->", "V3"),
            ("V3", "<->", "V4"),
            ("V4", "<->", "Z"),
            ("V3", "-->", "X"),
            ("X", "-->", "Z"),
            ("V2", "-->", "Y"),
            ("V4", "-->", "Y"),
            ("Z", "-->", "Y"),
        ],
    ))
    .unwrap();
    let dags = class_dags(&p, &canonical_dag_of_mag(&m));
    assert!(!dags.is_empty());
    assert!(worst(&e, &dags, &x, &y, 2) < TOL);
}

#[test]
fn ternary_variables_do_not_break_soundness() {
    let d = confounded_mediator_dag();
    let (x, y) = (set(&["X"]), set(&["V3", "V4"]));
    let e = id_dag(&d, &x, &y).unwrap().expr().unwrap().clone();
    let s = random_scm_with(7, &d, vec![3, 2, 3, 2, 3, 2, 2]).unwrap();
    assert!(max_error(&e, &s, &x, &y).unwrap() < TOL);
}

#[test]
fn conditional_is_wrong_for_the_bow() {
    let d = bow();
    let (x, y) = (set(&["X"]), set(&["Y"]));
    let naive = Expr::cond(vars(["Y"]), vars(["X"]), Expr::dist(vars(["X", "Y"])));
    assert!(max_error(&naive, &random_scm(3, &d), &x, &y).unwrap() > 1e-3);
}
