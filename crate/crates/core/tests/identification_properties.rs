//! Identification checked against ground truth on every DAG of a class.

mod common;

use common::*;
use pagid_core::adjustment::{gac, Gac};
use pagid_core::expr::{vars, Expr, VarSet};
use pagid_core::ident_dag::{c_components, extractable, id_dag, id_dag_with};
use pagid_core::ident_pag::{idp, idp_with, CandidateOrder, IdOptions};
use pagid_core::oracle::{canonical_dag_of_mag, max_error, random_scm};
use pagid_core::{LatentDag, NodeSet};
use proptest::prelude::*;

const TOL: f64 = 1e-9;
const SCMS: u64 = 5;

fn dag_params() -> impl Strategy<Value = (u64, usize, usize, f64)> {
    (any::<u64>(), 2usize..=6, 0usize..=3, 0.2f64..0.7)
}

fn var_set(s: &NodeSet) -> VarSet {
    vars(s.iter())
}

fn worst(e: &Expr, d: &LatentDag, x: &NodeSet, y: &NodeSet, seed: u64) -> f64 {
    (0..SCMS).map(|k| max_error(e, &random_scm(seed ^ k, d), x, y).unwrap()).fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn idp_is_sound_and_agrees_with_id_dag((seed, n, l, p) in dag_params(), q in any::<u64>()) {
        let Some(c) = random_case(seed, n, l, p) else { return Ok(()) };
        let Some((x, y)) = query(&c.pag.graph().nodes(), q) else { return Ok(()) };
        let r = idp(&c.pag, &x, &y).unwrap();
        let Some(e) = r.expr() else { return Ok(()) };
        for m in &c.class {
            let d = canonical_dag_of_mag(m);
            let err = worst(e, &d, &x, &y, seed);
            prop_assert!(err < TOL, "{} off by {} on {:?}", e, err, d.graph().edges());
            let rd = id_dag(&d, &x, &y).unwrap();
            let ed = rd.expr();
            prop_assert!(ed.is_some(), "id_dag fails where idp succeeds");
            prop_assert!(worst(ed.unwrap(), &d, &x, &y, seed) < TOL);
        }
    }

    #[test]
    fn id_dag_is_sound((seed, n, l, p) in dag_params(), q in any::<u64>()) {
        let d = pagid_core::oracle::random_latent_dag(seed, n, l, p).unwrap();
        let Some((x, y)) = query(&d.observed(), q) else { return Ok(()) };
        if let Some(e) = id_dag(&d, &x, &y).unwrap().expr() {
            prop_assert!(worst(e, &d, &x, &y, seed) < TOL, "{}", e);
        }
    }

    #[test]
    fn adjustment_implies_idp((seed, n, l, p) in dag_params(), q in any::<u64>()) {
        let Some(c) = random_case(seed, n, l, p) else { return Ok(()) };
        let Some((x, y)) = query(&c.pag.graph().nodes(), q) else { return Ok(()) };
        if let Gac::Adjust { set: z } = gac(c.pag.graph(), &x, &y).unwrap() {
            prop_assert!(idp(&c.pag, &x, &y).unwrap().is_identified(), "adjustable by {} yet idp fails", z);
            let all = Expr::dist(var_set(&c.pag.graph().nodes()));
            let xz = var_set(&x.union(&z));
            let formula = Expr::sum(
                var_set(&z),
                Expr::product(vec![
                    Expr::cond(var_set(&y), xz, all.clone()),
                    Expr::cond(var_set(&z), VarSet::new(), all),
                ]),
            );
            for m in &c.class {
                prop_assert!(worst(&formula, &canonical_dag_of_mag(m), &x, &y, seed) < TOL);
            }
        }
    }

    #[test]
    fn verdict_ignores_candidate_order((seed, n, l, p) in dag_params(), q in any::<u64>()) {
        let Some(c) = random_case(seed, n, l, p) else { return Ok(()) };
        let Some((x, y)) = query(&c.pag.graph().nodes(), q) else { return Ok(()) };
        let base = idp(&c.pag, &x, &y).unwrap().is_identified();
        let dbase = id_dag(&c.dag, &x, &y).unwrap().is_identified();
        for k in 0..3 {
            let opts = IdOptions { order: CandidateOrder::Shuffled(seed.wrapping_add(k)) };
            let r = idp_with(&c.pag, &x, &y, &opts).unwrap();
            prop_assert_eq!(r.outcome.is_identified(), base);
            if let Some(e) = r.outcome.expr() {
                prop_assert!(worst(e, &c.dag, &x, &y, seed) < TOL);
            }
            prop_assert_eq!(id_dag_with(&c.dag, &x, &y, &opts).unwrap().outcome.is_identified(), dbase);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn a_node_outside_the_ancestors_is_extractable((seed, n, l, p) in dag_params(), tm in any::<u64>(), sm in any::<u64>()) {
        let d = pagid_core::oracle::random_latent_dag(seed, n, l, p).unwrap();
        let t = pick(&d.observed(), tm);
        let s = pick(&t, sm);
        if s.is_empty() {
            return Ok(());
        }
        let d_t = d.induced_subgraph(&t).unwrap();
        for comp in c_components(&d.induced_subgraph(&s).unwrap()) {
            let an = d_t.ancestors(&comp).unwrap();
            if an != t {
                let ex = extractable(&d, &t, &comp).unwrap();
                prop_assert!(!ex.difference(&an).is_empty(), "nothing extractable in {}", t.difference(&an));
            }
        }
    }

    #[test]
    fn other_c_components_offer_an_extractable_node((seed, n, l, p) in dag_params(), tm in any::<u64>(), sm in any::<u64>()) {
        let d = pagid_core::oracle::random_latent_dag(seed, n, l, p).unwrap();
        let t = pick(&d.observed(), tm);
        let comps = c_components(&d.induced_subgraph(&t).unwrap());
        if comps.len() < 2 {
            return Ok(());
        }
        let own = &comps[(sm as usize) % comps.len()];
        for c in c_components(&d.induced_subgraph(own).unwrap()) {
            let ex = extractable(&d, &t, &c).unwrap();
            prop_assert!(!ex.difference(own).is_empty());
        }
    }
}
