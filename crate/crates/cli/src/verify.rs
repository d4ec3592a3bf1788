//! Seeded end-to-end check of the library against brute-force ground truth.

use std::fmt;

use pagid_core::adjustment::{gac, Gac};
use pagid_core::expr::{evaluate, Assignment, Expr, Tables, VarSet};
use pagid_core::graph::mag_of_dag;
use pagid_core::ident_dag::{c_components, id_dag};
use pagid_core::ident_pag::idp;
use pagid_core::oracle::{
    canonical_dag_of_mag, equivalence_class, joint, max_error, pag_of_class, random_latent_dag, random_scm, Scm,
};
use pagid_core::structure::{pc_component, pto};
use pagid_core::{LatentDag, Mag, NodeSet, Pag};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

/// MAGs with more edges are rejected and redrawn.
pub const MAX_MAG_EDGES: usize = 9;

#[derive(Clone, Debug)]
pub struct Config {
    pub seed: u64,
    pub runs: usize,
    pub tol: f64,
    /// SCMs drawn per DAG for each numeric comparison.
    pub scms: u64,
    /// Random queries per diagram.
    pub queries: usize,
    /// Random induced subgraphs per diagram, besides the full graph.
    pub subsets: usize,
}

impl Default for Config {
    fn default() -> Self {
        Config { seed: 0, runs: 200, tol: 1e-9, scms: 5, queries: 3, subsets: 2 }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Report {
    pub runs: usize,
    pub rejected: usize,
    pub class_members: usize,
    pub queries: usize,
    pub idp_identified: usize,
    pub roundtrip_pass: usize,
    pub subsumption_checks: usize,
    pub subsumption_violations: usize,
    pub pto_pass: usize,
    pub soundness_checks: usize,
    pub soundness_violations: usize,
    pub adjustable: usize,
    pub adjustment_violations: usize,
    pub agreement_checks: usize,
    pub agreement_violations: usize,
    /// Largest numeric deviation seen in soundness and agreement checks.
    pub worst_error: f64,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.roundtrip_pass == self.runs
            && self.pto_pass == self.runs
            && self.subsumption_violations == 0
            && self.soundness_violations == 0
            && self.adjustment_violations == 0
            && self.agreement_violations == 0
    }
}

fn pct(k: usize, n: usize) -> String {
    if n == 0 {
        "n/a".into()
    } else {
        format!("{:.1}%", 100.0 * k as f64 / n as f64)
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "runs {}  rejected {}  class members {}  queries {}  idp identified {}",
            self.runs, self.rejected, self.class_members, self.queries, self.idp_identified
        )?;
        writeln!(f, "{:<42} {:>10} {:>10} {:>10}", "check", "checked", "result", "violations")?;
        let rows = [
            ("(a) mag roundtrip", self.runs, pct(self.roundtrip_pass, self.runs), self.runs - self.roundtrip_pass),
            (
                "(b) ancestors/c-components subsumed",
                self.subsumption_checks,
                pct(self.subsumption_checks - self.subsumption_violations, self.subsumption_checks),
                self.subsumption_violations,
            ),
            ("(c) pto refined by class DAGs", self.runs, pct(self.pto_pass, self.runs), self.runs - self.pto_pass),
            (
                "(d) idp soundness",
                self.soundness_checks,
                pct(self.soundness_checks - self.soundness_violations, self.soundness_checks),
                self.soundness_violations,
            ),
            (
                "(e) gac success implies idp success",
                self.adjustable,
                pct(self.adjustable - self.adjustment_violations, self.adjustable),
                self.adjustment_violations,
            ),
            (
                "(f) idp and id-dag agree",
                self.agreement_checks,
                pct(self.agreement_checks - self.agreement_violations, self.agreement_checks),
                self.agreement_violations,
            ),
        ];
        for (name, n, r, v) in rows {
            writeln!(f, "{name:<42} {n:>10} {r:>10} {v:>10}")?;
        }
        writeln!(f, "worst numeric error {:.3e}", self.worst_error)?;
        write!(f, "{}", if self.passed() { "PASS" } else { "FAIL" })
    }
}

struct Case {
    dag: LatentDag,
    class: Vec<Mag>,
    pag: Pag,
}

fn draw(rng: &mut ChaCha8Rng, rejected: &mut usize) -> pagid_core::Result<Case> {
    loop {
        let seed = rng.random::<u64>();
        let n_obs = rng.random_range(2..=6);
        let n_lat = rng.random_range(0..=3);
        let p = rng.random_range(0.2..0.7);
        let dag = random_latent_dag(seed, n_obs, n_lat, p)?;
        let mag = mag_of_dag(&dag);
        if mag.graph().edge_count() > MAX_MAG_EDGES {
            *rejected += 1;
            continue;
        }
        let class = equivalence_class(&mag)?;
        let pag = pag_of_class(&class)?;
        return Ok(Case { dag, class, pag });
    }
}

fn subset(rng: &mut ChaCha8Rng, nodes: &NodeSet) -> NodeSet {
    loop {
        let s: NodeSet = nodes.iter().filter(|_| rng.random_bool(0.6)).collect();
        if !s.is_empty() {
            return s;
        }
    }
}

fn query(rng: &mut ChaCha8Rng, nodes: &NodeSet) -> (NodeSet, NodeSet) {
    let mut order: Vec<&str> = nodes.iter().collect();
    order.shuffle(rng);
    let nx = rng.random_range(1..order.len());
    let ny = rng.random_range(1..=order.len() - nx);
    (order[..nx].iter().copied().collect(), order[nx..nx + ny].iter().copied().collect())
}

fn one(v: &str) -> NodeSet {
    [v].into_iter().collect()
}

fn subsumed(case: &Case, dags: &[LatentDag], a: &NodeSet) -> pagid_core::Result<(usize, usize, bool)> {
    let p_a = case.pag.graph().induced_subgraph(a)?;
    let order = pto(&p_a)?;
    let rank = |v: &str| order.buckets.iter().position(|b| b.contains(v));
    let (mut checks, mut violations, mut refined) = (0, 0, true);
    for d in dags {
        let d_a = d.induced_subgraph(a)?;
        checks += 1;
        let mut ok = true;
        for v in a.iter() {
            let an = d_a.ancestors(&one(v))?;
            ok &= an.is_subset(&p_a.possible_ancestors(&one(v))?);
            refined &= an.iter().all(|u| rank(u) <= rank(v));
        }
        for comp in c_components(&d_a) {
            for v in comp.iter() {
                ok &= comp.is_subset(&pc_component(&p_a, &one(v))?);
            }
        }
        violations += usize::from(!ok);
    }
    Ok((checks, violations, refined))
}

fn vars_of(s: &NodeSet) -> VarSet {
    s.iter().map(String::from).collect()
}

/// Largest difference between `a` and `b` on the observational joint of `s`
/// over every value of their free variables and of `x`.
fn max_gap(a: &Expr, b: &Expr, s: &Scm, x: &NodeSet) -> pagid_core::Result<f64> {
    let tables: Tables = [(VarSet::new(), joint(s)?)].into_iter().collect();
    let mut names: VarSet = a.free_vars();
    names.extend(b.free_vars());
    names.extend(vars_of(x));
    let names: Vec<String> = names.into_iter().collect();
    let cards: Vec<usize> = names.iter().map(|n| s.card(n).unwrap_or(1)).collect();
    let mut worst: f64 = 0.0;
    for mut k in 0..cards.iter().product::<usize>() {
        let mut asg = Assignment::new();
        for (n, &c) in names.iter().zip(&cards) {
            asg.insert(n.clone(), k % c);
            k /= c;
        }
        worst = worst.max((evaluate(a, &tables, &asg)? - evaluate(b, &tables, &asg)?).abs());
    }
    Ok(worst)
}

/// Runs the pipeline; `progress` is called after each run.
pub fn run(cfg: &Config, mut progress: impl FnMut(usize, &Report)) -> pagid_core::Result<Report> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut r = Report::default();
    for i in 0..cfg.runs {
        let case = draw(&mut rng, &mut r.rejected)?;
        r.runs += 1;
        r.class_members += case.class.len();
        let canon: Vec<LatentDag> = case.class.iter().map(canonical_dag_of_mag).collect();

        if case.class.iter().zip(&canon).all(|(m, d)| mag_of_dag(d) == *m) {
            r.roundtrip_pass += 1;
        }

        let mut dags = vec![case.dag.clone()];
        dags.extend(canon.iter().cloned());
        let nodes = case.pag.graph().nodes();
        let mut sets = vec![nodes.clone()];
        sets.extend((0..cfg.subsets).map(|_| subset(&mut rng, &nodes)));
        let mut refined = true;
        for a in &sets {
            let (c, v, ok) = subsumed(&case, &dags, a)?;
            r.subsumption_checks += c;
            r.subsumption_violations += v;
            refined &= ok;
        }
        r.pto_pass += usize::from(refined);

        if nodes.len() >= 2 {
            for _ in 0..cfg.queries {
                let (x, y) = query(&mut rng, &nodes);
                r.queries += 1;
                let found = idp(&case.pag, &x, &y)?;
                if let Gac::Adjust { .. } = gac(case.pag.graph(), &x, &y)? {
                    r.adjustable += 1;
                    r.adjustment_violations += usize::from(!found.is_identified());
                }
                let Some(e) = found.expr() else { continue };
                r.idp_identified += 1;
                for (k, d) in canon.iter().enumerate() {
                    let scms: Vec<Scm> =
                        (0..cfg.scms).map(|j| random_scm(rng.random::<u64>() ^ (k as u64) ^ (j << 32), d)).collect();
                    r.soundness_checks += 1;
                    let mut err: f64 = 0.0;
                    for s in &scms {
                        err = err.max(max_error(e, s, &x, &y)?);
                    }
                    r.worst_error = r.worst_error.max(err);
                    r.soundness_violations += usize::from(err > cfg.tol);

                    r.agreement_checks += 1;
                    let agree = match id_dag(d, &x, &y)?.expr() {
                        Some(ed) => {
                            let mut gap: f64 = 0.0;
                            for s in &scms {
                                gap = gap.max(max_gap(e, ed, s, &x)?);
                            }
                            r.worst_error = r.worst_error.max(gap);
                            gap <= cfg.tol
                        }
                        None => false,
                    };
                    r.agreement_violations += usize::from(!agree);
                }
            }
        }
        progress(i, &r);
    }
    Ok(r)
}
