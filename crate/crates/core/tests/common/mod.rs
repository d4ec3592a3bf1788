//! Graphs from the worked examples, built in code.
#![allow(dead_code)]

use pagid_core::{EdgeMark, LatentDag, MixedGraph, NodeSet, Pag};

pub fn set(v: &[&str]) -> NodeSet {
    v.iter().copied().collect()
}

/// Edges as `(a, token, b)` with tokens `-->`, `<->`, `o->`, `o-o`, `o--`.
pub fn mixed(nodes: &[&str], edges: &[(&str, &str, &str)]) -> MixedGraph {
    use EdgeMark::*;
    let mut g = MixedGraph::with_nodes(nodes.iter().copied()).unwrap();
    for &(a, tok, b) in edges {
        let (ma, mb) = match tok {
            "-->" => (Tail, Arrow),
            "<->" => (Arrow, Arrow),
            "o->" => (Circle, Arrow),
            "o-o" => (Circle, Circle),
            "o--" => (Circle, Tail),
            _ => panic!("unknown token {tok}"),
        };
        g.add_edge(a, b, ma, mb).unwrap();
    }
    g
}

pub fn pag(nodes: &[&str], edges: &[(&str, &str, &str)]) -> Pag {
    Pag::from_marks(mixed(nodes, edges)).unwrap()
}

/// X with two parents, confounded with one of them, and a confounded
/// mediator chain X → V3 → V4.
pub fn confounded_mediator_dag() -> LatentDag {
    LatentDag::new(
        &["V1", "V2", "X", "V3", "V4"],
        &[("V1", "X"), ("V2", "X"), ("X", "V3"), ("V3", "V4")],
        &[("V2", "X"), ("V3", "V4")],
    )
    .unwrap()
}

pub fn confounded_mediator_pag() -> Pag {
    pag(
        &["V1", "V2", "X", "V3", "V4"],
        &[("V1", "o->", "X"), ("V2", "o->", "X"), ("X", "-->", "V3"), ("X", "-->", "V4"), ("V3", "o-o", "V4")],
    )
}

pub fn confounded_mediator_sub() -> MixedGraph {
    confounded_mediator_pag().graph().induced_subgraph(&set(&["V1", "V2", "X", "V4"])).unwrap()
}

pub fn confounded_mediator_alt_dag() -> LatentDag {
    LatentDag::new(
        &["V1", "V2", "X", "V3", "V4"],
        &[("X", "V3"), ("X", "V4"), ("V3", "V4")],
        &[("V1", "X"), ("V2", "X"), ("V3", "V4")],
    )
    .unwrap()
}

pub fn two_treatments() -> Pag {
    pag(
        &["V1", "V2", "X1", "X2", "Y1", "Y2", "Y3"],
        &[
            ("V1", "o->", "X1"),
            ("V2", "o->", "X2"),
            ("X1", "-->", "Y1"),
            ("X2", "-->", "Y3"),
            ("X1", "<->", "X2"),
            ("X1", "<->", "Y3"),
            ("X2", "<->", "Y2"),
            ("Y1", "<->", "Y2"),
        ],
    )
}

pub fn beyond_adjustment() -> Pag {
    pag(
        &["V1", "X", "V2", "V3", "V4", "Z", "Y"],
        &[
            ("V1", "o->", "X"),
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
    )
}

pub fn circle_pair() -> Pag {
    pag(&["X", "Y"], &[("X", "o-o", "Y")])
}

pub fn bow() -> LatentDag {
    LatentDag::new(&["X", "Y"], &[("X", "Y")], &[("X", "Y")]).unwrap()
}

/// A random diagram with its MAG, the MAG's equivalence class and the PAG
/// of that class; `None` when the MAG has more than nine edges.
pub struct Case {
    pub dag: LatentDag,
    pub mag: pagid_core::Mag,
    pub class: Vec<pagid_core::Mag>,
    pub pag: Pag,
}

pub fn random_case(seed: u64, n_obs: usize, n_lat: usize, p: f64) -> Option<Case> {
    use pagid_core::oracle::{equivalence_class, pag_of_class, random_latent_dag};
    let dag = random_latent_dag(seed, n_obs, n_lat, p).unwrap();
    let mag = pagid_core::graph::mag_of_dag(&dag);
    if mag.graph().edge_count() > 9 {
        return None;
    }
    let class = equivalence_class(&mag).unwrap();
    let pag = pag_of_class(&class).unwrap();
    Some(Case { dag, mag, class, pag })
}

/// Members of `nodes` picked by the low bits of `mask`.
pub fn pick(nodes: &NodeSet, mask: u64) -> NodeSet {
    nodes.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, n)| n).collect()
}

/// Disjoint nonempty `x`, `y` drawn from `mask`, two bits per node.
pub fn query(nodes: &NodeSet, mask: u64) -> Option<(NodeSet, NodeSet)> {
    let mut x = NodeSet::new();
    let mut y = NodeSet::new();
    for (i, n) in nodes.iter().enumerate() {
        match mask >> (2 * i) & 3 {
            1 => x.insert(n),
            2 => y.insert(n),
            _ => false,
        };
    }
    (!x.is_empty() && !y.is_empty()).then_some((x, y))
}
