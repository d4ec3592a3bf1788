//! Plain-text graph files.
//!
//! ```text
//! pag
//! nodes: V1 V2 X
//! edge: V1 o-> X
//! edge: X --> V3 visible
//! ```
//!
//! The first non-comment line is `pag`, `mag` or `dag`. An optional
//! `nodes:` line fixes the node order; otherwise nodes are numbered by first
//! appearance. DAG files may name latent nodes on a `latent:` line and use
//! `->`, `<-` and `<->`; a `<->` edge stands for a latent parent shared by
//! its endpoints. Everything after `#` is a comment.
//!
//! [`serialize`] writes the canonical form: header, `nodes:` line, then one
//! edge per line in node-index order. Canonical files reparse to the same
//! bytes.

use std::fmt::Write as _;

use pagid_core::{EdgeMark, LatentDag, Mag, MixedGraph, NodeSet, Pag};

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("{0}")]
    Invalid(#[from] pagid_core::Error),
}

fn syntax(line: usize, message: impl Into<String>) -> FormatError {
    FormatError::Syntax { line, message: message.into() }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kind {
    Pag,
    Mag,
    Dag,
}

impl Kind {
    pub fn as_str(self) -> &'static str {
        match self {
            Kind::Pag => "pag",
            Kind::Mag => "mag",
            Kind::Dag => "dag",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GraphFile {
    Pag(Pag),
    Mag(Mag),
    Dag(LatentDag),
}

impl GraphFile {
    pub fn kind(&self) -> Kind {
        match self {
            GraphFile::Pag(_) => Kind::Pag,
            GraphFile::Mag(_) => Kind::Mag,
            GraphFile::Dag(_) => Kind::Dag,
        }
    }

    /// The underlying mixed graph; for a DAG this includes its latents.
    pub fn graph(&self) -> &MixedGraph {
        match self {
            GraphFile::Pag(p) => p.graph(),
            GraphFile::Mag(m) => m.graph(),
            GraphFile::Dag(d) => d.graph(),
        }
    }
}

const MARK_TOKENS: [(&str, EdgeMark, EdgeMark); 8] = [
    ("-->", EdgeMark::Tail, EdgeMark::Arrow),
    ("<--", EdgeMark::Arrow, EdgeMark::Tail),
    ("<->", EdgeMark::Arrow, EdgeMark::Arrow),
    ("o->", EdgeMark::Circle, EdgeMark::Arrow),
    ("<-o", EdgeMark::Arrow, EdgeMark::Circle),
    ("o-o", EdgeMark::Circle, EdgeMark::Circle),
    ("o--", EdgeMark::Circle, EdgeMark::Tail),
    ("--o", EdgeMark::Tail, EdgeMark::Circle),
];

fn token_of(a: EdgeMark, b: EdgeMark) -> &'static str {
    MARK_TOKENS.iter().find(|t| (t.1, t.2) == (a, b)).map(|t| t.0).unwrap_or("?-?")
}

struct RawEdge {
    line: usize,
    a: String,
    tok: String,
    b: String,
    visible: bool,
}

pub fn parse(text: &str) -> Result<GraphFile, FormatError> {
    let mut kind = None;
    let mut nodes: Option<(usize, Vec<String>)> = None;
    let mut latent: Vec<String> = Vec::new();
    let mut edges = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some(k) = kind else {
            kind = Some(match content {
                "pag" => Kind::Pag,
                "mag" => Kind::Mag,
                "dag" => Kind::Dag,
                other => return Err(syntax(line, format!("expected header `pag`, `mag` or `dag`, found `{other}`"))),
            });
            continue;
        };
        let (key, rest) =
            content.split_once(':').ok_or_else(|| syntax(line, format!("expected `key: ...`, found `{content}`")))?;
        let words: Vec<&str> = rest.split_whitespace().collect();
        match key.trim() {
            "nodes" => {
                if nodes.is_some() {
                    return Err(syntax(line, "second `nodes:` line"));
                }
                nodes = Some((line, words.iter().map(|w| w.to_string()).collect()));
            }
            "latent" if k == Kind::Dag => latent.extend(words.iter().map(|w| w.to_string())),
            "latent" => return Err(syntax(line, "`latent:` is only allowed in dag files")),
            "edge" => {
                let (a, tok, b, visible) = match words.as_slice() {
                    [a, t, b] => (a, t, b, false),
                    [a, t, b, "visible"] => (a, t, b, true),
                    [_, _, _, w] => {
                        return Err(syntax(line, format!("unexpected `{w}` after edge; only `visible` may follow")))
                    }
                    _ => return Err(syntax(line, "expected `edge: A <token> B [visible]`")),
                };
                edges.push(RawEdge { line, a: a.to_string(), tok: tok.to_string(), b: b.to_string(), visible });
            }
            other => return Err(syntax(line, format!("unknown key `{other}`"))),
        }
    }
    let kind = kind.ok_or_else(|| syntax(1, "empty file; expected header `pag`, `mag` or `dag`"))?;

    let mut order: Vec<String> = Vec::new();
    let declared = nodes.is_some();
    if let Some((_, ns)) = &nodes {
        for n in ns {
            if order.contains(n) {
                return Err(syntax(nodes.as_ref().map_or(1, |n| n.0), format!("node `{n}` listed twice")));
            }
            order.push(n.clone());
        }
    }
    for e in &edges {
        for n in [&e.a, &e.b] {
            if !order.contains(n) && !latent.contains(n) {
                if declared {
                    return Err(syntax(e.line, format!("node `{n}` is not on the `nodes:` line")));
                }
                order.push(n.clone());
            }
        }
    }

    match kind {
        Kind::Dag => build_dag(order, latent, &edges).map(GraphFile::Dag),
        Kind::Pag | Kind::Mag => {
            let g = build_marked(&order, &edges, kind)?;
            Ok(if kind == Kind::Pag { GraphFile::Pag(Pag::new(g)?) } else { GraphFile::Mag(Mag::new(g)?) })
        }
    }
}

fn build_marked(order: &[String], edges: &[RawEdge], kind: Kind) -> Result<MixedGraph, FormatError> {
    let mut g = MixedGraph::with_nodes(order.iter().cloned())?;
    for e in edges {
        let Some(&(_, ma, mb)) = MARK_TOKENS.iter().find(|t| t.0 == e.tok) else {
            let hint = if matches!(e.tok.as_str(), "->" | "<-") { " (`->` and `<-` are dag-only)" } else { "" };
            return Err(syntax(e.line, format!("unknown edge token `{}` in a {} file{hint}", e.tok, kind.as_str())));
        };
        g.add_edge(&e.a, &e.b, ma, mb).map_err(|err| syntax(e.line, err.to_string()))?;
        if e.visible {
            let (t, h) = match (ma, mb) {
                (EdgeMark::Tail, EdgeMark::Arrow) => (&e.a, &e.b),
                (EdgeMark::Arrow, EdgeMark::Tail) => (&e.b, &e.a),
                _ => {
                    return Err(syntax(e.line, format!("`visible` on the non-directed edge {} {} {}", e.a, e.tok, e.b)))
                }
            };
            g.set_visible(t, h, true).map_err(|err| syntax(e.line, err.to_string()))?;
        }
    }
    Ok(g)
}

fn build_dag(observed: Vec<String>, latent: Vec<String>, edges: &[RawEdge]) -> Result<LatentDag, FormatError> {
    let mut directed = Vec::new();
    let mut bidirected = Vec::new();
    for e in edges {
        if e.visible {
            return Err(syntax(e.line, "`visible` is not allowed in dag files"));
        }
        match e.tok.as_str() {
            "->" | "-->" => directed.push((e.a.clone(), e.b.clone(), e.line)),
            "<-" | "<--" => directed.push((e.b.clone(), e.a.clone(), e.line)),
            "<->" => {
                if latent.contains(&e.a) || latent.contains(&e.b) {
                    return Err(syntax(e.line, "`<->` must join two observed nodes"));
                }
                bidirected.push((e.a.clone(), e.b.clone(), e.line));
            }
            t => return Err(syntax(e.line, format!("unknown edge token `{t}` in a dag file"))),
        }
    }
    if latent.is_empty() {
        let d: Vec<(String, String)> = directed.iter().map(|(a, b, _)| (a.clone(), b.clone())).collect();
        let bi: Vec<(String, String)> = bidirected.iter().map(|(a, b, _)| (a.clone(), b.clone())).collect();
        for (a, b, line) in directed.iter().chain(&bidirected) {
            if a == b {
                return Err(syntax(*line, format!("self-loop on `{a}`")));
            }
        }
        return Ok(LatentDag::new(&observed, &d, &bi)?);
    }
    // Explicit latents: a full DAG reduced by latent projection.
    let mut all = observed.clone();
    for l in &latent {
        if all.contains(l) {
            return Err(syntax(1, format!("`{l}` is both observed and latent")));
        }
        all.push(l.clone());
    }
    let mut g = MixedGraph::with_nodes(all.iter().cloned())?;
    for (a, b, line) in &directed {
        g.add_edge(a, b, EdgeMark::Tail, EdgeMark::Arrow).map_err(|err| syntax(*line, err.to_string()))?;
    }
    let mut hidden: NodeSet = latent.iter().map(String::as_str).collect();
    for (k, (a, b, line)) in bidirected.iter().enumerate() {
        let mut name = format!("_U{k}");
        while g.index_of(&name).is_some() {
            name.push('_');
        }
        g.add_node(name.clone())?;
        for v in [a, b] {
            g.add_edge(&name, v, EdgeMark::Tail, EdgeMark::Arrow).map_err(|err| syntax(*line, err.to_string()))?;
        }
        hidden.insert(name);
    }
    Ok(LatentDag::project(&g, &hidden)?)
}

/// Canonical text of `f`.
pub fn serialize(f: &GraphFile) -> String {
    let mut out = String::new();
    out.push_str(f.kind().as_str());
    out.push('\n');
    match f {
        GraphFile::Pag(p) => write_marked(&mut out, p.graph()),
        GraphFile::Mag(m) => write_marked(&mut out, m.graph()),
        GraphFile::Dag(d) => write_dag(&mut out, d),
    }
    out
}

fn write_nodes(out: &mut String, names: &[String]) {
    out.push_str("nodes:");
    for n in names {
        out.push(' ');
        out.push_str(n);
    }
    out.push('\n');
}

fn write_marked(out: &mut String, g: &MixedGraph) {
    write_nodes(out, g.names());
    for e in g.edges() {
        let _ = write!(out, "edge: {} {} {}", e.a, token_of(e.mark_a, e.mark_b), e.b);
        if e.visible {
            out.push_str(" visible");
        }
        out.push('\n');
    }
}

fn write_dag(out: &mut String, d: &LatentDag) {
    let obs: Vec<String> = d.observed().iter().map(String::from).collect();
    let ix = |n: &str| obs.iter().position(|o| o == n).unwrap_or(usize::MAX);
    write_nodes(out, &obs);
    // (first index, second index, bidirected, line)
    let mut lines: Vec<(usize, usize, bool, String)> = Vec::new();
    for (t, h) in d.directed_edges() {
        let (it, ih) = (ix(&t), ix(&h));
        let text = if it < ih { format!("edge: {t} -> {h}") } else { format!("edge: {h} <- {t}") };
        lines.push((it.min(ih), it.max(ih), false, text));
    }
    for (a, b) in d.confounded_pairs() {
        let (ia, ib) = (ix(&a), ix(&b));
        let (a, b) = if ia < ib { (a, b) } else { (b, a) };
        lines.push((ia.min(ib), ia.max(ib), true, format!("edge: {a} <-> {b}")));
    }
    lines.sort();
    for (_, _, _, l) in lines {
        out.push_str(&l);
        out.push('\n');
    }
}

/// Comma- or whitespace-separated node names.
pub fn node_list(s: &str) -> NodeSet {
    s.split(|c: char| c == ',' || c.is_whitespace()).filter(|w| !w.is_empty()).collect()
}
