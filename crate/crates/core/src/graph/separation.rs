//! m-separation in ancestral graphs (DAGs included).

use alloc::vec::Vec;

use super::{MixedGraph, NodeSet};
use crate::bits::Bits;
use crate::Result;

/// Whether `x` and `y` are m-separated given `z`. Marks must be tails and
/// arrowheads; `x`, `y`, `z` must be pairwise disjoint.
pub fn m_separated(g: &MixedGraph, x: &NodeSet, y: &NodeSet, z: &NodeSet) -> Result<bool> {
    Ok(!m_connected_ix(g, g.set_of(x)?, g.set_of(y)?, g.set_of(z)?))
}

/// Same question answered by enumerating every simple path.
pub fn m_separated_by_paths(g: &MixedGraph, x: &NodeSet, y: &NodeSet, z: &NodeSet) -> Result<bool> {
    let (xs, ys, zs) = (g.set_of(x)?, g.set_of(y)?, g.set_of(z)?);
    let an_z = g.ancestors_in(g.all(), zs);
    let mut found = false;
    for s in xs.iter() {
        let mut path = alloc::vec![s];
        simple_paths(g, &mut path, Bits::single(s), ys, &mut |p| {
            let open = (1..p.len() - 1).all(|k| {
                let (a, u, b) = (p[k - 1], p[k], p[k + 1]);
                if g.into_ix(a, u) && g.into_ix(b, u) {
                    an_z.contains(u)
                } else {
                    !zs.contains(u)
                }
            });
            found |= open;
            found
        });
        if found {
            break;
        }
    }
    Ok(!found)
}

// Depth-first enumeration of simple paths from the last node of `path`
// to any node of `targets`; `visit` returns true to stop.
pub(crate) fn simple_paths(
    g: &MixedGraph,
    path: &mut Vec<usize>,
    used: Bits,
    targets: Bits,
    visit: &mut dyn FnMut(&[usize]) -> bool,
) -> bool {
    let u = *path.last().unwrap_or(&0);
    for w in (g.neighbors(u) - used).iter() {
        path.push(w);
        let stop = if targets.contains(w) {
            visit(path)
        } else {
            simple_paths(g, path, used | Bits::single(w), targets, visit)
        };
        path.pop();
        if stop {
            return true;
        }
    }
    false
}

/// Reachability over (node, arrived-with-arrowhead) states; a collider
/// passes when it is an ancestor of `z`, a non-collider when outside `z`.
pub(crate) fn m_connected_ix(g: &MixedGraph, x: Bits, y: Bits, z: Bits) -> bool {
    let an_z = g.ancestors_in(g.all(), z);
    let n = g.node_count();
    let mut seen = alloc::vec![[false; 2]; n];
    let mut stack: Vec<(usize, bool)> = Vec::new();
    for s in x.iter() {
        for w in g.neighbors(s).iter() {
            let into = g.into_ix(s, w);
            if !seen[w][into as usize] {
                seen[w][into as usize] = true;
                stack.push((w, into));
            }
        }
    }
    while let Some((u, into)) = stack.pop() {
        if y.contains(u) {
            return true;
        }
        if x.contains(u) {
            continue;
        }
        for w in g.neighbors(u).iter() {
            let collider = into && g.into_ix(w, u);
            let pass = if collider { an_z.contains(u) } else { !z.contains(u) };
            if !pass {
                continue;
            }
            let next = g.into_ix(u, w);
            if !seen[w][next as usize] {
                seen[w][next as usize] = true;
                stack.push((w, next));
            }
        }
    }
    false
}
