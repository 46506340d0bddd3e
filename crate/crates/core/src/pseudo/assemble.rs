//! Gluing rainbow stars into pseudo-copies.
//!
//! Two stars are adjacent when they share a host edge. Every component of
//! this star graph has the shape of `T`; walking it from its unique
//! `t_0`-star recovers the homomorphism.

use super::{PseudoCopy, PseudoDecomposition, PseudoError};
use crate::colouring::Colouring;
use crate::graph::{EdgeId, Graph, VertexId};
use crate::tree::{LabelledTree, TreeVertex};

/// Edges at `centre`, one per colour of `S(tree_vertex)`, in `S` order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Star {
    pub centre: VertexId,
    pub tree_vertex: TreeVertex,
    pub edges: Vec<EdgeId>,
}

fn check_star(
    g: &Graph,
    tree: &LabelledTree,
    col: &Colouring,
    id: usize,
    star: &Star,
) -> Result<(), PseudoError> {
    let bad = |reason: String| PseudoError::MalformedStar { star: id, reason };
    if star.tree_vertex >= tree.vertex_count() {
        return Err(bad(format!("unknown tree vertex t_{}", star.tree_vertex)));
    }
    if star.centre >= g.vertex_count() {
        return Err(bad(format!("unknown centre {}", star.centre)));
    }
    if g.side(star.centre) != tree.side(star.tree_vertex) {
        return Err(bad("centre and tree vertex are not compatible".into()));
    }
    let s = tree.incident(star.tree_vertex);
    if star.edges.len() != s.len() {
        return Err(bad(format!("{} edges, expected {}", star.edges.len(), s.len())));
    }
    for (&e, &c) in star.edges.iter().zip(s) {
        if e >= g.edge_count() {
            return Err(bad(format!("edge {e} out of range")));
        }
        if !g.endpoints(e).contains(&star.centre) {
            return Err(bad(format!("edge {} misses the centre", g.edge_label(e))));
        }
        if e >= col.len() || col.colour(e) != c {
            return Err(bad(format!("edge {} is not coloured {c}", g.edge_label(e))));
        }
    }
    Ok(())
}

/// Assembles stars into a pseudo-decomposition. Every edge must lie in
/// exactly two stars, one centred at each endpoint.
pub fn assemble(
    g: &Graph,
    tree: &LabelledTree,
    col: &Colouring,
    stars: &[Star],
) -> Result<PseudoDecomposition, PseudoError> {
    let m = tree.edge_count();
    // Per edge: (star id, position in the star).
    let mut owners: Vec<Vec<(usize, usize)>> = vec![Vec::new(); g.edge_count()];
    for (id, star) in stars.iter().enumerate() {
        check_star(g, tree, col, id, star)?;
        for (pos, &e) in star.edges.iter().enumerate() {
            owners[e].push((id, pos));
        }
    }
    for (e, own) in owners.iter().enumerate() {
        let ok = own.len() == 2 && stars[own[0].0].centre != stars[own[1].0].centre;
        if !ok {
            return Err(PseudoError::StarCoverage {
                edge: e,
                count: own.len(),
            });
        }
    }

    let mut visited = vec![false; stars.len()];
    let mut copies = Vec::new();
    for root in 0..stars.len() {
        if stars[root].tree_vertex != 0 || visited[root] {
            continue;
        }
        let mut image = vec![usize::MAX; m + 1];
        let mut edges = vec![usize::MAX; m];
        visited[root] = true;
        image[0] = stars[root].centre;
        let mut stack = vec![root];
        while let Some(s) = stack.pop() {
            let t = stars[s].tree_vertex;
            for (pos, &c) in tree.incident(t).iter().enumerate() {
                if c == t {
                    // e_t leads back to the parent star.
                    continue;
                }
                // c is a child label of t.
                let e = stars[s].edges[pos];
                let (other, _) = *owners[e]
                    .iter()
                    .find(|&&(id, _)| id != s)
                    .expect("two owners");
                if stars[other].tree_vertex != c {
                    return Err(PseudoError::MalformedComponent {
                        star: root,
                        reason: format!(
                            "edge {} joins stars of t_{t} and t_{}, expected t_{c}",
                            g.edge_label(e),
                            stars[other].tree_vertex
                        ),
                    });
                }
                if visited[other] {
                    return Err(PseudoError::MalformedComponent {
                        star: root,
                        reason: format!("star {other} reached twice"),
                    });
                }
                visited[other] = true;
                image[c] = stars[other].centre;
                edges[c - 1] = e;
                stack.push(other);
            }
        }
        copies.push(PseudoCopy::new(image, edges));
    }
    if let Some(orphan) = visited.iter().position(|&v| !v) {
        return Err(PseudoError::MalformedComponent {
            star: orphan,
            reason: "component has no t_0 star".into(),
        });
    }
    Ok(PseudoDecomposition::new(copies))
}
