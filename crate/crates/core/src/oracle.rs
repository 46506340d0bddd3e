//! Ground truth: validity checks for pseudo-copies and decompositions, and
//! an exhaustive `T`-decomposition search for small hosts.

use std::collections::HashSet;
use std::fmt;

use serde::Serialize;

use crate::colouring::Colouring;
use crate::graph::{Graph, VertexId};
use crate::pseudo::PseudoCopy;
use crate::tree::{LabelledTree, TreeVertex};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum ViolationKind {
    NotPartition,
    NotHomomorphism,
    NotInjective,
    WrongBipartition,
    ColourMismatch,
}

impl fmt::Display for ViolationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ViolationKind::NotPartition => "NotPartition",
            ViolationKind::NotHomomorphism => "NotHomomorphism",
            ViolationKind::NotInjective => "NotInjective",
            ViolationKind::WrongBipartition => "WrongBipartition",
            ViolationKind::ColourMismatch => "ColourMismatch",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub kind: ViolationKind,
    /// Index of the offending copy, when the violation belongs to one.
    pub copy: Option<usize>,
    pub detail: String,
}

impl Violation {
    fn new(kind: ViolationKind, detail: impl Into<String>) -> Violation {
        Violation {
            kind,
            copy: None,
            detail: detail.into(),
        }
    }
}

/// Checks that `h` is a pseudo-copy of `T` in `g`: edges distinct, images
/// in the right classes, every `e_i` carried by an edge between the images
/// of its endpoints, and, when a colouring is given, `col(h(e_i)) = i`.
pub fn verify_pseudo(
    g: &Graph,
    tree: &LabelledTree,
    h: &PseudoCopy,
    col: Option<&Colouring>,
) -> Result<(), Violation> {
    use ViolationKind::*;
    let m = tree.edge_count();
    if h.tree_size() != m {
        return Err(Violation::new(
            NotHomomorphism,
            format!("copy has {} edges, tree has {m}", h.tree_size()),
        ));
    }
    if let Some(&v) = h.images().iter().find(|&&v| v >= g.vertex_count()) {
        return Err(Violation::new(NotHomomorphism, format!("vertex {v} out of range")));
    }
    if let Some(&e) = h.edges().iter().find(|&&e| e >= g.edge_count()) {
        return Err(Violation::new(NotHomomorphism, format!("edge {e} out of range")));
    }
    let mut seen = HashSet::new();
    for i in 1..=m {
        if !seen.insert(h.edge(i)) {
            return Err(Violation::new(
                NotInjective,
                format!("edge {} carries two tree edges", g.edge_label(h.edge(i))),
            ));
        }
    }
    for t in 0..=m {
        if g.side(h.image(t)) != tree.side(t) {
            return Err(Violation::new(
                WrongBipartition,
                format!(
                    "t_{t} in class {} maps to {} in class {}",
                    tree.side(t),
                    g.name(h.image(t)),
                    g.side(h.image(t))
                ),
            ));
        }
    }
    for i in 1..=m {
        let [a, b] = g.endpoints(h.edge(i));
        let (x, y) = (h.image(i), h.image(tree.parent(i)));
        if !((a == x && b == y) || (a == y && b == x)) {
            return Err(Violation::new(
                NotHomomorphism,
                format!(
                    "e_{i} maps to {} but its endpoints map to {} and {}",
                    g.edge_label(h.edge(i)),
                    g.name(x),
                    g.name(y)
                ),
            ));
        }
    }
    if let Some(col) = col {
        for i in 1..=m {
            let e = h.edge(i);
            if e >= col.len() || col.colour(e) != i {
                return Err(Violation::new(
                    ColourMismatch,
                    format!("e_{i} maps to {} which is not coloured {i}", g.edge_label(e)),
                ));
            }
        }
    }
    Ok(())
}

/// Checks that `copies` partition `E(g)` into genuine copies of `T`.
/// An empty result means the decomposition is valid.
pub fn verify_decomposition(
    g: &Graph,
    tree: &LabelledTree,
    copies: &[PseudoCopy],
    col: Option<&Colouring>,
) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut owner: Vec<Option<usize>> = vec![None; g.edge_count()];
    for (k, h) in copies.iter().enumerate() {
        if let Err(mut v) = verify_pseudo(g, tree, h, col) {
            v.copy = Some(k);
            out.push(v);
            continue;
        }
        for &e in h.edges() {
            if let Some(prev) = owner[e] {
                out.push(Violation {
                    kind: ViolationKind::NotPartition,
                    copy: Some(k),
                    detail: format!("edge {} already used by copy {prev}", g.edge_label(e)),
                });
            } else {
                owner[e] = Some(k);
            }
        }
        let good = h.goodness();
        if good < tree.edge_count() {
            out.push(Violation {
                kind: ViolationKind::NotInjective,
                copy: Some(k),
                detail: format!("goodness {good} < {}", tree.edge_count()),
            });
        }
    }
    for (e, o) in owner.iter().enumerate() {
        if o.is_none() && out.iter().all(|v| v.kind != ViolationKind::NotHomomorphism) {
            out.push(Violation::new(
                ViolationKind::NotPartition,
                format!("edge {} is not covered", g.edge_label(e)),
            ));
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OracleLimits {
    pub max_edges: usize,
    pub node_budget: u64,
}

impl Default for OracleLimits {
    fn default() -> Self {
        OracleLimits {
            max_edges: 24,
            node_budget: 50_000_000,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OracleOutcome {
    Found(Vec<PseudoCopy>),
    /// Proven: no `T`-decomposition respecting the bipartition exists.
    NoDecomposition,
    BudgetExhausted { nodes: u64 },
    TooLarge { edges: usize, max_edges: usize },
}

/// Every embedding of `T` (respecting classes) that uses edge `e`, one per
/// distinct edge set.
fn embeddings_through(g: &Graph, tree: &LabelledTree, e: usize) -> Vec<(u64, PseudoCopy)> {
    let m = tree.edge_count();
    let mut out: Vec<(u64, PseudoCopy)> = Vec::new();
    let mut masks = HashSet::new();
    let tree_nbrs = |t: TreeVertex| -> Vec<(TreeVertex, usize)> {
        tree.incident(t)
            .iter()
            .map(|&c| (tree.other_endpoint(c, t), c))
            .collect()
    };
    for k in 1..=m {
        let [x, y] = g.endpoints(e);
        let (tk, tp) = (k, tree.parent(k));
        let (vk, vp) = if g.side(x) == tree.side(tk) { (x, y) } else { (y, x) };
        if g.side(vk) != tree.side(tk) || g.side(vp) != tree.side(tp) {
            continue;
        }
        // Order the remaining tree vertices by BFS from e_k; each has an
        // earlier tree neighbour through which it is reached.
        let mut order: Vec<(TreeVertex, TreeVertex, usize)> = Vec::new();
        let mut placed = vec![false; m + 1];
        placed[tk] = true;
        placed[tp] = true;
        let mut frontier = vec![tk, tp];
        let mut head = 0;
        while head < frontier.len() {
            let t = frontier[head];
            head += 1;
            for (w, c) in tree_nbrs(t) {
                if !placed[w] {
                    placed[w] = true;
                    order.push((w, t, c));
                    frontier.push(w);
                }
            }
        }
        let mut image = vec![usize::MAX; m + 1];
        let mut edges = vec![usize::MAX; m];
        image[tk] = vk;
        image[tp] = vp;
        edges[k - 1] = e;
        let mut used: HashSet<VertexId> = HashSet::from([vk, vp]);
        extend(
            g, &order, 0, &mut image, &mut edges, &mut used, &mut out, &mut masks,
        );
    }
    out
}

#[allow(clippy::too_many_arguments)]
fn extend(
    g: &Graph,
    order: &[(TreeVertex, TreeVertex, usize)],
    pos: usize,
    image: &mut Vec<VertexId>,
    edges: &mut Vec<usize>,
    used: &mut HashSet<VertexId>,
    out: &mut Vec<(u64, PseudoCopy)>,
    masks: &mut HashSet<u64>,
) {
    if pos == order.len() {
        let mask = edges.iter().fold(0u64, |acc, &e| acc | (1u64 << e));
        if masks.insert(mask) {
            out.push((mask, PseudoCopy::new(image.clone(), edges.clone())));
        }
        return;
    }
    let (w, via, c) = order[pos];
    let mut candidates: Vec<(VertexId, usize)> = g.incident(image[via]).to_vec();
    candidates.sort_unstable();
    for (u, e) in candidates {
        if used.contains(&u) {
            continue;
        }
        used.insert(u);
        image[w] = u;
        edges[c - 1] = e;
        extend(g, order, pos + 1, image, edges, used, out, masks);
        used.remove(&u);
    }
    image[w] = usize::MAX;
    edges[c - 1] = usize::MAX;
}

/// Exhaustive search: cover the lowest uncovered edge with every embedding
/// of `T` through it that avoids covered edges, and recurse.
pub fn brute_force_decompose(g: &Graph, tree: &LabelledTree, limits: OracleLimits) -> OracleOutcome {
    let m = tree.edge_count();
    let n_edges = g.edge_count();
    if n_edges > limits.max_edges.min(64) {
        return OracleOutcome::TooLarge {
            edges: n_edges,
            max_edges: limits.max_edges.min(64),
        };
    }
    if !n_edges.is_multiple_of(m) {
        return OracleOutcome::NoDecomposition;
    }
    let full: u64 = if n_edges == 64 { u64::MAX } else { (1u64 << n_edges) - 1 };
    let mut memo: Vec<Option<Vec<(u64, PseudoCopy)>>> = vec![None; n_edges];
    let mut chosen: Vec<usize> = Vec::new();
    let mut picks: Vec<PseudoCopy> = Vec::new();
    let mut nodes = (0u64, limits.node_budget);

    enum Res {
        Found,
        Dead,
        Budget,
    }

    fn rec(
        g: &Graph,
        tree: &LabelledTree,
        covered: u64,
        full: u64,
        memo: &mut Vec<Option<Vec<(u64, PseudoCopy)>>>,
        picks: &mut Vec<PseudoCopy>,
        // (nodes used, node limit)
        nodes: &mut (u64, u64),
    ) -> Res {
        if covered == full {
            return Res::Found;
        }
        let e = (!covered & full).trailing_zeros() as usize;
        if memo[e].is_none() {
            memo[e] = Some(embeddings_through(g, tree, e));
        }
        let count = memo[e].as_ref().map_or(0, Vec::len);
        for idx in 0..count {
            let (mask, copy) = {
                let (mask, copy) = &memo[e].as_ref().expect("memoized")[idx];
                (*mask, copy.clone())
            };
            if mask & covered != 0 {
                continue;
            }
            if nodes.0 >= nodes.1 {
                return Res::Budget;
            }
            nodes.0 += 1;
            picks.push(copy);
            match rec(g, tree, covered | mask, full, memo, picks, nodes) {
                Res::Dead => {
                    picks.pop();
                }
                other => return other,
            }
        }
        Res::Dead
    }

    let _ = &mut chosen;
    match rec(
        g,
        tree,
        0,
        full,
        &mut memo,
        &mut picks,
        &mut nodes,
    ) {
        Res::Found => OracleOutcome::Found(picks),
        Res::Dead => OracleOutcome::NoDecomposition,
        Res::Budget => OracleOutcome::BudgetExhausted { nodes: nodes.0 },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::colouring::synth_instance;

    fn c4() -> Graph {
        Graph::from_edges(&[("a1", "b1"), ("a1", "b2"), ("a2", "b1"), ("a2", "b2")]).unwrap()
    }

    fn cherry() -> LabelledTree {
        LabelledTree::label(&[("c", "x"), ("c", "y")], "c").unwrap()
    }

    #[test]
    fn c4_two_cherries_verify() {
        let g = c4();
        let copies = vec![
            PseudoCopy::new(vec![0, 1, 2], vec![0, 1]),
            PseudoCopy::new(vec![3, 1, 2], vec![2, 3]),
        ];
        assert!(verify_decomposition(&g, &cherry(), &copies, None).is_empty());
        let twice = vec![copies[0].clone(), copies[0].clone()];
        let v = verify_decomposition(&g, &cherry(), &twice, None);
        assert!(v.iter().any(|x| x.kind == ViolationKind::NotPartition));
    }

    #[test]
    fn four_cycle_is_not_a_path() {
        // Path t0..t4 mapped around a 4-cycle b1,a1,b2,a2,b1.
        let g = Graph::from_edges(&[("b1", "a1"), ("a1", "b2"), ("b2", "a2"), ("a2", "b1")]).unwrap();
        let path = LabelledTree::from_parents(&[0, 1, 2, 3]).unwrap();
        let copy = PseudoCopy::new(vec![0, 1, 2, 3, 0], vec![0, 1, 2, 3]);
        assert_eq!(verify_pseudo(&g, &path, &copy, None), Ok(()));
        let v = verify_decomposition(&g, &path, &[copy], None);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].kind, ViolationKind::NotInjective);
        assert!(v[0].detail.contains("goodness 3 < 4"));
    }

    #[test]
    fn pseudo_violations() {
        let t = cherry();
        let inst = synth_instance(&t, 3, 4, 4, 2).unwrap();
        for h in &inst.planted {
            assert_eq!(verify_pseudo(&inst.graph, &t, h, Some(&inst.colouring)), Ok(()));
        }
        let g = c4();
        let same_edge = PseudoCopy::new(vec![0, 1, 1], vec![0, 0]);
        assert_eq!(
            verify_pseudo(&g, &t, &same_edge, None).unwrap_err().kind,
            ViolationKind::NotInjective
        );
        // a2 is in A, t_1 is in T_B.
        let wrong_side = PseudoCopy::new(vec![0, 3, 2], vec![0, 1]);
        assert_eq!(
            verify_pseudo(&g, &t, &wrong_side, None).unwrap_err().kind,
            ViolationKind::WrongBipartition
        );
        let col = Colouring::new(vec![2, 1, 1, 2], 2).unwrap();
        let ok = PseudoCopy::new(vec![0, 1, 2], vec![0, 1]);
        assert_eq!(
            verify_pseudo(&g, &t, &ok, Some(&col)).unwrap_err().kind,
            ViolationKind::ColourMismatch
        );
    }

    #[test]
    fn oracle_examples() {
        let c6 = Graph::from_edges(&[
            ("a1", "b1"),
            ("b1", "a2"),
            ("a2", "b2"),
            ("b2", "a3"),
            ("a3", "b3"),
            ("b3", "a1"),
        ])
        .unwrap();
        let p3 = LabelledTree::label(&[("x", "y"), ("y", "z"), ("z", "w")], "y").unwrap();
        match brute_force_decompose(&c6, &p3, OracleLimits::default()) {
            OracleOutcome::Found(copies) => {
                assert_eq!(copies.len(), 2);
                assert!(verify_decomposition(&c6, &p3, &copies, None).is_empty());
            }
            other => panic!("expected a decomposition, got {other:?}"),
        }
        let k13 = Graph::from_edges(&[("a", "b1"), ("a", "b2"), ("a", "b3")]).unwrap();
        assert_eq!(
            brute_force_decompose(&k13, &cherry(), OracleLimits::default()),
            OracleOutcome::NoDecomposition
        );
        let t = cherry();
        let one = synth_instance(&t, 1, 2, 2, 0).unwrap();
        assert_eq!(
            brute_force_decompose(&one.graph, &t, OracleLimits::default()),
            OracleOutcome::Found(one.planted.clone())
        );
    }
}
