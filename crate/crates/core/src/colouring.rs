//! Edge colourings by tree-edge labels, and the equitability condition.
//!
//! A colouring assigns every host edge a label in `1..=m`. It is equitable
//! when, for every host vertex `v` and every compatible tree vertex `t`,
//! all colours of `S(t)` occur equally often at `v`.

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use crate::graph::{ColourDegreeTable, EdgeId, Graph, GraphError, Side, VertexId};
use crate::pseudo::PseudoCopy;
use crate::seed;
use crate::tree::{LabelledTree, TreeEdge, TreeVertex};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ColouringError {
    #[error("edge {0} is not coloured")]
    UncolouredEdge(EdgeId),
    #[error("colour {colour} outside 1..={max}")]
    ColourOutOfRange { colour: usize, max: usize },
    #[error("line {line}: {message}")]
    Format { line: usize, message: String },
    #[error("copies must be at least 1")]
    NoCopies,
    #[error("could not embed copy {copy} without repeating an edge after {attempts} attempts")]
    EmbeddingFailed { copy: usize, attempts: usize },
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// An assignment of tree-edge labels to host edges, indexed by edge id.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Colouring {
    labels: Vec<TreeEdge>,
    colours: usize,
}

impl Colouring {
    pub fn new(labels: Vec<TreeEdge>, colours: usize) -> Result<Colouring, ColouringError> {
        if let Some(&bad) = labels.iter().find(|&&c| c == 0 || c > colours) {
            return Err(ColouringError::ColourOutOfRange {
                colour: bad,
                max: colours,
            });
        }
        Ok(Colouring { labels, colours })
    }

    pub fn colour(&self, e: EdgeId) -> TreeEdge {
        self.labels[e]
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn colour_count(&self) -> usize {
        self.colours
    }

    pub fn labels(&self) -> &[TreeEdge] {
        &self.labels
    }

    /// Fails with the first uncoloured edge if the colouring is not total on `g`.
    pub fn check_total(&self, g: &Graph) -> Result<(), ColouringError> {
        if self.labels.len() < g.edge_count() {
            return Err(ColouringError::UncolouredEdge(self.labels.len()));
        }
        Ok(())
    }

    /// Parses `u v colour` lines, with colours in `1..=colours`.
    pub fn parse(g: &Graph, text: &str, colours: usize) -> Result<Colouring, ColouringError> {
        let mut labels: Vec<Option<TreeEdge>> = vec![None; g.edge_count()];
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let format = |message: String| ColouringError::Format {
                line: lineno + 1,
                message,
            };
            let tokens: Vec<&str> = line.split_whitespace().collect();
            if tokens.len() != 3 {
                return Err(format(format!("expected `u v colour`, found {} fields", tokens.len())));
            }
            let u = g
                .vertex(tokens[0])
                .ok_or_else(|| format(format!("unknown vertex {}", tokens[0])))?;
            let v = g
                .vertex(tokens[1])
                .ok_or_else(|| format(format!("unknown vertex {}", tokens[1])))?;
            let e = g
                .edge_between(u, v)
                .ok_or_else(|| format(format!("no edge {}-{}", tokens[0], tokens[1])))?;
            let c: usize = tokens[2]
                .parse()
                .map_err(|_| format(format!("bad colour index {}", tokens[2])))?;
            if c == 0 || c > colours {
                return Err(ColouringError::ColourOutOfRange { colour: c, max: colours });
            }
            if labels[e].replace(c).is_some() {
                return Err(format(format!("edge {} coloured twice", g.edge_label(e))));
            }
        }
        let labels = labels
            .into_iter()
            .enumerate()
            .map(|(e, c)| c.ok_or(ColouringError::UncolouredEdge(e)))
            .collect::<Result<Vec<_>, _>>()?;
        Colouring::new(labels, colours)
    }

    pub fn to_text(&self, g: &Graph) -> String {
        let mut out = String::new();
        for (e, &[u, v]) in g.edges().iter().enumerate() {
            out.push_str(&format!("{} {} {}\n", g.name(u), g.name(v), self.labels[e]));
        }
        out
    }
}

/// `v` and `t` are compatible when they lie in corresponding classes.
pub fn compatible(g: &Graph, v: VertexId, tree: &LabelledTree, t: TreeVertex) -> bool {
    g.side(v) == tree.side(t)
}

/// One failure of equitability: `d_j(v) != d_k(v)` for `j, k` in `S(t)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EquitableViolation {
    pub vertex: VertexId,
    pub tree_vertex: TreeVertex,
    pub colour_j: TreeEdge,
    pub colour_k: TreeEdge,
    pub degree_j: usize,
    pub degree_k: usize,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EquitableError {
    #[error("edge {0} is not coloured")]
    UncolouredEdge(EdgeId),
    #[error("colouring is not equitable ({} violations)", .0.len())]
    Violations(Vec<EquitableViolation>),
}

/// Checks equitability directly from the definition. Every pair `j < k` in
/// `S(t)` with differing colour degrees is reported.
pub fn verify_equitable(
    g: &Graph,
    tree: &LabelledTree,
    col: &Colouring,
) -> Result<(), EquitableError> {
    if col.len() < g.edge_count() {
        return Err(EquitableError::UncolouredEdge(col.len()));
    }
    let table = ColourDegreeTable::new(g, col).map_err(|_| EquitableError::UncolouredEdge(col.len()))?;
    let mut violations = Vec::new();
    for v in g.vertices() {
        for t in 0..tree.vertex_count() {
            if !compatible(g, v, tree, t) {
                continue;
            }
            let s = tree.incident(t);
            for (a, &j) in s.iter().enumerate() {
                for &k in &s[a + 1..] {
                    let (dj, dk) = (table.get(v, j), table.get(v, k));
                    if dj != dk {
                        violations.push(EquitableViolation {
                            vertex: v,
                            tree_vertex: t,
                            colour_j: j,
                            colour_k: k,
                            degree_j: dj,
                            degree_k: dk,
                        });
                    }
                }
            }
        }
    }
    if violations.is_empty() {
        Ok(())
    } else {
        Err(EquitableError::Violations(violations))
    }
}

/// Outcome of the exact equitable-colouring search.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EquitableSearch {
    Found(Colouring),
    Unsat,
    BudgetExhausted { nodes: u64 },
}

struct Search<'a> {
    g: &'a Graph,
    tree: &'a LabelledTree,
    order: Vec<EdgeId>,
    labels: Vec<TreeEdge>,
    /// counts[v * (m + 1) + c]
    counts: Vec<usize>,
    remaining: Vec<usize>,
    /// Group sizes |S(t)| per class, used for the completion check.
    group_sizes: [Vec<usize>; 2],
    nodes: u64,
    budget: u64,
}

enum Step {
    Found,
    Dead,
    OutOfBudget,
}

impl Search<'_> {
    fn m(&self) -> usize {
        self.tree.edge_count()
    }

    /// Can the partial counts at `v` still be completed to a balanced state?
    fn feasible_at(&self, v: VertexId) -> bool {
        let m = self.m();
        let side = self.g.side(v);
        let base = v * (m + 1);
        let mut need = 0;
        for t in 0..self.tree.vertex_count() {
            if self.tree.side(t) != side {
                continue;
            }
            let s = self.tree.incident(t);
            let top = s.iter().map(|&c| self.counts[base + c]).max().unwrap_or(0);
            need += s.iter().map(|&c| top - self.counts[base + c]).sum::<usize>();
        }
        let r = self.remaining[v];
        if need > r {
            return false;
        }
        let slack = r - need;
        if slack == 0 {
            return true;
        }
        let sizes = &self.group_sizes[(side == Side::B) as usize];
        if sizes.contains(&1) {
            return true;
        }
        let mut reach = vec![false; slack + 1];
        reach[0] = true;
        for x in 1..=slack {
            reach[x] = sizes.iter().any(|&s| s <= x && reach[x - s]);
        }
        reach[slack]
    }

    fn run(&mut self, pos: usize) -> Step {
        if pos == self.order.len() {
            return Step::Found;
        }
        let e = self.order[pos];
        let [a, b] = self.g.endpoints(e);
        let m = self.m();
        for c in 1..=m {
            if self.nodes >= self.budget {
                return Step::OutOfBudget;
            }
            self.nodes += 1;
            self.labels[e] = c;
            self.counts[a * (m + 1) + c] += 1;
            self.counts[b * (m + 1) + c] += 1;
            self.remaining[a] -= 1;
            self.remaining[b] -= 1;
            if self.feasible_at(a) && self.feasible_at(b) {
                match self.run(pos + 1) {
                    Step::Dead => {}
                    other => return other,
                }
            }
            self.counts[a * (m + 1) + c] -= 1;
            self.counts[b * (m + 1) + c] -= 1;
            self.remaining[a] += 1;
            self.remaining[b] += 1;
        }
        self.labels[e] = 0;
        Step::Dead
    }
}

/// Exact backtracking search for an equitable colouring. Edges are taken
/// in order of (smaller endpoint degree, id) and colours in label order;
/// `budget` bounds the number of colour assignments tried.
pub fn find_equitable(g: &Graph, tree: &LabelledTree, budget: u64) -> EquitableSearch {
    let m = tree.edge_count();
    let mut order: Vec<EdgeId> = (0..g.edge_count()).collect();
    order.sort_by_key(|&e| {
        let [a, b] = g.endpoints(e);
        (g.degree(a).min(g.degree(b)), e)
    });
    let group_sizes = [Side::A, Side::B].map(|side| {
        (0..tree.vertex_count())
            .filter(|&t| tree.side(t) == side)
            .map(|t| tree.degree(t))
            .collect::<Vec<_>>()
    });
    let mut search = Search {
        g,
        tree,
        order,
        labels: vec![0; g.edge_count()],
        counts: vec![0; g.vertex_count() * (m + 1)],
        remaining: g.vertices().map(|v| g.degree(v)).collect(),
        group_sizes,
        nodes: 0,
        budget,
    };
    // Vertices with no edges are trivially balanced; a vertex whose degree
    // cannot be split into group sizes is infeasible from the start.
    if !g.vertices().all(|v| search.feasible_at(v)) {
        return EquitableSearch::Unsat;
    }
    match search.run(0) {
        Step::Found => {
            let col = Colouring::new(search.labels, m).expect("labels in range");
            debug_assert!(verify_equitable(g, tree, &col).is_ok());
            EquitableSearch::Found(col)
        }
        Step::Dead => EquitableSearch::Unsat,
        Step::OutOfBudget => EquitableSearch::BudgetExhausted {
            nodes: search.nodes,
        },
    }
}

/// A host graph built as an edge-disjoint union of embedded copies of `T`,
/// together with the induced colouring and the planted decomposition.
#[derive(Clone, Debug)]
pub struct PlantedInstance {
    pub graph: Graph,
    pub colouring: Colouring,
    pub planted: Vec<PseudoCopy>,
}

/// Attempts per copy before giving up.
pub const EMBED_ATTEMPTS: usize = 100;

/// Generates a planted instance. `T_A` vertices are mapped into a pool
/// `a0..` of size `a_pool` and `T_B` vertices into `b0..`. Each copy is
/// embedded vertex by vertex in label order, picking uniformly among pool
/// vertices that keep the copy injective and the host simple; a dead end
/// restarts the copy, up to [`EMBED_ATTEMPTS`] times.
pub fn synth_instance(
    tree: &LabelledTree,
    copies: usize,
    a_pool: usize,
    b_pool: usize,
    master_seed: u64,
) -> Result<PlantedInstance, ColouringError> {
    if copies == 0 {
        return Err(ColouringError::NoCopies);
    }
    let m = tree.edge_count();
    let mut rng = seed::rng(master_seed, &[seed::domain::SYNTH]);
    let pool = |side: Side| if side == Side::A { a_pool } else { b_pool };
    let mut used: HashSet<(usize, usize)> = HashSet::new();
    // (a index, b index) per edge, in creation order.
    let mut edges: Vec<(usize, usize)> = Vec::with_capacity(copies * m);
    let mut images: Vec<Vec<usize>> = Vec::with_capacity(copies);

    let pair = |t_side: Side, x: usize, y: usize| if t_side == Side::A { (x, y) } else { (y, x) };

    for copy in 0..copies {
        let mut embedded = None;
        'attempt: for _ in 0..EMBED_ATTEMPTS {
            let mut image = vec![usize::MAX; m + 1];
            let root_pool = pool(tree.side(0));
            if root_pool == 0 {
                break;
            }
            image[0] = rng.gen_range(0..root_pool);
            for j in 1..=m {
                let side = tree.side(j);
                let p = image[tree.parent(j)];
                let candidates: Vec<usize> = (0..pool(side))
                    .filter(|&x| {
                        (0..j).all(|k| tree.side(k) != side || image[k] != x)
                            && !used.contains(&pair(side, x, p))
                    })
                    .collect();
                match candidates.choose(&mut rng) {
                    Some(&x) => image[j] = x,
                    None => continue 'attempt,
                }
            }
            embedded = Some(image);
            break;
        }
        let image = embedded.ok_or(ColouringError::EmbeddingFailed {
            copy,
            attempts: EMBED_ATTEMPTS,
        })?;
        for j in 1..=m {
            let e = pair(tree.side(j), image[j], image[tree.parent(j)]);
            used.insert(e);
            edges.push(e);
        }
        images.push(image);
    }

    let named: Vec<(String, String)> = edges
        .iter()
        .map(|&(a, b)| (format!("a{a}"), format!("b{b}")))
        .collect();
    let declared: Vec<(String, Side)> = named
        .iter()
        .flat_map(|(a, b)| [(a.clone(), Side::A), (b.clone(), Side::B)])
        .collect();
    let graph = Graph::from_edges_with_sides(&named, &declared)?;
    let labels: Vec<TreeEdge> = (0..copies).flat_map(|_| 1..=m).collect();
    let colouring = Colouring::new(labels, m)?;
    let planted = images
        .iter()
        .enumerate()
        .map(|(k, image)| {
            let image = (0..=m)
                .map(|j| {
                    let prefix = if tree.side(j) == Side::A { 'a' } else { 'b' };
                    graph
                        .vertex(&format!("{prefix}{}", image[j]))
                        .expect("embedded vertex is in the graph")
                })
                .collect();
            let edges = (0..m).map(|i| k * m + i).collect();
            PseudoCopy::new(image, edges)
        })
        .collect();
    Ok(PlantedInstance {
        graph,
        colouring,
        planted,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c4() -> Graph {
        Graph::from_edges(&[("a1", "b1"), ("a1", "b2"), ("a2", "b1"), ("a2", "b2")]).unwrap()
    }

    fn cherry() -> LabelledTree {
        LabelledTree::label(&[("c", "x"), ("c", "y")], "c").unwrap()
    }

    #[test]
    fn alternating_c4_is_equitable() {
        let col = Colouring::new(vec![1, 2, 2, 1], 2).unwrap();
        assert_eq!(verify_equitable(&c4(), &cherry(), &col), Ok(()));
    }

    #[test]
    fn unbalanced_centre_is_reported() {
        let g = c4();
        let col = Colouring::new(vec![1, 1, 2, 1], 2).unwrap();
        let err = verify_equitable(&g, &cherry(), &col).unwrap_err();
        assert_eq!(
            err,
            EquitableError::Violations(vec![EquitableViolation {
                vertex: g.vertex("a1").unwrap(),
                tree_vertex: 0,
                colour_j: 1,
                colour_k: 2,
                degree_j: 2,
                degree_k: 0,
            }])
        );
    }

    #[test]
    fn empty_graph_is_equitable() {
        let g = Graph::from_edges::<&str>(&[]).unwrap();
        let col = Colouring::new(vec![], 2).unwrap();
        assert_eq!(verify_equitable(&g, &cherry(), &col), Ok(()));
        assert_eq!(find_equitable(&g, &cherry(), 10), EquitableSearch::Found(col));
    }

    #[test]
    fn missing_colour_is_an_error() {
        let col = Colouring::new(vec![1, 2], 2).unwrap();
        assert_eq!(
            verify_equitable(&c4(), &cherry(), &col),
            Err(EquitableError::UncolouredEdge(2))
        );
        assert!(matches!(
            Colouring::new(vec![3], 2),
            Err(ColouringError::ColourOutOfRange { colour: 3, max: 2 })
        ));
    }

    #[test]
    fn search_examples() {
        match find_equitable(&c4(), &cherry(), 1_000) {
            EquitableSearch::Found(col) => {
                // Any colouring giving each A-vertex one edge of each colour.
                let l = col.labels();
                assert!(l[0] != l[1] && l[2] != l[3]);
                assert_eq!(verify_equitable(&c4(), &cherry(), &col), Ok(()));
            }
            other => panic!("expected a colouring, got {other:?}"),
        }
        let single = Graph::from_edges(&[("a", "b")]).unwrap();
        assert_eq!(find_equitable(&single, &cherry(), 1_000), EquitableSearch::Unsat);
        let edge = LabelledTree::label(&[("u", "v")], "u").unwrap();
        assert_eq!(
            find_equitable(&single, &edge, 1_000),
            EquitableSearch::Found(Colouring::new(vec![1], 1).unwrap())
        );
        assert!(matches!(
            find_equitable(&c4(), &cherry(), 1),
            EquitableSearch::BudgetExhausted { .. }
        ));
    }

    #[test]
    fn colouring_text_round_trip() {
        let g = c4();
        let col = Colouring::new(vec![1, 2, 2, 1], 2).unwrap();
        assert_eq!(Colouring::parse(&g, &col.to_text(&g), 2).unwrap(), col);
        assert_eq!(
            Colouring::parse(&g, "a1 b1 1\n", 2),
            Err(ColouringError::UncolouredEdge(1))
        );
        assert!(matches!(
            Colouring::parse(&g, "a1 b1 1\nb1 a1 2\n", 2),
            Err(ColouringError::Format { line: 2, .. })
        ));
    }

    #[test]
    fn synth_examples() {
        let t = cherry();
        let inst = synth_instance(&t, 2, 2, 2, 7).unwrap();
        assert_eq!(inst.graph.edge_count(), 4);
        assert_eq!(verify_equitable(&inst.graph, &t, &inst.colouring), Ok(()));

        let one = synth_instance(&t, 1, 3, 3, 1).unwrap();
        assert_eq!(one.graph.edge_count(), 2);
        assert_eq!(one.graph.vertex_count(), 3);
        assert_eq!(one.colouring.labels(), &[1, 2]);

        assert_eq!(synth_instance(&t, 0, 2, 2, 1).unwrap_err(), ColouringError::NoCopies);
        assert!(matches!(
            synth_instance(&t, 2, 1, 1, 1),
            Err(ColouringError::EmbeddingFailed { .. })
        ));
    }
}
