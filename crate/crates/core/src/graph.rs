//! Host graphs: simple undirected bipartite graphs with a fixed bipartition.
//!
//! Vertices are identified by name in the input and by dense indices
//! everywhere else. Edge ids follow input order and are stable across
//! every structure derived from the graph.

use std::collections::{HashMap, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::colouring::Colouring;

pub type VertexId = usize;
pub type EdgeId = usize;

/// Bipartition class of a host vertex.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Side {
    A,
    B,
}

impl Side {
    pub fn other(self) -> Side {
        match self {
            Side::A => Side::B,
            Side::B => Side::A,
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Side::A => f.write_str("A"),
            Side::B => f.write_str("B"),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("line {line}: {message}")]
    Format { line: usize, message: String },
    #[error("duplicate edge {0}-{1}")]
    DuplicateEdge(String, String),
    #[error("self-loop at {0}")]
    SelfLoop(String),
    #[error("graph is not bipartite; odd cycle {}", .cycle.join("-"))]
    NotBipartite { cycle: Vec<String> },
    #[error("vertex {vertex} declared in class {declared} but the bipartition puts it in {computed}")]
    PartitionMismatch {
        vertex: String,
        declared: Side,
        computed: Side,
    },
    #[error("declared vertex {0} does not occur in any edge")]
    DeclaredUnknown(String),
    #[error("unknown vertex {0}")]
    UnknownVertex(String),
    #[error("vertex index {0} out of range")]
    VertexOutOfRange(VertexId),
    #[error("edge {0} is not coloured")]
    UncolouredEdge(EdgeId),
    #[error("graph has {0} vertices; at least 2 are required")]
    TooSmall(usize),
}

/// A simple bipartite graph with classes `A` and `B`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    names: Vec<String>,
    index: HashMap<String, VertexId>,
    sides: Vec<Side>,
    edges: Vec<[VertexId; 2]>,
    adjacency: Vec<Vec<(VertexId, EdgeId)>>,
    lookup: HashMap<(VertexId, VertexId), EdgeId>,
}

fn key(u: VertexId, v: VertexId) -> (VertexId, VertexId) {
    if u < v {
        (u, v)
    } else {
        (v, u)
    }
}

impl Graph {
    /// Builds a graph from named edges. Vertices are indexed in order of
    /// first appearance and the bipartition is computed by 2-colouring,
    /// with the first vertex of every component placed in `A`.
    pub fn from_edges<S: AsRef<str>>(pairs: &[(S, S)]) -> Result<Graph, GraphError> {
        Self::from_edges_with_sides(pairs, &[] as &[(&str, Side)])
    }

    /// Like [`Graph::from_edges`], but orients each component so that the
    /// declared vertices land in their declared class. A declaration that
    /// contradicts the computed 2-colouring is an error.
    pub fn from_edges_with_sides<S: AsRef<str>, D: AsRef<str>>(
        pairs: &[(S, S)],
        declared: &[(D, Side)],
    ) -> Result<Graph, GraphError> {
        let mut names: Vec<String> = Vec::new();
        let mut index: HashMap<String, VertexId> = HashMap::new();
        let mut edges = Vec::with_capacity(pairs.len());
        let mut lookup = HashMap::with_capacity(pairs.len());

        let mut intern = |name: &str, names: &mut Vec<String>| -> VertexId {
            if let Some(&id) = index.get(name) {
                return id;
            }
            let id = names.len();
            names.push(name.to_string());
            index.insert(name.to_string(), id);
            id
        };

        for (u, v) in pairs {
            let (u, v) = (u.as_ref(), v.as_ref());
            if u == v {
                return Err(GraphError::SelfLoop(u.to_string()));
            }
            let a = intern(u, &mut names);
            let b = intern(v, &mut names);
            if lookup.insert(key(a, b), edges.len()).is_some() {
                return Err(GraphError::DuplicateEdge(u.to_string(), v.to_string()));
            }
            edges.push([a, b]);
        }

        let mut adjacency = vec![Vec::new(); names.len()];
        for (id, &[a, b]) in edges.iter().enumerate() {
            adjacency[a].push((b, id));
            adjacency[b].push((a, id));
        }

        // Rebuild the index; the closure above borrowed it mutably.
        let index: HashMap<String, VertexId> =
            names.iter().enumerate().map(|(i, n)| (n.clone(), i)).collect();

        let (sides, component) = two_colour(&names, &adjacency)?;
        let mut sides = sides;

        if !declared.is_empty() {
            let mut wanted: HashMap<VertexId, Side> = HashMap::new();
            for (name, side) in declared {
                let name = name.as_ref();
                let &v = index
                    .get(name)
                    .ok_or_else(|| GraphError::DeclaredUnknown(name.to_string()))?;
                wanted.insert(v, *side);
            }
            let components = component.iter().copied().max().map_or(0, |c| c + 1);
            let mut flip = vec![None; components];
            for v in 0..names.len() {
                if let Some(&side) = wanted.get(&v) {
                    let c = component[v];
                    if flip[c].is_none() {
                        flip[c] = Some(side != sides[v]);
                    }
                }
            }
            for v in 0..names.len() {
                if flip[component[v]] == Some(true) {
                    sides[v] = sides[v].other();
                }
            }
            for v in 0..names.len() {
                if let Some(&side) = wanted.get(&v) {
                    if side != sides[v] {
                        return Err(GraphError::PartitionMismatch {
                            vertex: names[v].clone(),
                            declared: side,
                            computed: sides[v],
                        });
                    }
                }
            }
        }

        Ok(Graph {
            names,
            index,
            sides,
            edges,
            adjacency,
            lookup,
        })
    }

    /// Parses the edge-list text format. Lines starting with `#` are
    /// comments, except `#@A name...` and `#@B name...` which declare
    /// bipartition classes.
    pub fn parse(text: &str) -> Result<Graph, GraphError> {
        let mut pairs = Vec::new();
        let mut declared = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix("#@") {
                let mut tokens = rest.split_whitespace();
                let side = match tokens.next() {
                    Some("A") => Side::A,
                    Some("B") => Side::B,
                    _ => {
                        return Err(GraphError::Format {
                            line: lineno + 1,
                            message: "class declaration must start with #@A or #@B".into(),
                        })
                    }
                };
                declared.extend(tokens.map(|t| (t.to_string(), side)));
                continue;
            }
            if line.starts_with('#') {
                continue;
            }
            let tokens: Vec<&str> = line.split_whitespace().collect();
            if tokens.len() != 2 {
                return Err(GraphError::Format {
                    line: lineno + 1,
                    message: format!("expected two vertex names, found {}", tokens.len()),
                });
            }
            pairs.push((tokens[0].to_string(), tokens[1].to_string()));
        }
        Self::from_edges_with_sides(&pairs, &declared)
    }

    /// Writes the graph in the edge-list format, with class declarations.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for side in [Side::A, Side::B] {
            let members: Vec<&str> = self
                .vertices()
                .filter(|&v| self.sides[v] == side)
                .map(|v| self.names[v].as_str())
                .collect();
            if !members.is_empty() {
                out.push_str(&format!("#@{} {}\n", side, members.join(" ")));
            }
        }
        for &[u, v] in &self.edges {
            out.push_str(&format!("{} {}\n", self.names[u], self.names[v]));
        }
        out
    }

    pub fn vertex_count(&self) -> usize {
        self.names.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn vertices(&self) -> std::ops::Range<VertexId> {
        0..self.names.len()
    }

    pub fn name(&self, v: VertexId) -> &str {
        &self.names[v]
    }

    pub fn vertex(&self, name: &str) -> Option<VertexId> {
        self.index.get(name).copied()
    }

    pub fn side(&self, v: VertexId) -> Side {
        self.sides[v]
    }

    pub fn degree(&self, v: VertexId) -> usize {
        self.adjacency[v].len()
    }

    /// Endpoints of an edge, in input order.
    pub fn endpoints(&self, e: EdgeId) -> [VertexId; 2] {
        self.edges[e]
    }

    pub fn edges(&self) -> &[[VertexId; 2]] {
        &self.edges
    }

    /// The endpoint of `e` other than `v`.
    pub fn opposite(&self, e: EdgeId, v: VertexId) -> VertexId {
        let [a, b] = self.edges[e];
        if a == v {
            b
        } else {
            a
        }
    }

    /// `(neighbour, edge)` pairs in edge-id order.
    pub fn incident(&self, v: VertexId) -> &[(VertexId, EdgeId)] {
        &self.adjacency[v]
    }

    pub fn edge_between(&self, u: VertexId, v: VertexId) -> Option<EdgeId> {
        self.lookup.get(&key(u, v)).copied()
    }

    /// Human-readable `u-v` label for an edge.
    pub fn edge_label(&self, e: EdgeId) -> String {
        let [a, b] = self.edges[e];
        format!("{}-{}", self.names[a], self.names[b])
    }

    pub fn is_connected(&self) -> bool {
        if self.names.is_empty() {
            return true;
        }
        let mut seen = vec![false; self.names.len()];
        let mut queue = VecDeque::from([0]);
        seen[0] = true;
        let mut count = 1;
        while let Some(u) = queue.pop_front() {
            for &(w, _) in &self.adjacency[u] {
                if !seen[w] {
                    seen[w] = true;
                    count += 1;
                    queue.push_back(w);
                }
            }
        }
        count == self.names.len()
    }
}

/// BFS 2-colouring in first-appearance order. Returns sides and component ids.
fn two_colour(
    names: &[String],
    adjacency: &[Vec<(VertexId, EdgeId)>],
) -> Result<(Vec<Side>, Vec<usize>), GraphError> {
    let n = names.len();
    let mut side: Vec<Option<Side>> = vec![None; n];
    let mut parent: Vec<Option<VertexId>> = vec![None; n];
    let mut component = vec![usize::MAX; n];
    let mut components = 0;
    for root in 0..n {
        if side[root].is_some() {
            continue;
        }
        side[root] = Some(Side::A);
        component[root] = components;
        let mut queue = VecDeque::from([root]);
        while let Some(u) = queue.pop_front() {
            let su = side[u].expect("queued vertices are coloured");
            for &(w, _) in &adjacency[u] {
                match side[w] {
                    None => {
                        side[w] = Some(su.other());
                        parent[w] = Some(u);
                        component[w] = components;
                        queue.push_back(w);
                    }
                    Some(sw) if sw == su => {
                        let cycle = odd_cycle(&parent, u, w);
                        return Err(GraphError::NotBipartite {
                            cycle: cycle.into_iter().map(|v| names[v].clone()).collect(),
                        });
                    }
                    Some(_) => {}
                }
            }
        }
        components += 1;
    }
    Ok((side.into_iter().map(|s| s.expect("all coloured")).collect(), component))
}

/// Closes the BFS-tree paths from `u` and `w` at their lowest common ancestor.
fn odd_cycle(parent: &[Option<VertexId>], u: VertexId, w: VertexId) -> Vec<VertexId> {
    let path_to_root = |mut x: VertexId| {
        let mut path = vec![x];
        while let Some(p) = parent[x] {
            path.push(p);
            x = p;
        }
        path
    };
    let pu = path_to_root(u);
    let pw = path_to_root(w);
    let lca = *pu
        .iter()
        .find(|x| pw.contains(x))
        .expect("same BFS tree");
    let mut cycle: Vec<VertexId> = pu.iter().take_while(|&&x| x != lca).copied().collect();
    cycle.push(lca);
    cycle.reverse();
    let tail: Vec<VertexId> = pw.iter().take_while(|&&x| x != lca).copied().collect();
    cycle.extend(tail);
    cycle.push(lca);
    cycle
}

/// Per-vertex colour degrees `d_i(v)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ColourDegreeTable {
    colours: usize,
    counts: Vec<usize>,
}

impl ColourDegreeTable {
    pub fn new(g: &Graph, col: &Colouring) -> Result<Self, GraphError> {
        if col.len() < g.edge_count() {
            return Err(GraphError::UncolouredEdge(col.len()));
        }
        let colours = col.colour_count();
        let mut counts = vec![0; g.vertex_count() * (colours + 1)];
        for (e, &[a, b]) in g.edges().iter().enumerate() {
            let c = col.colour(e);
            counts[a * (colours + 1) + c] += 1;
            counts[b * (colours + 1) + c] += 1;
        }
        Ok(ColourDegreeTable { colours, counts })
    }

    /// `d_i(v)`; colours are 1-based, so `get(v, 0)` is always 0.
    pub fn get(&self, v: VertexId, colour: usize) -> usize {
        if colour > self.colours {
            return 0;
        }
        self.counts[v * (self.colours + 1) + colour]
    }

    pub fn colour_count(&self) -> usize {
        self.colours
    }
}

/// Number of edges at `v` with colour `colour`.
pub fn colour_degree(
    g: &Graph,
    col: &Colouring,
    v: VertexId,
    colour: usize,
) -> Result<usize, GraphError> {
    if v >= g.vertex_count() {
        return Err(GraphError::VertexOutOfRange(v));
    }
    let mut count = 0;
    for &(_, e) in g.incident(v) {
        if e >= col.len() {
            return Err(GraphError::UncolouredEdge(e));
        }
        if col.colour(e) == colour {
            count += 1;
        }
    }
    Ok(count)
}

/// Global edge connectivity: the minimum over all targets of the unit
/// capacity max-flow from vertex 0. Returns 0 for disconnected graphs.
pub fn edge_connectivity(g: &Graph) -> Result<usize, GraphError> {
    let n = g.vertex_count();
    if n < 2 {
        return Err(GraphError::TooSmall(n));
    }
    if !g.is_connected() {
        return Ok(0);
    }
    let mut best = usize::MAX;
    for t in 1..n {
        let bound = best.min(g.degree(0)).min(g.degree(t));
        best = best.min(unit_max_flow(g, 0, t, bound));
    }
    Ok(best)
}

/// Max-flow between `s` and `t` where every undirected edge has capacity
/// one in each direction. Stops once the flow reaches `cap`.
pub fn unit_max_flow(g: &Graph, s: VertexId, t: VertexId, cap: usize) -> usize {
    // flow[e] in {-1, 0, 1}: +1 means one unit from edges[e][0] to edges[e][1].
    let mut flow = vec![0i8; g.edge_count()];
    let mut total = 0;
    let n = g.vertex_count();
    let mut pred: Vec<Option<(VertexId, EdgeId)>> = vec![None; n];
    while total < cap {
        pred.iter_mut().for_each(|p| *p = None);
        let mut visited = vec![false; n];
        visited[s] = true;
        let mut queue = VecDeque::from([s]);
        'bfs: while let Some(u) = queue.pop_front() {
            for &(w, e) in g.incident(u) {
                if visited[w] {
                    continue;
                }
                let forward = g.endpoints(e)[0] == u;
                let residual = if forward { 1 - flow[e] } else { 1 + flow[e] };
                if residual > 0 {
                    visited[w] = true;
                    pred[w] = Some((u, e));
                    if w == t {
                        break 'bfs;
                    }
                    queue.push_back(w);
                }
            }
        }
        if !visited[t] {
            break;
        }
        let mut x = t;
        while let Some((u, e)) = pred[x] {
            if g.endpoints(e)[0] == u {
                flow[e] += 1;
            } else {
                flow[e] -= 1;
            }
            x = u;
        }
        total += 1;
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c4() -> Graph {
        Graph::from_edges(&[("a1", "b1"), ("a1", "b2"), ("a2", "b1"), ("a2", "b2")]).unwrap()
    }

    #[test]
    fn loads_c4_with_classes() {
        let g = c4();
        assert_eq!(g.vertex_count(), 4);
        for name in ["a1", "a2"] {
            assert_eq!(g.side(g.vertex(name).unwrap()), Side::A);
        }
        for name in ["b1", "b2"] {
            assert_eq!(g.side(g.vertex(name).unwrap()), Side::B);
        }
    }

    #[test]
    fn triangle_reports_witness() {
        let err = Graph::from_edges(&[("a", "b"), ("b", "c"), ("c", "a")]).unwrap_err();
        assert_eq!(
            err,
            GraphError::NotBipartite {
                cycle: vec!["a".into(), "b".into(), "c".into(), "a".into()]
            }
        );
    }

    #[test]
    fn rejects_duplicate_and_loop() {
        assert!(matches!(
            Graph::from_edges(&[("a", "b"), ("a", "b")]),
            Err(GraphError::DuplicateEdge(..))
        ));
        assert!(matches!(
            Graph::from_edges(&[("a", "b"), ("b", "a")]),
            Err(GraphError::DuplicateEdge(..))
        ));
        assert!(matches!(
            Graph::from_edges(&[("a", "a")]),
            Err(GraphError::SelfLoop(_))
        ));
    }

    #[test]
    fn declared_sides_orient_components() {
        let g = Graph::from_edges_with_sides(&[("x", "y"), ("p", "q")], &[("y", Side::A), ("p", Side::A)])
            .unwrap();
        assert_eq!(g.side(g.vertex("y").unwrap()), Side::A);
        assert_eq!(g.side(g.vertex("x").unwrap()), Side::B);
        assert_eq!(g.side(g.vertex("p").unwrap()), Side::A);
        let err = Graph::from_edges_with_sides(&[("x", "y")], &[("x", Side::A), ("y", Side::A)])
            .unwrap_err();
        assert!(matches!(err, GraphError::PartitionMismatch { .. }));
    }

    #[test]
    fn text_round_trip_keeps_classes() {
        let g = Graph::parse("#@B a\n# comment\n\na b\nb c\n").unwrap();
        assert_eq!(g.side(g.vertex("a").unwrap()), Side::B);
        let again = Graph::parse(&g.to_text()).unwrap();
        assert_eq!(g, again);
        assert!(matches!(
            Graph::parse("a b c\n"),
            Err(GraphError::Format { line: 1, .. })
        ));
    }

    #[test]
    fn connectivity_examples() {
        assert_eq!(edge_connectivity(&c4()).unwrap(), 2);
        let mut k33 = Vec::new();
        for a in ["a1", "a2", "a3"] {
            for b in ["b1", "b2", "b3"] {
                k33.push((a, b));
            }
        }
        assert_eq!(edge_connectivity(&Graph::from_edges(&k33).unwrap()).unwrap(), 3);
        let two = Graph::from_edges(&[("a", "b"), ("c", "d")]).unwrap();
        assert_eq!(edge_connectivity(&two).unwrap(), 0);
        let empty = Graph::from_edges::<&str>(&[]).unwrap();
        assert_eq!(edge_connectivity(&empty), Err(GraphError::TooSmall(0)));
    }

    #[test]
    fn colour_degrees_on_c4() {
        let g = c4();
        let col = Colouring::new(vec![1, 2, 2, 1], 3).unwrap();
        let a1 = g.vertex("a1").unwrap();
        let b1 = g.vertex("b1").unwrap();
        assert_eq!(colour_degree(&g, &col, a1, 1).unwrap(), 1);
        assert_eq!(colour_degree(&g, &col, b1, 1).unwrap(), 1);
        assert_eq!(colour_degree(&g, &col, b1, 3).unwrap(), 0);
        assert_eq!(colour_degree(&g, &col, 9, 1), Err(GraphError::VertexOutOfRange(9)));
        let short = Colouring::new(vec![1, 2], 2).unwrap();
        assert_eq!(
            colour_degree(&g, &short, g.vertex("a2").unwrap(), 1),
            Err(GraphError::UncolouredEdge(2))
        );
        let table = ColourDegreeTable::new(&g, &col).unwrap();
        for v in g.vertices() {
            let sum: usize = (1..=3).map(|c| table.get(v, c)).sum();
            assert_eq!(sum, g.degree(v));
        }
    }
}
