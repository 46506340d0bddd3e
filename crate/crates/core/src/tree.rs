//! The pattern tree with its breadth-first labelling.
//!
//! Vertices are labelled `t_0..t_m` so that every prefix `t_0..t_i` induces
//! a connected subtree, and edge `e_i` joins `t_i` to its parent
//! `t_{i'}` with `i' < i`. Tree vertices use [`Side::A`] for the class of
//! the root (`T_A`) and [`Side::B`] for the other class (`T_B`).

use std::collections::{HashMap, VecDeque};

use thiserror::Error;

use crate::graph::Side;

/// Label `j` of tree vertex `t_j`.
pub type TreeVertex = usize;
/// Label `i` of tree edge `e_i`, in `1..=m`.
pub type TreeEdge = usize;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TreeError {
    #[error("not a tree: {0}")]
    NotATree(String),
    #[error("root {0} is not a vertex of the tree")]
    RootUnknown(String),
    #[error("with root {0}, the non-root class T_B contains no leaf")]
    NoLeafInTB(String),
    #[error("tree vertex t_{0} does not exist")]
    UnknownTreeVertex(TreeVertex),
    #[error("edge index {0} outside 1..={1}")]
    IndexOutOfRange(TreeEdge, usize),
    #[error("line {line}: {message}")]
    Format { line: usize, message: String },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LabelledTree {
    names: Vec<String>,
    parent: Vec<TreeVertex>,
    sides: Vec<Side>,
    incident: Vec<Vec<TreeEdge>>,
    children: Vec<Vec<TreeVertex>>,
}

/// The two sides of `T - e_i`: `minus` holds the component of `t_0`, `plus`
/// the remaining edges, which always include `e_i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TreeSplit {
    pub index: TreeEdge,
    pub minus_edges: Vec<TreeEdge>,
    pub plus_edges: Vec<TreeEdge>,
    /// `in_plus[j]` is true iff `t_j` lies in the subtree hanging below `e_i`.
    pub in_plus: Vec<bool>,
}

impl LabelledTree {
    /// Labels a tree by breadth-first search from `root`; neighbours are
    /// visited in input order. `T_A` is the class of the root.
    pub fn label<S: AsRef<str>>(edges: &[(S, S)], root: &str) -> Result<LabelledTree, TreeError> {
        let tree = Self::label_unchecked(edges, root)?;
        if !tree.has_leaf_in_tb() {
            return Err(TreeError::NoLeafInTB(root.to_string()));
        }
        Ok(tree)
    }

    /// Picks the lowest-index vertex (in order of first appearance) whose
    /// opposite class contains a leaf, and labels from there.
    pub fn auto_root<S: AsRef<str>>(edges: &[(S, S)]) -> Result<LabelledTree, TreeError> {
        let (names, adjacency) = intern(edges)?;
        // Any vertex works as root for validation; use the first.
        let probe = Self::build(&names, &adjacency, 0)?;
        for candidate in 0..names.len() {
            let candidate_side = probe.side_of_name(&names[candidate]);
            let opposite_has_leaf = (0..probe.vertex_count())
                .any(|t| probe.sides[t] != candidate_side && probe.is_leaf(t));
            if opposite_has_leaf {
                return Self::build(&names, &adjacency, candidate);
            }
        }
        Err(TreeError::NoLeafInTB(names[0].clone()))
    }

    /// Labels without enforcing the leaf condition on `T_B`.
    pub fn label_unchecked<S: AsRef<str>>(
        edges: &[(S, S)],
        root: &str,
    ) -> Result<LabelledTree, TreeError> {
        let (names, adjacency) = intern(edges)?;
        let root = names
            .iter()
            .position(|n| n == root)
            .ok_or_else(|| TreeError::RootUnknown(root.to_string()))?;
        Self::build(&names, &adjacency, root)
    }

    /// Builds an already-labelled tree from its parent map:
    /// `parents[i - 1]` is the parent label of `t_i`, and must be `< i`.
    /// Vertices are named `t0..tm`. The leaf condition is not enforced.
    pub fn from_parents(parents: &[TreeVertex]) -> Result<LabelledTree, TreeError> {
        if parents.is_empty() {
            return Err(TreeError::NotATree("a tree needs at least one edge".into()));
        }
        let mut edges = Vec::with_capacity(parents.len());
        for (k, &p) in parents.iter().enumerate() {
            let i = k + 1;
            if p >= i {
                return Err(TreeError::NotATree(format!(
                    "parent of t_{i} is t_{p}, which is not an earlier label"
                )));
            }
            edges.push((format!("t{p}"), format!("t{i}")));
        }
        let tree = Self::label_unchecked(&edges, "t0")?;
        debug_assert!((1..=parents.len()).all(|i| tree.parent(i) == parents[i - 1]));
        Ok(tree)
    }

    fn build(
        names: &[String],
        adjacency: &[Vec<usize>],
        root: usize,
    ) -> Result<LabelledTree, TreeError> {
        let n = names.len();
        let mut label = vec![usize::MAX; n];
        let mut order = Vec::with_capacity(n);
        let mut parent_of = vec![usize::MAX; n];
        label[root] = 0;
        order.push(root);
        let mut queue = VecDeque::from([root]);
        while let Some(u) = queue.pop_front() {
            for &w in &adjacency[u] {
                if label[w] == usize::MAX {
                    label[w] = order.len();
                    parent_of[w] = u;
                    order.push(w);
                    queue.push_back(w);
                }
            }
        }
        if order.len() != n {
            return Err(TreeError::NotATree("disconnected".into()));
        }
        let mut parent = vec![0; n];
        let mut sides = vec![Side::A; n];
        let mut incident = vec![Vec::new(); n];
        let mut children = vec![Vec::new(); n];
        for (j, &orig) in order.iter().enumerate().skip(1) {
            let p = label[parent_of[orig]];
            parent[j] = p;
            sides[j] = sides[p].other();
            incident[j].push(j);
            incident[p].push(j);
            children[p].push(j);
        }
        for s in &mut incident {
            s.sort_unstable();
        }
        Ok(LabelledTree {
            names: order.iter().map(|&o| names[o].clone()).collect(),
            parent,
            sides,
            incident,
            children,
        })
    }

    /// Parses the tree file format: the edge-list format with an optional
    /// first line `root <name>`. Without it the root is chosen by
    /// [`LabelledTree::auto_root`].
    pub fn parse(text: &str) -> Result<LabelledTree, TreeError> {
        let mut root: Option<String> = None;
        let mut pairs = Vec::new();
        let mut seen_content = false;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let tokens: Vec<&str> = line.split_whitespace().collect();
            if !seen_content && tokens.len() == 2 && tokens[0] == "root" {
                root = Some(tokens[1].to_string());
                seen_content = true;
                continue;
            }
            seen_content = true;
            if tokens.len() != 2 {
                return Err(TreeError::Format {
                    line: lineno + 1,
                    message: format!("expected two vertex names, found {}", tokens.len()),
                });
            }
            pairs.push((tokens[0].to_string(), tokens[1].to_string()));
        }
        match root {
            Some(r) => Self::label(&pairs, &r),
            None => Self::auto_root(&pairs),
        }
    }

    /// Writes `root <name>` followed by the edges in label order.
    pub fn to_text(&self) -> String {
        let mut out = format!("root {}\n", self.names[0]);
        for i in 1..=self.edge_count() {
            out.push_str(&format!("{} {}\n", self.names[self.parent[i]], self.names[i]));
        }
        out
    }

    /// `m`, the number of edges.
    pub fn edge_count(&self) -> usize {
        self.names.len() - 1
    }

    pub fn vertex_count(&self) -> usize {
        self.names.len()
    }

    pub fn name(&self, t: TreeVertex) -> &str {
        &self.names[t]
    }

    fn side_of_name(&self, name: &str) -> Side {
        let t = self.names.iter().position(|n| n == name).expect("known name");
        self.sides[t]
    }

    /// `i'(i)`, the parent label of `t_i`.
    pub fn parent(&self, i: TreeEdge) -> TreeVertex {
        self.parent[i]
    }

    /// Class of `t`: [`Side::A`] for `T_A`, [`Side::B`] for `T_B`.
    pub fn side(&self, t: TreeVertex) -> Side {
        self.sides[t]
    }

    pub fn children(&self, t: TreeVertex) -> &[TreeVertex] {
        &self.children[t]
    }

    pub fn degree(&self, t: TreeVertex) -> usize {
        self.incident[t].len()
    }

    pub fn is_leaf(&self, t: TreeVertex) -> bool {
        self.incident[t].len() == 1
    }

    pub fn has_leaf_in_tb(&self) -> bool {
        (0..self.vertex_count()).any(|t| self.sides[t] == Side::B && self.is_leaf(t))
    }

    /// `S(t)`: labels of the edges incident with `t`, ascending.
    pub fn incident(&self, t: TreeVertex) -> &[TreeEdge] {
        &self.incident[t]
    }

    /// Checked form of [`LabelledTree::incident`].
    pub fn incident_colours(&self, t: TreeVertex) -> Result<&[TreeEdge], TreeError> {
        self.incident
            .get(t)
            .map(Vec::as_slice)
            .ok_or(TreeError::UnknownTreeVertex(t))
    }

    /// The endpoint of `e_i` in class `side`.
    pub fn endpoint_on(&self, i: TreeEdge, side: Side) -> TreeVertex {
        if self.sides[i] == side {
            i
        } else {
            self.parent[i]
        }
    }

    /// The endpoint of `e_i` other than `t`.
    pub fn other_endpoint(&self, i: TreeEdge, t: TreeVertex) -> TreeVertex {
        if t == i {
            self.parent[i]
        } else {
            i
        }
    }

    /// Splits `T` at `e_i` into `T^{i-}` (containing `t_0`) and `T^{i+}`.
    pub fn split(&self, i: TreeEdge) -> Result<TreeSplit, TreeError> {
        let m = self.edge_count();
        if i == 0 || i > m {
            return Err(TreeError::IndexOutOfRange(i, m));
        }
        let mut in_plus = vec![false; m + 1];
        in_plus[i] = true;
        // parent[k] < k, so one forward sweep marks the whole subtree.
        for k in i + 1..=m {
            in_plus[k] = in_plus[self.parent[k]];
        }
        let (plus_edges, minus_edges) = (1..=m).partition(|&k| in_plus[k]);
        Ok(TreeSplit {
            index: i,
            minus_edges,
            plus_edges,
            in_plus,
        })
    }
}

fn intern<S: AsRef<str>>(edges: &[(S, S)]) -> Result<(Vec<String>, Vec<Vec<usize>>), TreeError> {
    if edges.is_empty() {
        return Err(TreeError::NotATree("a tree needs at least one edge".into()));
    }
    let mut names: Vec<String> = Vec::new();
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut adjacency: Vec<Vec<usize>> = Vec::new();
    for (u, v) in edges {
        let (u, v) = (u.as_ref(), v.as_ref());
        if u == v {
            return Err(TreeError::NotATree(format!("self-loop at {u}")));
        }
        let mut id = |name: &str| {
            *index.entry(name.to_string()).or_insert_with(|| {
                names.push(name.to_string());
                adjacency.push(Vec::new());
                names.len() - 1
            })
        };
        let a = id(u);
        let b = id(v);
        if adjacency[a].contains(&b) {
            return Err(TreeError::NotATree(format!("repeated edge {u}-{v}")));
        }
        adjacency[a].push(b);
        adjacency[b].push(a);
    }
    if edges.len() + 1 != names.len() {
        return Err(TreeError::NotATree(format!(
            "{} edges on {} vertices",
            edges.len(),
            names.len()
        )));
    }
    Ok((names, adjacency))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn path_rooted_at_end_has_no_leaf_in_tb() {
        let path = [("u", "v"), ("v", "w")];
        assert_eq!(
            LabelledTree::label(&path, "u"),
            Err(TreeError::NoLeafInTB("u".into()))
        );
        let t = LabelledTree::label_unchecked(&path, "u").unwrap();
        assert_eq!((t.name(0), t.name(1), t.name(2)), ("u", "v", "w"));
        assert_eq!((t.parent(1), t.parent(2)), (0, 1));
        assert_eq!(t.side(0), Side::A);
        assert_eq!(t.side(1), Side::B);
        assert_eq!(t.side(2), Side::A);

        let t = LabelledTree::label(&path, "v").unwrap();
        assert_eq!(t.name(0), "v");
        assert_eq!(t.side(0), Side::A);
        assert!((1..=2).all(|j| t.side(j) == Side::B && t.is_leaf(j)));
    }

    #[test]
    fn star_and_single_edge() {
        let star = LabelledTree::label(&[("c", "x"), ("c", "y"), ("c", "z")], "c").unwrap();
        assert_eq!(star.incident(0), &[1, 2, 3]);
        assert_eq!(star.name(1), "x");
        let edge = LabelledTree::label(&[("u", "v")], "u").unwrap();
        assert_eq!(edge.edge_count(), 1);
        assert_eq!(edge.side(1), Side::B);
        assert!(edge.is_leaf(1));
    }

    #[test]
    fn incident_colours_examples() {
        let path = LabelledTree::from_parents(&[0, 1]).unwrap();
        assert_eq!(path.incident_colours(1).unwrap(), &[1, 2]);
        assert_eq!(path.incident_colours(0).unwrap(), &[1]);
        assert_eq!(path.incident_colours(5), Err(TreeError::UnknownTreeVertex(5)));
    }

    #[test]
    fn rejects_non_trees() {
        let cycle = [("a", "b"), ("b", "c"), ("c", "a")];
        assert!(matches!(LabelledTree::label(&cycle, "a"), Err(TreeError::NotATree(_))));
        let forest = [("a", "b"), ("c", "d"), ("d", "e"), ("a", "b")];
        assert!(matches!(LabelledTree::label(&forest, "a"), Err(TreeError::NotATree(_))));
        assert_eq!(
            LabelledTree::label(&[("a", "b")], "z"),
            Err(TreeError::RootUnknown("z".into()))
        );
        assert!(matches!(LabelledTree::from_parents(&[0, 2]), Err(TreeError::NotATree(_))));
    }

    #[test]
    fn split_examples() {
        let path = LabelledTree::from_parents(&[0, 1, 2, 3]).unwrap();
        let s = path.split(4).unwrap();
        assert_eq!(s.minus_edges, vec![1, 2, 3]);
        assert_eq!(s.plus_edges, vec![4]);
        let s = path.split(1).unwrap();
        assert!(s.minus_edges.is_empty());
        assert_eq!(s.plus_edges, vec![1, 2, 3, 4]);
        let star = LabelledTree::from_parents(&[0, 0, 0]).unwrap();
        let s = star.split(2).unwrap();
        assert_eq!(s.minus_edges, vec![1, 3]);
        assert_eq!(s.plus_edges, vec![2]);
        assert_eq!(path.split(0), Err(TreeError::IndexOutOfRange(0, 4)));
        assert_eq!(path.split(5), Err(TreeError::IndexOutOfRange(5, 4)));
    }

    #[test]
    fn auto_root_prefers_lowest_index() {
        // Path a-b-c-d-e: leaves a, e share a class with c.
        let t = LabelledTree::auto_root(&[("a", "b"), ("b", "c"), ("c", "d"), ("d", "e")]).unwrap();
        assert_eq!(t.name(0), "b");
        assert!(t.has_leaf_in_tb());
        let star = LabelledTree::auto_root(&[("x", "c"), ("c", "y")]).unwrap();
        assert_eq!(star.name(0), "c");
    }

    #[test]
    fn parse_with_and_without_root() {
        let t = LabelledTree::parse("# tree\nroot v\nu v\nv w\n").unwrap();
        assert_eq!(t.name(0), "v");
        let again = LabelledTree::parse(&t.to_text()).unwrap();
        assert_eq!(t, again);
        let auto = LabelledTree::parse("u v\nv w\n").unwrap();
        assert_eq!(auto.name(0), "v");
    }
}
