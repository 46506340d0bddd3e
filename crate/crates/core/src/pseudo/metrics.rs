//! Degree tables `d_P(v|t)`, conflict ratios, and the density check.

use std::collections::HashMap;

use serde::Serialize;

use super::{PseudoCopy, Rational};
use crate::graph::{Graph, VertexId};
use crate::tree::{LabelledTree, TreeVertex};

/// `d_P(v|t)`: the number of copies in which `v` is the image of `t`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DegreeTable {
    tree_vertices: usize,
    counts: Vec<usize>,
}

impl DegreeTable {
    pub fn new<'a, I>(vertices: usize, m: usize, copies: I) -> DegreeTable
    where
        I: IntoIterator<Item = &'a PseudoCopy>,
    {
        let tree_vertices = m + 1;
        let mut counts = vec![0; vertices * tree_vertices];
        for copy in copies {
            for (t, &v) in copy.images().iter().enumerate() {
                counts[v * tree_vertices + t] += 1;
            }
        }
        DegreeTable {
            tree_vertices,
            counts,
        }
    }

    pub fn get(&self, v: VertexId, t: TreeVertex) -> usize {
        self.counts
            .get(v * self.tree_vertices + t)
            .copied()
            .unwrap_or(0)
    }

    pub fn vertex_count(&self) -> usize {
        self.counts.len() / self.tree_vertices
    }

    pub fn tree_vertex_count(&self) -> usize {
        self.tree_vertices
    }
}

/// Conflict ratios of a collection for every `(v, t)` with `d(v|t) > 0`.
/// Pairs with `d(v|t) = 0`, including incompatible ones, have ratio 0.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConflictTable {
    ratios: HashMap<(VertexId, TreeVertex), Rational>,
}

impl ConflictTable {
    pub fn new<'a, I>(m: usize, copies: I) -> ConflictTable
    where
        I: IntoIterator<Item = &'a PseudoCopy>,
    {
        let copies: Vec<&PseudoCopy> = copies.into_iter().collect();
        let sets: Vec<Vec<VertexId>> = copies.iter().map(|c| c.vertex_set()).collect();
        let mut ratios = HashMap::new();
        for t in 0..=m {
            let mut groups: HashMap<VertexId, Vec<usize>> = HashMap::new();
            for (k, c) in copies.iter().enumerate() {
                groups.entry(c.image(t)).or_default().push(k);
            }
            for (v, members) in groups {
                let mut hits: HashMap<VertexId, u64> = HashMap::new();
                for &k in &members {
                    for &u in &sets[k] {
                        if u != v {
                            *hits.entry(u).or_default() += 1;
                        }
                    }
                }
                let top = hits.values().copied().max().unwrap_or(0);
                ratios.insert((v, t), Rational::new(top, members.len() as u64));
            }
        }
        ConflictTable { ratios }
    }

    /// `conf(v|t)`.
    pub fn get(&self, v: VertexId, t: TreeVertex) -> Rational {
        self.ratios.get(&(v, t)).copied().unwrap_or_else(|| Rational::from_integer(0))
    }

    /// `conf(P) = max_{v,t} conf(v|t)`.
    pub fn global(&self) -> Rational {
        self.ratios
            .values()
            .copied()
            .max()
            .unwrap_or_else(|| Rational::from_integer(0))
    }

    /// All `(v, t, conf)` with `d(v|t) > 0`, sorted by `(t, v)`.
    pub fn entries(&self) -> Vec<(VertexId, TreeVertex, Rational)> {
        let mut out: Vec<_> = self.ratios.iter().map(|(&(v, t), &r)| (v, t, r)).collect();
        out.sort_by_key(|&(v, t, _)| (t, v));
        out
    }
}

/// `conf_P(v|t)` for a single pair.
pub fn conflict(copies: &[PseudoCopy], v: VertexId, t: TreeVertex) -> Rational {
    let members: Vec<&PseudoCopy> = copies.iter().filter(|c| c.image(t) == v).collect();
    if members.is_empty() {
        return Rational::from_integer(0);
    }
    let mut hits: HashMap<VertexId, u64> = HashMap::new();
    for c in &members {
        for u in c.vertex_set() {
            if u != v {
                *hits.entry(u).or_default() += 1;
            }
        }
    }
    let top = hits.values().copied().max().unwrap_or(0);
    Rational::new(top, members.len() as u64)
}

/// `conf(P)`.
pub fn conflict_global(m: usize, copies: &[PseudoCopy]) -> Rational {
    ConflictTable::new(m, copies).global()
}

/// `d_H(v|t)` and `d_I(v|t)` for one compatible pair.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct PairStat {
    pub vertex: VertexId,
    pub tree_vertex: TreeVertex,
    pub d_h: usize,
    pub d_i: usize,
}

/// Whether a pseudo-decomposition meets `d_H(v|t) <= eps d_I(v|t)` for
/// every compatible pair and `conf(I) <= delta`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LemmaDenseReport {
    #[serde(serialize_with = "ser_ratio")]
    pub eps: Rational,
    #[serde(serialize_with = "ser_ratio")]
    pub delta: Rational,
    /// Every compatible pair with `d_P(v|t) > 0`, sorted by `(t, v)`.
    pub pairs: Vec<PairStat>,
    /// Pairs violating the degree condition.
    pub violations: Vec<PairStat>,
    #[serde(serialize_with = "ser_ratio")]
    pub conf_i: Rational,
    pub degree_condition: bool,
    pub conflict_condition: bool,
}

impl LemmaDenseReport {
    pub fn holds(&self) -> bool {
        self.degree_condition && self.conflict_condition
    }
}

pub(crate) fn ser_ratio<S: serde::Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&r.to_string())
}

pub fn check_lemma_dense(
    g: &Graph,
    tree: &LabelledTree,
    copies: &[PseudoCopy],
    eps: Rational,
    delta: Rational,
) -> LemmaDenseReport {
    let m = tree.edge_count();
    let (h, i): (Vec<&PseudoCopy>, Vec<&PseudoCopy>) = copies.iter().partition(|c| !c.is_isomorphic());
    let dh = DegreeTable::new(g.vertex_count(), m, h.iter().copied());
    let di = DegreeTable::new(g.vertex_count(), m, i.iter().copied());
    let mut pairs = Vec::new();
    let mut violations = Vec::new();
    for t in 0..=m {
        for v in g.vertices() {
            if g.side(v) != tree.side(t) {
                continue;
            }
            let stat = PairStat {
                vertex: v,
                tree_vertex: t,
                d_h: dh.get(v, t),
                d_i: di.get(v, t),
            };
            if stat.d_h + stat.d_i == 0 {
                continue;
            }
            // d_h <= (p/q) d_i  <=>  d_h q <= p d_i
            let ok = (stat.d_h as u128) * (*eps.denom() as u128)
                <= (*eps.numer() as u128) * (stat.d_i as u128);
            if !ok {
                violations.push(stat);
            }
            pairs.push(stat);
        }
    }
    let conf_i = ConflictTable::new(m, i.iter().copied()).global();
    LemmaDenseReport {
        eps,
        delta,
        degree_condition: violations.is_empty(),
        conflict_condition: conf_i <= delta,
        pairs,
        violations,
        conf_i,
    }
}
